//! Run report assembly and CSV emission.
//!
//! The report is the human-readable side of a run: per-suite sections,
//! the cross-check matrix with contradictions flagged prominently, wall
//! times, and an echo of the fully resolved configuration.  The CSV files
//! are the machine-readable side; their formatting is byte-deterministic
//! (`{:.12e}` floats, fixed row order), so identical configs and seeds
//! reproduce them exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::verdicts::{Outcome, Verdict};

/// One row of the cross-check matrix.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    /// What was compared, e.g. `"plane: parabolicity ⇒ completeness"`.
    pub label: String,
    /// The quantitative outcome, e.g. a gap or a z-score.
    pub detail: String,
    /// Whether the check passed; failures are contradictions.
    pub ok: bool,
}

/// One suite's contribution to the report.
#[derive(Debug, Clone)]
pub struct Section {
    /// Suite name (`verdict`, `feller`, `mc`, `submersion`, `immersion`).
    pub suite: String,
    /// Human-readable result lines.
    pub lines: Vec<String>,
    /// Wall time the suite took.
    pub seconds: f64,
}

/// Everything a run produces besides the CSV payloads.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// Crate version stamp.
    pub version: String,
    /// Fully resolved configuration echo (TOML).
    pub config_echo: String,
    /// Per-suite sections, in canonical order.
    pub sections: Vec<Section>,
    /// Every cross-check performed.
    pub cross_checks: Vec<CrossCheck>,
    /// Labels of inconclusive verdicts (exit 2 under `--strict`).
    pub inconclusive: Vec<String>,
    /// CSV files written, relative to the output directory.
    pub csv_files: Vec<String>,
}

impl RunReport {
    pub fn new(config_echo: String) -> Self {
        RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_echo,
            sections: Vec::new(),
            cross_checks: Vec::new(),
            inconclusive: Vec::new(),
            csv_files: Vec::new(),
        }
    }

    /// Contradictions: cross-checks that failed.
    pub fn contradictions(&self) -> Vec<&CrossCheck> {
        self.cross_checks.iter().filter(|c| !c.ok).collect()
    }

    /// Registers a verdict in the inconclusive ledger if needed and
    /// returns a formatted report line for it.
    pub fn note_verdict(&mut self, owner: &str, verdict: &Verdict) -> String {
        let label = format!("{owner}: {}", verdict.property);
        if verdict.outcome == Outcome::Inconclusive {
            self.inconclusive.push(label.clone());
        }
        let evidence = verdict
            .evidence
            .iter()
            .map(|e| format!("{} = {:.6e} ({})", e.method, e.value, e.detail))
            .collect::<Vec<_>>()
            .join("; ");
        format!("{label}: {} [{evidence}]", verdict.outcome)
    }

    /// Exit code per the contract: 0 = all decided and consistent,
    /// 2 = contradictions, or inconclusive verdicts under `--strict`.
    /// (Hard errors never reach this point; they exit 1.)
    pub fn exit_code(&self, strict: bool) -> i32 {
        if !self.contradictions().is_empty() {
            return 2;
        }
        if strict && !self.inconclusive.is_empty() {
            return 2;
        }
        0
    }

    /// Renders the human-readable report.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "stochlab v{} run report", self.version);
        let _ = writeln!(out, "{}", "=".repeat(60));

        let contradictions = self.contradictions();
        if contradictions.is_empty() {
            let _ = writeln!(out, "cross-checks: all {} consistent", self.cross_checks.len());
        } else {
            let _ = writeln!(out, "!! CONTRADICTIONS ({}) !!", contradictions.len());
            for c in &contradictions {
                let _ = writeln!(out, "!!   {} — {}", c.label, c.detail);
            }
        }
        if !self.inconclusive.is_empty() {
            let _ = writeln!(out, "inconclusive ({}):", self.inconclusive.len());
            for label in &self.inconclusive {
                let _ = writeln!(out, "    {label}");
            }
        }
        let _ = writeln!(out);

        for section in &self.sections {
            let _ = writeln!(out, "[{}]  ({:.3}s)", section.suite, section.seconds);
            for line in &section.lines {
                let _ = writeln!(out, "  {line}");
            }
            let _ = writeln!(out);
        }

        let _ = writeln!(out, "[cross-check matrix]");
        for c in &self.cross_checks {
            let mark = if c.ok { "ok " } else { "FAIL" };
            let _ = writeln!(out, "  {mark}  {} — {}", c.label, c.detail);
        }
        let _ = writeln!(out);

        if !self.csv_files.is_empty() {
            let _ = writeln!(out, "[csv files]");
            for f in &self.csv_files {
                let _ = writeln!(out, "  {f}");
            }
            let _ = writeln!(out);
        }

        let _ = writeln!(out, "[configuration echo]");
        for line in self.config_echo.lines() {
            let _ = writeln!(out, "  {line}");
        }
        out
    }

    /// Writes the rendered report to `report.txt` in `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("report.txt");
        std::fs::write(&path, self.render())?;
        Ok(path)
    }
}

/// Canonical float formatting for CSV cells: full precision, fixed width
/// behavior, byte-stable across runs.
pub fn csv_float(x: f64) -> String {
    format!("{x:.12e}")
}

/// Writes one CSV file with the documented header row and pre-formatted
/// cells.  Rows are written in the order given; emitters are responsible
/// for deterministic ordering.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String> {
    let mut text = String::new();
    let _ = writeln!(text, "{}", header.join(","));
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "csv row width mismatch in {name}");
        let _ = writeln!(text, "{}", row.join(","));
    }
    std::fs::write(dir.join(name), text)?;
    Ok(name.to_string())
}
