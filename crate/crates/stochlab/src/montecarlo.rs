//! Monte Carlo cross-checks of the radial boundary-value solver.
//!
//! The Brownian motion generated by the Laplace–Beltrami operator has, in
//! the radial coordinate of a model manifold, the law of the SDE
//!
//! ```text
//! dr_t = √2 dW_t + b(r_t) dt,        b = (m-1) σ'/σ,
//! ```
//!
//! (quadratic variation `2t`, because the generator is `Δ`, not `Δ/2`).
//! By Feynman–Kac, `h(r₀) = E_{r₀}[e^{-λ τ_R}]` — the very function the
//! exterior Dirichlet exhaustion computes — so simulated paths give an
//! independent, discretisation-free-in-a-different-way estimate to test
//! the PDE pipeline against.
//!
//! Three kinds of care keep the estimator honest:
//!
//! * **Barrier crossings inside a step** are restored with the Brownian
//!   bridge: given endpoints `a, c > K`, the bridge of variance rate `2`
//!   dips below `K` with probability `exp(-(a-K)(c-K)/dt)`.  Without this
//!   the hitting probability is systematically underestimated at any
//!   finite step size.
//! * **Censoring and explosion produce brackets, not guesses.**  A path
//!   stopped by the time horizon can still contribute at most
//!   `e^{-λ T_max}`; a path absorbed at the explosion radius at time `τ_e`
//!   at most `e^{-λ τ_e}`.  The interval `[mean, upper_bracket]` therefore
//!   contains the estimand up to sampling error, and a bracket wider than
//!   the noise floor is reported as inconclusive instead of being averaged
//!   away.
//! * **Determinism**: every path draws from its own counter-based stream
//!   (`seed`, path index), and partial sums are folded in canonical path
//!   order, so results are bit-identical across thread counts.

use crate::error::{Error, Result};
use crate::profile::ModelManifold;
use crate::verdicts::Outcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Time-stepping scheme for the radial SDE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Plain Euler–Maruyama.
    EulerMaruyama,
    /// Heun (trapezoidal) correction of the drift; the diffusion
    /// coefficient is constant, so this captures the full Milstein-order
    /// improvement available here.
    MilsteinDriftCorrected,
}

/// Step-size policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// Constant `dt`.
    Fixed(f64),
    /// `dt = min(dt_max, 0.1 r/|b|, (0.1 r)²/2)`: the step keeps both the
    /// drift displacement and the typical diffusive displacement below
    /// a tenth of the current radius.
    Adaptive {
        /// Hard upper bound on `dt`.
        dt_max: f64,
    },
}

/// How a single path ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    /// Crossed the inner barrier at (approximately) time `tau`.
    HitInner { tau: f64 },
    /// Reached the explosion radius `0.9·r_max` at time `tau`.
    Exploded { tau: f64 },
    /// Still alive at the time horizon.
    Censored,
}

/// Parameters of a hitting-functional Monte Carlo run.
#[derive(Debug, Clone)]
pub struct McConfig {
    /// Feynman–Kac discount rate `λ > 0`.
    pub lambda: f64,
    /// Inner barrier `R` (the boundary the PDE problem holds `h = 1` on).
    pub inner_radius: f64,
    /// Starting radius `r₀ > R`.
    pub start_radius: f64,
    /// Domain cap; paths are declared exploded at `0.9·r_max`.
    pub r_max: f64,
    /// Censoring horizon.
    pub t_max: f64,
    /// Number of paths.
    pub n_paths: u64,
    pub scheme: Scheme,
    pub step: StepSize,
    /// Base seed; path `i` uses stream `i` of this seed.
    pub seed: u64,
    /// A-priori bound on the functional's value at the explosion radius,
    /// used to credit exploded paths in the upper bracket.  `1.0` is
    /// always valid.  When the drift is nonnegative beyond the barrier,
    /// the exponential barrier of
    /// [`crate::solver::exponential_supersolution_check`] justifies the
    /// much tighter `exp(-√λ·(0.9·r_max - R))`.
    pub exploded_continuation_bound: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            lambda: 1.0,
            inner_radius: 1.0,
            start_radius: 2.0,
            r_max: 40.0,
            t_max: 100.0,
            n_paths: 10_000,
            scheme: Scheme::MilsteinDriftCorrected,
            step: StepSize::Adaptive { dt_max: 0.5 },
            seed: 7,
            exploded_continuation_bound: 1.0,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::invalid("λ must be positive"));
        }
        if !(self.inner_radius > 0.0 && self.start_radius > self.inner_radius) {
            return Err(Error::invalid(format!(
                "need 0 < inner_radius < start_radius, got {} and {}",
                self.inner_radius, self.start_radius
            )));
        }
        if !(0.9 * self.r_max > self.start_radius) {
            return Err(Error::invalid(
                "explosion radius 0.9·r_max must exceed the starting radius",
            ));
        }
        if !(self.t_max > 0.0) || self.n_paths == 0 {
            return Err(Error::invalid("need t_max > 0 and at least one path"));
        }
        match self.step {
            StepSize::Fixed(dt) if !(dt > 0.0) => {
                return Err(Error::invalid("fixed step must be positive"))
            }
            StepSize::Adaptive { dt_max } if !(dt_max > 0.0) => {
                return Err(Error::invalid("dt_max must be positive"))
            }
            _ => {}
        }
        if !(self.exploded_continuation_bound > 0.0 && self.exploded_continuation_bound <= 1.0) {
            return Err(Error::invalid(
                "exploded_continuation_bound must lie in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// Sums over one contiguous block of paths.  Partials merge by
/// concatenation; all statistics are folded in canonical path order, so
/// the merged result is independent of which thread produced which block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partial {
    /// Index of the first path in the block.
    pub first_path: u64,
    /// Number of paths in the block.
    pub n: u64,
    /// `Σ e^{-λτ}` over paths that hit the barrier.
    pub sum: f64,
    /// `Σ e^{-2λτ}` over the same paths (for the variance).
    pub sumsq: f64,
    pub n_hit: u64,
    pub n_exploded: u64,
    pub n_censored: u64,
    /// `Σ e^{-λτ_e}` over exploded paths — their largest possible
    /// contribution had they been allowed to continue.
    pub sum_exploded_bound: f64,
}

/// A Monte Carlo estimate, stored as its mergeable parts.
#[derive(Debug, Clone)]
pub struct Estimate {
    /// Discount rate the functional was computed at.
    pub lambda: f64,
    /// Censoring horizon of the run.
    pub t_max: f64,
    partials: Vec<Partial>,
}

impl Estimate {
    /// Builds an estimate from blocks, rejecting overlapping path ranges.
    pub fn from_partials(lambda: f64, t_max: f64, mut partials: Vec<Partial>) -> Result<Self> {
        partials.sort_by_key(|p| p.first_path);
        for w in partials.windows(2) {
            if w[0].first_path + w[0].n > w[1].first_path {
                return Err(Error::invalid(format!(
                    "overlapping path blocks at {} and {}",
                    w[0].first_path, w[1].first_path
                )));
            }
        }
        Ok(Estimate {
            lambda,
            t_max,
            partials,
        })
    }

    /// Merges two estimates over disjoint path ranges.
    pub fn merge(self, other: Estimate) -> Result<Estimate> {
        if self.lambda != other.lambda || self.t_max != other.t_max {
            return Err(Error::invalid(
                "cannot merge estimates with different λ or horizons",
            ));
        }
        let mut partials = self.partials;
        partials.extend(other.partials);
        Estimate::from_partials(self.lambda, self.t_max, partials)
    }

    /// The canonical-order fold of all blocks.
    fn fold(&self) -> Partial {
        let mut acc = Partial {
            first_path: self.partials.first().map_or(0, |p| p.first_path),
            n: 0,
            sum: 0.0,
            sumsq: 0.0,
            n_hit: 0,
            n_exploded: 0,
            n_censored: 0,
            sum_exploded_bound: 0.0,
        };
        for p in &self.partials {
            acc.n += p.n;
            acc.sum += p.sum;
            acc.sumsq += p.sumsq;
            acc.n_hit += p.n_hit;
            acc.n_exploded += p.n_exploded;
            acc.n_censored += p.n_censored;
            acc.sum_exploded_bound += p.sum_exploded_bound;
        }
        acc
    }

    /// Total number of paths.
    pub fn n(&self) -> u64 {
        self.fold().n
    }

    /// `(hit, exploded, censored)` counts.
    pub fn counts(&self) -> (u64, u64, u64) {
        let f = self.fold();
        (f.n_hit, f.n_exploded, f.n_censored)
    }

    /// Sample mean of `e^{-λτ}·1_{hit}` — a lower estimate of the
    /// functional (non-hitting paths contribute their minimum, zero).
    pub fn mean(&self) -> f64 {
        let f = self.fold();
        f.sum / f.n as f64
    }

    /// Standard error of [`Estimate::mean`].
    pub fn std_error(&self) -> f64 {
        let f = self.fold();
        if f.n < 2 {
            return f64::INFINITY;
        }
        let n = f.n as f64;
        let mean = f.sum / n;
        let var = (f.sumsq / n - mean * mean).max(0.0) * n / (n - 1.0);
        (var / n).sqrt()
    }

    /// Upper estimate: censored paths credited `e^{-λ T_max}`, exploded
    /// paths credited `e^{-λ τ_e}`.
    pub fn upper_bracket(&self) -> f64 {
        let f = self.fold();
        (f.sum + f.n_censored as f64 * (-self.lambda * self.t_max).exp() + f.sum_exploded_bound)
            / f.n as f64
    }

    /// Width of the `[mean, upper_bracket]` interval.
    pub fn bracket_width(&self) -> f64 {
        self.upper_bracket() - self.mean()
    }
}

fn adaptive_dt(r: f64, b: f64, dt_max: f64) -> f64 {
    let drift_scale = 0.1 * r / (b.abs() + 1e-12);
    let diffusion_scale = 0.005 * r * r;
    dt_max.min(drift_scale).min(diffusion_scale).max(1e-12)
}

/// Where and how one path stopped.
struct PathOutcome {
    terminal: Terminal,
    final_r: f64,
    steps: u64,
}

/// Simulates one path; `rng` must be the path's own stream.
fn simulate_path(model: &ModelManifold, cfg: &McConfig, rng: &mut ChaCha8Rng) -> PathOutcome {
    let barrier = cfg.inner_radius;
    let r_explode = 0.9 * cfg.r_max;
    let mut r = cfg.start_radius;
    let mut t = 0.0f64;
    let mut steps = 0u64;
    // Generous hard cap so a pathological configuration cannot spin forever.
    for _ in 0..50_000_000u64 {
        if t >= cfg.t_max {
            return PathOutcome {
                terminal: Terminal::Censored,
                final_r: r,
                steps,
            };
        }
        let b = model.drift(r);
        let dt = match cfg.step {
            StepSize::Fixed(h) => h,
            StepSize::Adaptive { dt_max } => adaptive_dt(r, b, dt_max),
        }
        .min(cfg.t_max - t)
        .max(1e-12);
        let z: f64 = rng.sample(StandardNormal);
        let xi = (2.0 * dt).sqrt() * z;
        let r_new = match cfg.scheme {
            Scheme::EulerMaruyama => r + b * dt + xi,
            Scheme::MilsteinDriftCorrected => {
                let predictor = (r + b * dt + xi).clamp(0.25 * barrier, cfg.r_max);
                let b2 = model.drift(predictor);
                r + 0.5 * (b + b2) * dt + xi
            }
        };
        steps += 1;
        if r_new <= barrier {
            // Crossing happened somewhere inside the step.
            return PathOutcome {
                terminal: Terminal::HitInner { tau: t + 0.5 * dt },
                final_r: barrier,
                steps,
            };
        }
        // Both endpoints above the barrier: the bridge may still have
        // dipped below it (variance rate 2 ⇒ p = e^{-(a-K)(c-K)/dt}).
        let log_p = -(r - barrier) * (r_new - barrier) / dt;
        if log_p > -36.0 {
            let u: f64 = rng.gen();
            if u < log_p.exp() {
                return PathOutcome {
                    terminal: Terminal::HitInner { tau: t + 0.5 * dt },
                    final_r: barrier,
                    steps,
                };
            }
        }
        if r_new >= r_explode {
            // Credit the earliest plausible explosion time: conservative
            // for the upper bracket.
            return PathOutcome {
                terminal: Terminal::Exploded { tau: t },
                final_r: r_new,
                steps,
            };
        }
        r = r_new;
        t += dt;
    }
    PathOutcome {
        terminal: Terminal::Censored,
        final_r: r,
        steps,
    }
}

fn simulate_block(model: &ModelManifold, cfg: &McConfig, first: u64, n: u64) -> Partial {
    let mut p = Partial {
        first_path: first,
        n,
        sum: 0.0,
        sumsq: 0.0,
        n_hit: 0,
        n_exploded: 0,
        n_censored: 0,
        sum_exploded_bound: 0.0,
    };
    for path in first..first + n {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(path);
        match simulate_path(model, cfg, &mut rng).terminal {
            Terminal::HitInner { tau } => {
                let x = (-cfg.lambda * tau).exp();
                p.sum += x;
                p.sumsq += x * x;
                p.n_hit += 1;
            }
            Terminal::Exploded { tau } => {
                p.n_exploded += 1;
                p.sum_exploded_bound +=
                    (-cfg.lambda * tau).exp() * cfg.exploded_continuation_bound;
            }
            Terminal::Censored => {
                p.n_censored += 1;
            }
        }
    }
    p
}

/// Block size for parallel execution.  Fixed (not derived from the thread
/// count) so the set of partials — and hence the folded statistics — is
/// identical on any machine.
const BLOCK: u64 = 256;

/// Runs the hitting-functional Monte Carlo for
/// `h(r₀) = E[e^{-λ τ_R}]`, in parallel, deterministically in `cfg.seed`.
pub fn run_hitting_mc(model: &ModelManifold, cfg: &McConfig) -> Result<Estimate> {
    cfg.validate()?;
    check_domain(model, cfg)?;
    let blocks: Vec<(u64, u64)> = (0..cfg.n_paths)
        .step_by(BLOCK as usize)
        .map(|first| (first, BLOCK.min(cfg.n_paths - first)))
        .collect();
    let partials: Vec<Partial> = blocks
        .par_iter()
        .map(|&(first, n)| simulate_block(model, cfg, first, n))
        .collect();
    Estimate::from_partials(cfg.lambda, cfg.t_max, partials)
}

/// Rejects domains wider than a tabulated profile's range.
fn check_domain(model: &ModelManifold, cfg: &McConfig) -> Result<()> {
    if let Some(max_r) = model.profile().max_radius() {
        if cfg.r_max > max_r * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "profile is tabulated only up to r = {max_r}, but r_max = {} was requested",
                cfg.r_max
            )));
        }
    }
    Ok(())
}

/// One path's terminal record, for plot/CSV dumps.
#[derive(Debug, Clone, Copy)]
pub struct PathSummary {
    /// Stream index of the path under the configured base seed.
    pub path: u64,
    pub terminal: Terminal,
    /// Radius when the path stopped: the barrier for hits, the crossing
    /// point for explosions, the last position for censored paths.
    pub final_r: f64,
    /// Accepted integration steps.
    pub steps: u64,
}

/// Re-simulates the first `count` paths in the estimator's deterministic
/// stream layout and returns their terminal records.  `count` is clamped
/// to `cfg.n_paths`, so every record describes a path that entered the
/// corresponding [`run_hitting_mc`] estimate.
pub fn path_summaries(
    model: &ModelManifold,
    cfg: &McConfig,
    count: u64,
) -> Result<Vec<PathSummary>> {
    cfg.validate()?;
    check_domain(model, cfg)?;
    Ok((0..count.min(cfg.n_paths))
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path);
            let out = simulate_path(model, cfg, &mut rng);
            PathSummary {
                path,
                terminal: out.terminal,
                final_r: out.final_r,
                steps: out.steps,
            }
        })
        .collect())
}

/// Agreement report between a Monte Carlo estimate and a reference value
/// (typically the exhaustion solver's).
#[derive(Debug, Clone)]
pub struct McComparison {
    pub mc_mean: f64,
    pub mc_std_error: f64,
    pub reference: f64,
    /// `(mean - reference) / std_error`.
    pub z: f64,
    /// `[mean, upper_bracket]`.
    pub bracket: (f64, f64),
    /// `Holds` when `|z| ≤ 3` and the bracket is tight; `Inconclusive`
    /// when the bracket exceeds six standard errors (censoring/explosion
    /// ate too much mass to certify anything); `Fails` otherwise.
    pub outcome: Outcome,
}

/// Compares an estimate against a reference value.
pub fn compare_with_reference(est: &Estimate, reference: f64) -> McComparison {
    let mean = est.mean();
    let se = est.std_error();
    let bracket = (mean, est.upper_bracket());
    let z = if (mean - reference).abs() == 0.0 {
        0.0
    } else {
        (mean - reference) / se
    };
    let outcome = if est.bracket_width() > 6.0 * se {
        Outcome::Inconclusive
    } else if z.abs() <= 3.0 {
        Outcome::Holds
    } else {
        Outcome::Fails
    };
    McComparison {
        mc_mean: mean,
        mc_std_error: se,
        reference,
        z,
        bracket,
        outcome,
    }
}

/// Result of halving the explosion radius: if the estimate moves by more
/// than the combined noise, the domain cap is biasing the run.
#[derive(Debug, Clone)]
pub struct SensitivityCheck {
    pub primary: Estimate,
    pub halved: Estimate,
    /// `(mean₁ - mean₂) / √(se₁² + se₂²)`.
    pub z: f64,
    pub consistent: bool,
}

/// Runs the estimator at `r_max` and `r_max/2` with the same seed and
/// compares.
pub fn explosion_sensitivity(model: &ModelManifold, cfg: &McConfig) -> Result<SensitivityCheck> {
    let primary = run_hitting_mc(model, cfg)?;
    let mut halved_cfg = cfg.clone();
    halved_cfg.r_max = 0.5 * cfg.r_max;
    let halved = run_hitting_mc(model, &halved_cfg)?;
    let se = (primary.std_error().powi(2) + halved.std_error().powi(2)).sqrt();
    let z = (primary.mean() - halved.mean()) / se.max(1e-300);
    Ok(SensitivityCheck {
        consistent: z.abs() <= 3.0,
        primary,
        halved,
        z,
    })
}
