//! Declarative run configuration for the command-line laboratory.
//!
//! The format is flat sectioned TOML with typed scalars and *named blocks*
//! (`[models.plane]`, `[graphs.chain]`, …) — deliberately no expression
//! language, so a run is reproducible from the file alone.  Profiles or
//! patches beyond the builtins enter via tabulation.
//!
//! Every knob has a default, and the resolved configuration (defaults
//! included) is echoed into the run report so every number in the output
//! is traceable to a value visible in the echo.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    cycle_graph, discrete_model, lattice_ball_z2, lattice_ball_z3, path_graph, WeightedGraph,
};
use crate::immersion::{
    geodesic_slice_patch, horosphere_patch, paraboloid_patch, plane_patch, revolution_patch,
    sphere_patch, CurveSample, ImmersedPatch,
};
use crate::profile::{ModelManifold, ProfileSample, WarpingProfile};
use crate::submersion::{z2_like_chain, TripleConfig};

/// Top-level configuration: run controls, tolerances, and the named spec
/// blocks the suites draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub tolerances: Tolerances,
    pub mc: McSection,
    /// Rotationally symmetric models, by name.
    pub models: BTreeMap<String, ModelSpec>,
    /// Weighted graphs, by name.
    pub graphs: BTreeMap<String, GraphSpec>,
    /// Discrete warped products (base × compact fiber), by name.
    pub submersions: BTreeMap<String, SubmersionSpec>,
    /// Immersed patches, by name.
    pub patches: BTreeMap<String, PatchSpec>,
}

/// Seeds, spectral grid, and output routing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Spectral parameters λ; the first entry drives the verdicts and
    /// chain checks, the full list drives the Feller and Monte Carlo
    /// sweeps.
    pub lambda: Vec<f64>,
    /// Base seed for every stochastic component.
    pub seed: u64,
    /// Output directory; overridden by `--out`, falls back to the
    /// `STOCHLAB_OUT` environment variable and then `./stochlab-out`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Fail (exit 2) when any verdict is inconclusive.
    pub strict: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            lambda: vec![1.0],
            seed: 7,
            out: None,
            strict: false,
        }
    }
}

/// Horizons, grids and thresholds shared by the suites.  All echoed into
/// the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Integration horizon of the Khas'minskii test function.
    pub khasminskii_r_max: f64,
    /// Horizon of the reciprocal-area integral.
    pub parabolicity_horizon: f64,
    /// Horizon of the volume-to-area integral (capped at 2·10⁵ by the
    /// verdict engine).
    pub volume_horizon: f64,
    /// Inner boundary radius of the exterior Dirichlet problems.
    pub feller_inner_radius: f64,
    /// Outer cap of the Feller exhaustion.
    pub feller_r_max: f64,
    /// Grid spacing of the exterior solves.
    pub feller_delta: f64,
    /// Sup-norm convergence threshold of the exhaustion.
    pub feller_exhaustion_tol: f64,
    /// Tails below this count as "vanishing at infinity".
    pub feller_tail_tol: f64,
    /// |z| beyond which a Monte Carlo / exhaustion disagreement is flagged
    /// as a contradiction.
    pub mc_z: f64,
    /// Node budget above which heat-kernel work on a graph (completeness
    /// deficits, kernel dumps) is skipped with a notice: dense matrix
    /// exponentials scale cubically.
    pub graph_kernel_budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            khasminskii_r_max: 120.0,
            parabolicity_horizon: 1e10,
            volume_horizon: 1e4,
            feller_inner_radius: 1.0,
            feller_r_max: 64.0,
            feller_delta: 1.0 / 128.0,
            feller_exhaustion_tol: 1e-6,
            feller_tail_tol: 1e-4,
            mc_z: 3.0,
            graph_kernel_budget: 600,
        }
    }
}

/// Monte Carlo sweep controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    /// Models (by name) the sweep runs on.
    pub models: Vec<String>,
    /// Starting radii of the sweep.
    pub r0: Vec<f64>,
    /// Inner barrier (the surface the functional is stopped at).
    pub inner_radius: f64,
    /// Domain cap; paths count as exploded at 0.9 of it.
    pub r_max: f64,
    /// Censoring horizon.
    pub t_max: f64,
    /// Paths per estimate.
    pub n_paths: u64,
    /// Adaptive step-size ceiling.
    pub dt_max: f64,
    /// A-priori bound credited to exploded paths in the upper bracket;
    /// 1.0 is always valid.
    pub exploded_bound: f64,
    /// How many per-path records the path-summary CSV keeps.
    pub paths_dumped: u64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            models: Vec::new(),
            r0: vec![1.5, 2.0, 3.0],
            inner_radius: 1.0,
            r_max: 40.0,
            t_max: 40.0,
            n_paths: 4000,
            dt_max: 0.5,
            exploded_bound: 1.0,
            paths_dumped: 64,
        }
    }
}

/// One rotationally symmetric model: `kind` selects the warping profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSpec {
    /// `euclidean`, `hyperbolic`, `poly_exp`, `cusp`, or `tabulated`.
    pub kind: String,
    /// Dimension `m ≥ 2`.
    pub dim: usize,
    /// Curvature scale `k` of the hyperbolic kind (σ = sinh(kr)/k).
    pub curvature: f64,
    /// Amplitude `a` of the poly-exp / cusp kinds.
    pub a: f64,
    /// Exponent `p` of the poly-exp / cusp kinds.
    pub p: f64,
    /// Join radius of the poly-exp / cusp kinds (0 = builtin default).
    pub join: f64,
    /// Rows `(r, σ, σ', σ'')` of the tabulated kind.
    pub samples: Vec<[f64; 4]>,
    /// Optional evaluation cap: all horizons are clamped to it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Declared Cartan–Hadamard flag, cross-checked against the profile's
    /// own convexity test at build time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cartan_hadamard: Option<bool>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: "euclidean".into(),
            dim: 2,
            curvature: 1.0,
            a: 1.0,
            p: 3.0,
            join: 0.0,
            samples: Vec::new(),
            r_max: None,
            cartan_hadamard: None,
        }
    }
}

impl ModelSpec {
    /// Effective evaluation cap: the declared `r_max`, further clamped
    /// to the table end for tabulated profiles (which cannot be
    /// evaluated beyond their last sample).
    pub fn cap(&self) -> f64 {
        let declared = self.r_max.unwrap_or(f64::INFINITY);
        if self.kind == "tabulated" {
            let table_end = self
                .samples
                .last()
                .map(|row| row[0])
                .unwrap_or(f64::INFINITY);
            declared.min(table_end)
        } else {
            declared
        }
    }

    /// Builds the model, cross-checking the declared Cartan–Hadamard flag.
    pub fn build(&self, name: &str) -> Result<ModelManifold> {
        let at = |msg: String| Error::Config(format!("models.{name}: {msg}"));
        let profile = match self.kind.as_str() {
            "euclidean" => WarpingProfile::euclidean(),
            "hyperbolic" => WarpingProfile::hyperbolic(self.curvature)
                .map_err(|e| at(e.to_string()))?,
            "poly_exp" => {
                let built = if self.join > 0.0 {
                    WarpingProfile::poly_exp_with_join(self.a, self.p, self.join)
                } else {
                    WarpingProfile::poly_exp(self.a, self.p)
                };
                built.map_err(|e| at(e.to_string()))?
            }
            "cusp" => {
                let built = if self.join > 0.0 {
                    WarpingProfile::cusp_with_join(self.a, self.p, self.join)
                } else {
                    WarpingProfile::cusp(self.a, self.p)
                };
                built.map_err(|e| at(e.to_string()))?
            }
            "tabulated" => {
                let samples = self
                    .samples
                    .iter()
                    .map(|&[r, sigma, dsigma, d2sigma]| ProfileSample {
                        r,
                        sigma,
                        dsigma,
                        d2sigma,
                    })
                    .collect();
                WarpingProfile::tabulated(samples).map_err(|e| at(e.to_string()))?
            }
            other => {
                return Err(at(format!(
                    "unknown kind {other:?} (expected euclidean, hyperbolic, \
                     poly_exp, cusp, or tabulated)"
                )))
            }
        };
        if let Some(declared) = self.cartan_hadamard {
            let computed = profile.is_cartan_hadamard();
            if declared != computed {
                return Err(at(format!(
                    "cartan_hadamard declared {declared} but the profile's \
                     convexity test says {computed}"
                )));
            }
        }
        ModelManifold::new(profile, self.dim).map_err(|e| at(e.to_string()))
    }
}

/// One weighted graph: `kind` selects the builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphSpec {
    /// `cycle`, `path`, `lattice_z2`, `lattice_z3`, `z2_chain`,
    /// `discrete_model`, or `product`.
    pub kind: String,
    /// Vertex count (`cycle`) .
    pub n: usize,
    /// Edge conductance (`cycle`).
    pub conductance: f64,
    /// Vertex measures (`path`).
    pub mu: Vec<f64>,
    /// Edge conductances (`path`; one fewer than `mu`).
    pub c: Vec<f64>,
    /// Killing rate on the last vertex (`path`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_killing: Option<f64>,
    /// Ball radius (`lattice_z2` / `lattice_z3`).
    pub radius: usize,
    /// Layer count (`z2_chain`) or cell count (`discrete_model`).
    pub cells: usize,
    /// Grid spacing (`discrete_model`).
    pub delta: f64,
    /// Referenced model block (`discrete_model`).
    pub model: String,
    /// Referenced base graph block (`product`).
    pub base: String,
    /// Referenced fiber graph block (`product`).
    pub fiber: String,
    /// Start vertex override for the triple verdicts (default: the
    /// builder's canonical start — the lattice origin or vertex 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    /// Heat-kernel comparison time for the triple verdicts.
    pub heat_time: f64,
    /// Layer truncations of the completeness deficits (empty = derived
    /// from the layer count).
    pub sc_truncations: Vec<usize>,
    /// Inner layer of the exterior problems.
    pub feller_inner: usize,
    /// Exhaustion layers (empty = derived from the layer count).
    pub feller_outers: Vec<usize>,
    /// Tail threshold of the discrete Feller verdict.
    pub feller_tol: f64,
    /// Force (or forbid) the heat-kernel work regardless of the node
    /// budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<bool>,
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec {
            kind: "cycle".into(),
            n: 3,
            conductance: 1.0,
            mu: Vec::new(),
            c: Vec::new(),
            outer_killing: None,
            radius: 16,
            cells: 40,
            delta: 0.25,
            model: String::new(),
            base: String::new(),
            fiber: String::new(),
            start: None,
            heat_time: 0.25,
            sc_truncations: Vec::new(),
            feller_inner: 0,
            feller_outers: Vec::new(),
            feller_tol: 1e-2,
            kernel: None,
        }
    }
}

/// A graph built from its spec, with the bookkeeping the suites need.
#[derive(Debug, Clone)]
pub struct BuiltGraph {
    pub graph: WeightedGraph,
    /// Canonical start vertex (lattice origin or vertex 0).
    pub start: usize,
    /// Resolved triple-verdict configuration.
    pub triple: TripleConfig,
    /// Whether heat-kernel work is within budget (or forced).
    pub kernel_ok: bool,
}

impl GraphSpec {
    /// Builds the graph, resolving references against `config`.
    pub fn build(&self, name: &str, config: &RunConfig) -> Result<BuiltGraph> {
        self.build_inner(name, config, &mut Vec::new())
    }

    fn build_inner(
        &self,
        name: &str,
        config: &RunConfig,
        visiting: &mut Vec<String>,
    ) -> Result<BuiltGraph> {
        let at = |msg: String| Error::Config(format!("graphs.{name}: {msg}"));
        if visiting.iter().any(|v| v == name) {
            return Err(at(format!(
                "reference cycle: {} -> {name}",
                visiting.join(" -> ")
            )));
        }
        visiting.push(name.to_string());
        let (graph, start) = match self.kind.as_str() {
            "cycle" => (
                cycle_graph(self.n, self.conductance).map_err(|e| at(e.to_string()))?,
                0,
            ),
            "path" => (
                path_graph(self.mu.clone(), self.c.clone(), self.outer_killing)
                    .map_err(|e| at(e.to_string()))?,
                0,
            ),
            "lattice_z2" => lattice_ball_z2(self.radius).map_err(|e| at(e.to_string()))?,
            "lattice_z3" => lattice_ball_z3(self.radius).map_err(|e| at(e.to_string()))?,
            "z2_chain" => (z2_like_chain(self.cells).map_err(|e| at(e.to_string()))?, 0),
            "discrete_model" => {
                let spec = config.models.get(&self.model).ok_or_else(|| {
                    at(format!("references unknown model block {:?}", self.model))
                })?;
                let m = spec.build(&self.model)?;
                (
                    discrete_model(&m, self.delta, self.cells).map_err(|e| at(e.to_string()))?,
                    0,
                )
            }
            "product" => {
                let mut resolve = |label: &str, target: &String| -> Result<BuiltGraph> {
                    let spec = config.graphs.get(target).ok_or_else(|| {
                        Error::Config(format!(
                            "graphs.{name}: {label} references unknown graph block {target:?}"
                        ))
                    })?;
                    spec.build_inner(target, config, visiting)
                };
                let b = resolve("base", &self.base)?;
                let f = resolve("fiber", &self.fiber)?;
                let graph = b
                    .graph
                    .cartesian_product(&f.graph)
                    .map_err(|e| at(e.to_string()))?;
                (graph, b.start * f.graph.len() + f.start)
            }
            other => {
                return Err(at(format!(
                    "unknown kind {other:?} (expected cycle, path, lattice_z2, \
                     lattice_z3, z2_chain, discrete_model, or product)"
                )))
            }
        };
        visiting.pop();

        let max_layer = (0..graph.len()).map(|x| graph.layer(x)).max().unwrap_or(0);
        let derive = |fractions: [f64; 3]| -> Vec<usize> {
            let mut cuts: Vec<usize> = fractions
                .iter()
                .map(|f| ((max_layer as f64) * f).round() as usize)
                .collect();
            cuts.dedup();
            cuts
        };
        let sc_truncations = if self.sc_truncations.is_empty() {
            derive([0.5, 0.75, 1.0])
        } else {
            self.sc_truncations.clone()
        };
        let feller_outers = if self.feller_outers.is_empty() {
            derive([0.25, 0.5, 1.0])
                .into_iter()
                .filter(|&k| k > self.feller_inner)
                .collect()
        } else {
            self.feller_outers.clone()
        };
        let start = self.start.unwrap_or(start);
        let triple = TripleConfig {
            lambda: config.first_lambda(),
            heat_time: self.heat_time,
            start,
            sc_truncations,
            feller_inner: self.feller_inner,
            feller_outers,
            feller_tol: self.feller_tol,
        };
        let kernel_ok = self
            .kernel
            .unwrap_or(graph.len() <= config.tolerances.graph_kernel_budget);
        Ok(BuiltGraph {
            graph,
            start,
            triple,
            kernel_ok,
        })
    }
}

/// One discrete warped product to run the base ↔ total comparison on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubmersionSpec {
    /// Referenced base graph block.
    pub base: String,
    /// Referenced fiber graph block (compact: every graph block is
    /// finite, so any reference qualifies).
    pub fiber: String,
    /// Spectral parameter (0 = first entry of the run λ grid).
    pub lambda: f64,
    pub heat_time: f64,
    pub start: usize,
    /// Empty = derived from the base layer count.
    pub sc_truncations: Vec<usize>,
    pub feller_inner: usize,
    /// Empty = derived from the base layer count.
    pub feller_outers: Vec<usize>,
    pub feller_tol: f64,
}

impl Default for SubmersionSpec {
    fn default() -> Self {
        SubmersionSpec {
            base: String::new(),
            fiber: String::new(),
            lambda: 0.0,
            heat_time: 0.25,
            start: 0,
            sc_truncations: Vec::new(),
            feller_inner: 0,
            feller_outers: Vec::new(),
            feller_tol: 1e-2,
        }
    }
}

/// A submersion case resolved into graphs and a triple config.
pub struct BuiltSubmersion {
    pub base: WeightedGraph,
    pub fiber: WeightedGraph,
    pub config: TripleConfig,
}

impl SubmersionSpec {
    /// Resolves the graph references and derives the truncation schedules.
    pub fn build(&self, name: &str, config: &RunConfig) -> Result<BuiltSubmersion> {
        let at = |msg: String| Error::Config(format!("submersions.{name}: {msg}"));
        let resolve = |label: &str, target: &String| -> Result<BuiltGraph> {
            let spec = config.graphs.get(target).ok_or_else(|| {
                at(format!("{label} references unknown graph block {target:?}"))
            })?;
            spec.build(target, config)
        };
        let base = resolve("base", &self.base)?;
        let fiber = resolve("fiber", &self.fiber)?;
        let mut triple = base.triple.clone();
        triple.lambda = if self.lambda > 0.0 {
            self.lambda
        } else {
            config.first_lambda()
        };
        triple.heat_time = self.heat_time;
        triple.start = self.start;
        triple.feller_inner = self.feller_inner;
        triple.feller_tol = self.feller_tol;
        if !self.sc_truncations.is_empty() {
            triple.sc_truncations = self.sc_truncations.clone();
        }
        if !self.feller_outers.is_empty() {
            triple.feller_outers = self.feller_outers.clone();
        }
        Ok(BuiltSubmersion {
            base: base.graph,
            fiber: fiber.graph,
            config: triple,
        })
    }
}

/// One immersed patch: a builtin shape or a tabulated revolution surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PatchSpec {
    /// `plane`, `geodesic_slice`, `sphere`, `horosphere`, `paraboloid`,
    /// or `tabulated`.
    pub kind: String,
    /// Sphere radius (`sphere`).
    pub radius: f64,
    /// Referenced ambient model block (`tabulated`; must have dim = 3).
    pub ambient: String,
    /// Rows `(t, r, r', r'', θ, θ', θ'')` of the generating curve
    /// (`tabulated`).
    pub samples: Vec<[f64; 7]>,
    /// Fiber-angle range of the revolution (`tabulated`).
    pub v_range: [f64; 2],
    /// Spectral parameter of the chain check (0 = first run λ).
    pub chain_lambda: f64,
    /// Exclusion radius `R` of the chain check.
    pub chain_radius: f64,
    /// Sample grid of the chain check.
    pub chain_grid: [usize; 2],
    /// Refinement levels of the curvature supremum.
    pub supremum_levels: usize,
}

impl Default for PatchSpec {
    fn default() -> Self {
        PatchSpec {
            kind: "geodesic_slice".into(),
            radius: 2.0,
            ambient: String::new(),
            samples: Vec::new(),
            v_range: [0.3, 1.2],
            chain_lambda: 0.0,
            chain_radius: 0.5,
            chain_grid: [9, 9],
            supremum_levels: 4,
        }
    }
}

impl PatchSpec {
    /// Builds the patch, resolving the ambient reference if present.
    pub fn build(&self, name: &str, config: &RunConfig) -> Result<ImmersedPatch> {
        let at = |msg: String| Error::Config(format!("patches.{name}: {msg}"));
        match self.kind.as_str() {
            "plane" => plane_patch().map_err(|e| at(e.to_string())),
            "geodesic_slice" => geodesic_slice_patch().map_err(|e| at(e.to_string())),
            "sphere" => sphere_patch(self.radius).map_err(|e| at(e.to_string())),
            "horosphere" => horosphere_patch().map_err(|e| at(e.to_string())),
            "paraboloid" => paraboloid_patch().map_err(|e| at(e.to_string())),
            "tabulated" => {
                let spec = config.models.get(&self.ambient).ok_or_else(|| {
                    at(format!(
                        "ambient references unknown model block {:?}",
                        self.ambient
                    ))
                })?;
                let ambient = spec.build(&self.ambient)?;
                let samples: Vec<CurveSample> = self
                    .samples
                    .iter()
                    .map(|&[t, r, dr, d2r, theta, dtheta, d2theta]| CurveSample {
                        t,
                        r,
                        dr,
                        d2r,
                        theta,
                        dtheta,
                        d2theta,
                    })
                    .collect();
                revolution_patch(ambient, samples, self.v_range).map_err(|e| at(e.to_string()))
            }
            other => Err(at(format!(
                "unknown kind {other:?} (expected plane, geodesic_slice, sphere, \
                 horosphere, paraboloid, or tabulated)"
            ))),
        }
    }

    /// The chain-check λ, falling back to the run grid.
    pub fn chain_lambda(&self, config: &RunConfig) -> f64 {
        if self.chain_lambda > 0.0 {
            self.chain_lambda
        } else {
            config.first_lambda()
        }
    }
}

impl RunConfig {
    /// Parses and validates a TOML file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("config does not parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Serializes the resolved configuration (defaults included) for the
    /// report echo.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_else(|e| format!("<echo failed: {e}>"))
    }

    /// First entry of the λ grid.
    pub fn first_lambda(&self) -> f64 {
        self.run.lambda.first().copied().unwrap_or(1.0)
    }

    /// Structural validation: positive λ and tolerances, resolvable
    /// references.  Block contents are validated when built.
    pub fn validate(&self) -> Result<()> {
        if self.run.lambda.is_empty() {
            return Err(Error::Config("run.lambda must not be empty".into()));
        }
        for &l in &self.run.lambda {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Config(format!(
                    "run.lambda entries must be positive, got {l}"
                )));
            }
        }
        let t = &self.tolerances;
        for (key, value) in [
            ("khasminskii_r_max", t.khasminskii_r_max),
            ("parabolicity_horizon", t.parabolicity_horizon),
            ("volume_horizon", t.volume_horizon),
            ("feller_inner_radius", t.feller_inner_radius),
            ("feller_r_max", t.feller_r_max),
            ("feller_delta", t.feller_delta),
            ("feller_exhaustion_tol", t.feller_exhaustion_tol),
            ("feller_tail_tol", t.feller_tail_tol),
            ("mc_z", t.mc_z),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!(
                    "tolerances.{key} must be positive, got {value}"
                )));
            }
        }
        for name in &self.mc.models {
            if !self.models.contains_key(name) {
                return Err(Error::Config(format!(
                    "mc.models references unknown model block {name:?}"
                )));
            }
        }
        for (name, spec) in &self.graphs {
            if spec.kind == "discrete_model" && !self.models.contains_key(&spec.model) {
                return Err(Error::Config(format!(
                    "graphs.{name}: references unknown model block {:?}",
                    spec.model
                )));
            }
            if spec.kind == "product" {
                for (label, target) in [("base", &spec.base), ("fiber", &spec.fiber)] {
                    if !self.graphs.contains_key(target) {
                        return Err(Error::Config(format!(
                            "graphs.{name}: {label} references unknown graph block {target:?}"
                        )));
                    }
                }
            }
        }
        for (name, spec) in &self.submersions {
            for (label, target) in [("base", &spec.base), ("fiber", &spec.fiber)] {
                if !self.graphs.contains_key(target) {
                    return Err(Error::Config(format!(
                        "submersions.{name}: {label} references unknown graph block {target:?}"
                    )));
                }
            }
        }
        for (name, spec) in &self.patches {
            if spec.kind == "tabulated" && !self.models.contains_key(&spec.ambient) {
                return Err(Error::Config(format!(
                    "patches.{name}: ambient references unknown model block {:?}",
                    spec.ambient
                )));
            }
        }
        Ok(())
    }

    /// The builtin golden configuration used when no `--config` is given:
    /// the five reference models, the discrete chains and products with
    /// known verdict patterns, and the curvature-controlled patches.
    pub fn golden() -> Self {
        let mut config = RunConfig::default();

        config.models.insert("plane".into(), ModelSpec::default());
        config.models.insert(
            "space".into(),
            ModelSpec {
                dim: 3,
                ..ModelSpec::default()
            },
        );
        config.models.insert(
            "hyperbolic".into(),
            ModelSpec {
                kind: "hyperbolic".into(),
                ..ModelSpec::default()
            },
        );
        config.models.insert(
            "balloon".into(),
            ModelSpec {
                kind: "poly_exp".into(),
                a: 1.0,
                p: 3.0,
                ..ModelSpec::default()
            },
        );
        config.models.insert(
            "cusp".into(),
            ModelSpec {
                kind: "cusp".into(),
                a: 1.0,
                p: 3.0,
                // σ = e^{-r³} underflows past r ≈ 9; beyond r = 16 every
                // horizon is numerical noise, and the exhaustion has long
                // stabilized on its positive tail by then.
                r_max: Some(16.0),
                ..ModelSpec::default()
            },
        );

        config.graphs.insert(
            "z2_chain".into(),
            GraphSpec {
                kind: "z2_chain".into(),
                cells: 40,
                sc_truncations: vec![20, 30, 39],
                feller_outers: vec![10, 20, 39],
                ..GraphSpec::default()
            },
        );
        config.graphs.insert(
            "hyperbolic_chain".into(),
            GraphSpec {
                kind: "discrete_model".into(),
                model: "hyperbolic".into(),
                delta: 0.25,
                cells: 18,
                sc_truncations: vec![11, 14, 17],
                feller_outers: vec![9, 13, 17],
                ..GraphSpec::default()
            },
        );
        config.graphs.insert(
            "explosive_chain".into(),
            GraphSpec {
                kind: "discrete_model".into(),
                model: "balloon".into(),
                delta: 0.125,
                cells: 20,
                start: Some(8),
                heat_time: 0.5,
                sc_truncations: vec![15, 17, 19],
                feller_inner: 8,
                feller_outers: vec![12, 16, 19],
                ..GraphSpec::default()
            },
        );
        config.graphs.insert(
            "cycle4".into(),
            GraphSpec {
                kind: "cycle".into(),
                n: 4,
                ..GraphSpec::default()
            },
        );
        config.graphs.insert(
            "cycle3".into(),
            GraphSpec {
                kind: "cycle".into(),
                n: 3,
                ..GraphSpec::default()
            },
        );
        config.graphs.insert(
            "path2".into(),
            GraphSpec {
                kind: "path".into(),
                mu: vec![1.0, 1.0],
                c: vec![1.0],
                ..GraphSpec::default()
            },
        );
        config.graphs.insert(
            "z2_ball".into(),
            GraphSpec {
                kind: "lattice_z2".into(),
                radius: 33,
                kernel: Some(false),
                ..GraphSpec::default()
            },
        );
        config.graphs.insert(
            "z3_ball".into(),
            GraphSpec {
                kind: "lattice_z3".into(),
                radius: 33,
                kernel: Some(false),
                ..GraphSpec::default()
            },
        );

        config.submersions.insert(
            "z2_x_cycle4".into(),
            SubmersionSpec {
                base: "z2_chain".into(),
                fiber: "cycle4".into(),
                sc_truncations: vec![20, 30, 39],
                feller_outers: vec![10, 20, 39],
                ..SubmersionSpec::default()
            },
        );
        config.submersions.insert(
            "hyperbolic_x_cycle3".into(),
            SubmersionSpec {
                base: "hyperbolic_chain".into(),
                fiber: "cycle3".into(),
                sc_truncations: vec![11, 14, 17],
                feller_outers: vec![9, 13, 17],
                ..SubmersionSpec::default()
            },
        );
        config.submersions.insert(
            "explosive_x_path2".into(),
            SubmersionSpec {
                base: "explosive_chain".into(),
                fiber: "path2".into(),
                heat_time: 0.5,
                start: 8,
                sc_truncations: vec![15, 17, 19],
                feller_inner: 8,
                feller_outers: vec![12, 16, 19],
                ..SubmersionSpec::default()
            },
        );

        config.patches.insert(
            "slice".into(),
            PatchSpec {
                kind: "geodesic_slice".into(),
                chain_radius: 1.0,
                ..PatchSpec::default()
            },
        );
        config.patches.insert(
            "horosphere".into(),
            PatchSpec {
                kind: "horosphere".into(),
                ..PatchSpec::default()
            },
        );
        config.patches.insert(
            "paraboloid".into(),
            PatchSpec {
                kind: "paraboloid".into(),
                ..PatchSpec::default()
            },
        );

        config.mc.models = vec!["plane".into(), "space".into()];
        config
    }
}
