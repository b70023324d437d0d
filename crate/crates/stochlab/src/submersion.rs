//! Riemannian submersions, realised two ways.
//!
//! **Discretely**, a submersion with compact totally geodesic fibers is a
//! Cartesian product graph `total = base × fiber` with the product
//! conductances of [`WeightedGraph::cartesian_product`]; the projection
//! forgets the fiber coordinate.  That choice of conductances is the only
//! one making the lifting identity
//!
//! ```text
//! Δ_total (u ∘ π) = (Δ_base u) ∘ π
//! ```
//!
//! hold exactly — the discrete analogue of *minimal fibers*, where the
//! divergence of a lifted field equals the lifted divergence with no mean
//! curvature correction.  On such products the three stochastic verdicts
//! transfer between base and total space, the exhaustion solutions lift
//! node for node, and the flux through a layer picks up exactly one
//! factor of the fiber volume.  All of this is checked to near machine
//! precision by [`equivalence_suite`].
//!
//! Both transfer hypotheses are sharp, and [`counterexample_suite`] shows
//! it: a *non-compact* fiber breaks the parabolicity transfer (the line
//! bundle ℤ³ → ℤ² has parabolic base, transient total space), and a
//! stochastically *incomplete* fiber breaks the completeness transfer
//! (a conservative base times an explosive fiber explodes).
//!
//! **Continuously**, the warped strip `dx² + ψ(x)² dθ²` is the smallest
//! submersion with non-minimal fibers.  The circle over `x` has mean
//! curvature vector `H = (ψ'/ψ) ∂ₓ` (with the sign convention that makes
//! `H` the negative trace of the fiber shape operator; the opposite
//! convention is exposed as a switch), and the divergence of a lifted
//! field picks up exactly the `⟨X̃, H⟩` correction:
//!
//! ```text
//! Div_M X̃ = Div_N X + ⟨X̃, H⟩.
//! ```
//!
//! [`WarpedPatch2D::warped_divergence_check`] verifies this against finite
//! differences of the honest two-dimensional divergence `(ψ X)'/ψ`.

use crate::error::{Error, Result};
use crate::graph::{
    completeness_from_deficits, cycle_graph, discrete_model, feller_from_tails,
    graph_parabolicity_verdict, lattice_ball_z2, lattice_ball_z3, path_graph, WeightedGraph,
};
use crate::profile::{ModelManifold, WarpingProfile};
use crate::verdicts::{Outcome, Verdict};

/// Sign convention for the mean curvature vector of a fiber.
///
/// The default takes `H` to be the *negative* trace of the fiber shape
/// operator, which is the convention under which the warped divergence
/// identity reads `Div_M X̃ = Div_N X + ⟨X̃, H⟩`.  The alternative flips
/// the reported sign of `H` (and the identity becomes `… − ⟨X̃, H⟩`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanCurvatureSign {
    #[default]
    NegativeTrace,
    PositiveTrace,
}

impl MeanCurvatureSign {
    fn factor(self) -> f64 {
        match self {
            MeanCurvatureSign::NegativeTrace => 1.0,
            MeanCurvatureSign::PositiveTrace => -1.0,
        }
    }
}

/// The warped strip `ℝ × S¹` with metric `dx² + ψ(x)² dθ²`.
pub struct WarpedPatch2D {
    psi: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    stencil: f64,
    sign: MeanCurvatureSign,
}

/// Both sides of the warped divergence identity at a point.
#[derive(Debug, Clone, Copy)]
pub struct WarpedLemmaCheck {
    /// `Div_M X̃` from finite differences of `(ψ X)'/ψ`.
    pub lhs: f64,
    /// `Div_N X + ⟨X̃, H⟩` assembled from the base divergence and the
    /// fiber mean curvature.
    pub rhs: f64,
    /// The `⟨X̃, H⟩` correction alone.
    pub curvature_term: f64,
    /// `|lhs − rhs|`.
    pub residual: f64,
}

impl WarpedPatch2D {
    /// A warped strip with the given profile and finite-difference step.
    pub fn new(
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        stencil: f64,
    ) -> Result<Self> {
        if !(stencil > 0.0) || !stencil.is_finite() {
            return Err(Error::invalid("stencil must be positive"));
        }
        Ok(WarpedPatch2D {
            psi: Box::new(psi),
            stencil,
            sign: MeanCurvatureSign::default(),
        })
    }

    /// Switches the reported mean-curvature sign convention.
    pub fn with_sign(mut self, sign: MeanCurvatureSign) -> Self {
        self.sign = sign;
        self
    }

    fn psi_at(&self, x: f64) -> Result<f64> {
        let v = (self.psi)(x);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("ψ({x}) = {v} is not positive")));
        }
        Ok(v)
    }

    /// The `∂ₓ` component of the fiber mean curvature vector, under the
    /// configured sign convention: `±ψ'(x)/ψ(x)` by central differences.
    pub fn fiber_mean_curvature(&self, x: f64) -> Result<f64> {
        let h = self.stencil;
        let (up, dn, mid) = (self.psi_at(x + h)?, self.psi_at(x - h)?, self.psi_at(x)?);
        Ok(self.sign.factor() * (up - dn) / (2.0 * h * mid))
    }

    /// Verifies the divergence identity for the lifted field
    /// `X̃ = X(x) ∂ₓ` at `x`.  The left side is the genuine
    /// two-dimensional divergence `(ψ X)' / ψ`; the right side is the
    /// base divergence plus the mean-curvature pairing.
    pub fn warped_divergence_check(&self, field: &dyn Fn(f64) -> f64, x: f64) -> Result<WarpedLemmaCheck> {
        let h = self.stencil;
        let lhs = (self.psi_at(x + h)? * field(x + h) - self.psi_at(x - h)? * field(x - h))
            / (2.0 * h * self.psi_at(x)?);
        let base_div = (field(x + h) - field(x - h)) / (2.0 * h);
        let curvature_term = self.sign.factor() * field(x) * self.fiber_mean_curvature(x)?;
        let rhs = base_div + curvature_term;
        Ok(WarpedLemmaCheck {
            lhs,
            rhs,
            curvature_term,
            residual: (lhs - rhs).abs(),
        })
    }
}

/// A product submersion `π: base × fiber → base` with compact fiber.
#[derive(Debug, Clone)]
pub struct ProductSubmersion {
    /// The base graph.
    pub base: WeightedGraph,
    /// The fiber graph (finite, connected, no killing).
    pub fiber: WeightedGraph,
    /// The total space with product measure and conductances.
    pub total: WeightedGraph,
}

impl ProductSubmersion {
    /// Builds the total space.  The fiber must be connected and carry no
    /// killing — that is what "compact without boundary" means here.
    pub fn new(base: WeightedGraph, fiber: WeightedGraph) -> Result<Self> {
        if !fiber.is_connected() {
            return Err(Error::invalid("fiber must be connected"));
        }
        if (0..fiber.len()).any(|q| fiber.killing(q) > 0.0) {
            return Err(Error::invalid("a compact fiber carries no killing"));
        }
        let total = base.cartesian_product(&fiber)?;
        Ok(ProductSubmersion { base, fiber, total })
    }

    /// Index of `(x, q)` in the total space.
    pub fn total_index(&self, x: usize, q: usize) -> usize {
        x * self.fiber.len() + q
    }

    /// Volume of a fiber (the same over every base vertex by
    /// construction).
    pub fn fiber_volume(&self) -> f64 {
        self.fiber.volume()
    }

    /// Lifts a base function: `ũ(x, q) = u(x)`.
    pub fn lift(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.base.len() {
            return Err(Error::invalid("lift needs one value per base vertex"));
        }
        let nf = self.fiber.len();
        Ok((0..self.total.len()).map(|i| u[i / nf]).collect())
    }

    /// Largest deviation of `Δ_total (u ∘ π)` from `(Δ_base u) ∘ π` — the
    /// minimal-fiber divergence identity, exact by construction up to
    /// floating-point rounding.
    pub fn lemma1_minimal_check(&self, u: &[f64]) -> Result<f64> {
        let lifted = self.lift(u)?;
        let base_lap = self.base.laplacian_apply(u);
        let total_lap = self.total.laplacian_apply(&lifted);
        let nf = self.fiber.len();
        let mut worst = 0.0f64;
        for (i, v) in total_lap.iter().enumerate() {
            worst = worst.max((v - base_lap[i / nf]).abs());
        }
        Ok(worst)
    }
}

/// Horizons and thresholds for the three graph verdicts.
#[derive(Debug, Clone)]
pub struct TripleConfig {
    /// Spectral parameter for the Feller exhaustion.
    pub lambda: f64,
    /// Time at which truncated heat-kernel masses are compared.
    pub heat_time: f64,
    /// Vertex whose surviving mass is tracked.
    pub start: usize,
    /// Layer truncations for the completeness deficits (ascending).
    pub sc_truncations: Vec<usize>,
    /// Inner layer pinned to one in the exterior problems.
    pub feller_inner: usize,
    /// Outer Dirichlet layers of the exhaustion (ascending, ≥ 2 entries).
    pub feller_outers: Vec<usize>,
    /// Tail size below which the resolvent is declared decaying.
    pub feller_tol: f64,
}

impl TripleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !(self.heat_time > 0.0) || !(self.feller_tol > 0.0) {
            return Err(Error::invalid("λ, heat time and tail tolerance must be positive"));
        }
        if self.sc_truncations.is_empty() || self.sc_truncations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("truncations must be ascending and nonempty"));
        }
        if self.feller_outers.len() < 2 || self.feller_outers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("need at least two ascending exhaustion radii"));
        }
        if self.feller_outers[0] <= self.feller_inner {
            return Err(Error::invalid("exhaustion radii must exceed the inner layer"));
        }
        Ok(())
    }
}

/// The three verdicts of one graph, with the raw evidence series.
#[derive(Debug, Clone)]
pub struct TripleReport {
    /// Recurrence via layer resistances.
    pub parabolicity: Verdict,
    /// Conservativeness via truncated kernel masses.
    pub completeness: Verdict,
    /// Resolvent decay via exhaustion tails.
    pub feller: Verdict,
    /// Mass deficits, one per truncation.
    pub deficits: Vec<f64>,
    /// Exhaustion tails, one per consecutive pair of radii.
    pub tails: Vec<f64>,
}

/// Decides parabolicity, stochastic completeness and the Feller property
/// of a layered graph, mirroring the continuum pipeline: resistances play
/// the role of `∫ dr/S`, kernel masses of the Khas'minskii test, and
/// exhaustion tails of the exterior Dirichlet limits.
pub fn graph_triple_verdicts(g: &WeightedGraph, cfg: &TripleConfig) -> Result<TripleReport> {
    cfg.validate()?;
    let parabolicity = graph_parabolicity_verdict(g);
    let mut deficits = Vec::new();
    for &cut in &cfg.sc_truncations {
        let (trunc, map) = g.truncate_at_layer(cut)?;
        let start = map[cfg.start]
            .ok_or_else(|| Error::Precondition("start vertex lost by the smallest truncation".into()))?;
        let kernel = trunc.heat_kernel(cfg.heat_time)?;
        deficits.push(1.0 - kernel.mass_from(start));
    }
    let completeness = completeness_from_deficits(&cfg.sc_truncations, &deficits);
    let tails = g.exhaustion_tails(cfg.lambda, cfg.feller_inner, &cfg.feller_outers)?;
    let feller = feller_from_tails(&tails, cfg.feller_tol);
    Ok(TripleReport {
        parabolicity,
        completeness,
        feller,
        deficits,
        tails,
    })
}

/// Everything the base↔total comparison produces for one product.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// Human-readable case name.
    pub name: String,
    /// Fiber volume (the exact layer-flux ratio).
    pub fiber_volume: f64,
    /// Verdicts of the base.
    pub base: TripleReport,
    /// Verdicts of the total space.
    pub total: TripleReport,
    /// Whether all three outcomes match between base and total.
    pub verdicts_agree: bool,
    /// Whether no outcome is `Inconclusive`.
    pub all_decided: bool,
    /// Largest node-for-node gap between the lifted base exhaustion
    /// solution and the total-space solution.
    pub max_profile_gap: f64,
    /// Largest relative deviation of `C_k(total)` from
    /// `vol(F) · C_k(base)`.
    pub max_flux_gap: f64,
    /// `(C_k(base), C_k(total))` pairs for reporting.
    pub layer_flux: Vec<(f64, f64)>,
}

/// Runs the full base↔total comparison on one compact-fiber product.
pub fn equivalence_suite(
    name: &str,
    base: &WeightedGraph,
    fiber: &WeightedGraph,
    cfg: &TripleConfig,
) -> Result<EquivalenceReport> {
    let sub = ProductSubmersion::new(base.clone(), fiber.clone())?;
    let base_report = graph_triple_verdicts(&sub.base, cfg)?;
    let mut total_cfg = cfg.clone();
    total_cfg.start = sub.total_index(cfg.start, 0);
    let total_report = graph_triple_verdicts(&sub.total, &total_cfg)?;

    let outer = *cfg.feller_outers.last().unwrap();
    let u_base = sub.base.exterior_profile_dense(cfg.lambda, cfg.feller_inner, outer)?;
    let u_total = sub.total.exterior_profile_dense(cfg.lambda, cfg.feller_inner, outer)?;
    let nf = sub.fiber.len();
    let mut max_profile_gap = 0.0f64;
    for (i, v) in u_total.iter().enumerate() {
        max_profile_gap = max_profile_gap.max((v - u_base[i / nf]).abs());
    }

    let flux_base = sub.base.layer_conductances();
    let flux_total = sub.total.layer_conductances();
    let vol = sub.fiber_volume();
    let mut max_flux_gap = 0.0f64;
    let mut layer_flux = Vec::new();
    for (a, b) in flux_base.iter().zip(&flux_total) {
        max_flux_gap = max_flux_gap.max((b - vol * a).abs() / (vol * a).abs().max(1.0));
        layer_flux.push((*a, *b));
    }

    let pairs = [
        (&base_report.parabolicity, &total_report.parabolicity),
        (&base_report.completeness, &total_report.completeness),
        (&base_report.feller, &total_report.feller),
    ];
    let verdicts_agree = pairs.iter().all(|(a, b)| a.outcome == b.outcome);
    let all_decided = pairs
        .iter()
        .all(|(a, b)| a.outcome != Outcome::Inconclusive && b.outcome != Outcome::Inconclusive);

    Ok(EquivalenceReport {
        name: name.to_string(),
        fiber_volume: vol,
        base: base_report,
        total: total_report,
        verdicts_agree,
        all_decided,
        max_profile_gap,
        max_flux_gap,
        layer_flux,
    })
}

/// A named base/fiber/config triple ready for [`equivalence_suite`].
pub struct EquivalenceCase {
    /// Case label used in reports.
    pub name: String,
    /// Base graph.
    pub base: WeightedGraph,
    /// Compact fiber.
    pub fiber: WeightedGraph,
    /// Verdict horizons.
    pub config: TripleConfig,
}

/// The radial collapse of the square lattice: layer `k` carries the `4k`
/// vertices of the ℓ¹ sphere (one at the origin) and the `4(2k+1)` edges
/// to the next sphere, so its resistance profile matches ℤ² exactly.
pub fn z2_like_chain(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::invalid("chain needs at least two layers"));
    }
    let mu: Vec<f64> = (0..n)
        .map(|k| if k == 0 { 1.0 } else { 4.0 * k as f64 })
        .collect();
    let c: Vec<f64> = (0..n - 1).map(|k| 4.0 * (2 * k + 1) as f64).collect();
    let outer = 4.0 * (2 * (n - 1) + 1) as f64;
    path_graph(mu, c, Some(outer))
}

/// Discrete model of the hyperbolic plane out to radius `cells·Δ`.
fn hyperbolic_chain(delta: f64, cells: usize) -> Result<WeightedGraph> {
    let model = ModelManifold::new(WarpingProfile::hyperbolic(1.0)?, 2)?;
    discrete_model(&model, delta, cells)
}

/// Discrete model of the stochastically incomplete profile
/// `σ = exp(r³)` out to radius `cells·Δ`.
fn incomplete_chain(delta: f64, cells: usize) -> Result<WeightedGraph> {
    let model = ModelManifold::new(WarpingProfile::poly_exp(1.0, 3.0)?, 2)?;
    discrete_model(&model, delta, cells)
}

/// The three golden product cases: a parabolic base, a transient
/// conservative base, and a stochastically incomplete base, each with a
/// compact fiber.  Shared by the library tests, the acceptance battery
/// and the command-line suite.
pub fn golden_equivalence_cases() -> Result<Vec<EquivalenceCase>> {
    Ok(vec![
        EquivalenceCase {
            name: "z2-like chain × cycle(4)".into(),
            base: z2_like_chain(40)?,
            fiber: cycle_graph(4, 1.0)?,
            config: TripleConfig {
                lambda: 1.0,
                heat_time: 0.25,
                start: 0,
                sc_truncations: vec![20, 30, 39],
                feller_inner: 0,
                feller_outers: vec![10, 20, 39],
                feller_tol: 1e-2,
            },
        },
        EquivalenceCase {
            name: "hyperbolic chain × cycle(3)".into(),
            base: hyperbolic_chain(0.25, 18)?,
            fiber: cycle_graph(3, 1.0)?,
            config: TripleConfig {
                lambda: 1.0,
                heat_time: 0.25,
                start: 0,
                sc_truncations: vec![11, 14, 17],
                feller_inner: 0,
                feller_outers: vec![9, 13, 17],
                feller_tol: 1e-2,
            },
        },
        EquivalenceCase {
            name: "incomplete chain × path(2)".into(),
            base: incomplete_chain(0.125, 20)?,
            fiber: path_graph(vec![1.0, 1.0], vec![1.0], None)?,
            config: TripleConfig {
                lambda: 1.0,
                heat_time: 0.5,
                start: 8,
                sc_truncations: vec![15, 17, 19],
                feller_inner: 8,
                feller_outers: vec![12, 16, 19],
                feller_tol: 1e-2,
            },
        },
    ])
}

/// Outcome of the two necessity demonstrations.
#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    /// Parabolicity of ℤ² (the base of the line bundle ℤ³ → ℤ²).
    pub line_bundle_base: Verdict,
    /// Parabolicity of ℤ³ (its total space; the fiber ℤ is not compact).
    pub line_bundle_total: Verdict,
    /// Completeness of the conservative base chain.
    pub incomplete_fiber_base: Verdict,
    /// Completeness of (conservative base) × (explosive fiber).
    pub incomplete_fiber_total: Verdict,
    /// Mass deficits of the product, one per truncation pair.
    pub product_deficits: Vec<f64>,
    /// Compact-fiber control: the first golden equivalence case.
    pub control: EquivalenceReport,
    /// Whether every verdict landed on the expected side.
    pub pattern_confirmed: bool,
}

/// Demonstrates that both hypotheses of the transfer theorems are
/// necessary: compactness of the fiber (via ℤ³ → ℤ²) and stochastic
/// completeness of the fiber (via a conservative × explosive product).
pub fn counterexample_suite() -> Result<CounterexampleReport> {
    // Non-compact fiber: the base ℤ² is parabolic, the total space ℤ³
    // is transient.
    let (z2, _) = lattice_ball_z2(33)?;
    let (z3, _) = lattice_ball_z3(33)?;
    let line_bundle_base = graph_parabolicity_verdict(&z2);
    let line_bundle_total = graph_parabolicity_verdict(&z3);

    // Incomplete fiber: a conservative Euclidean chain times the
    // explosive chain.  Both factor truncations grow together.
    let conservative = discrete_model(
        &ModelManifold::new(WarpingProfile::euclidean(), 2)?,
        0.25,
        24,
    )?;
    let explosive = incomplete_chain(0.125, 20)?;
    let t = 0.5;
    let base_truncs = [15usize, 19, 23];
    let fiber_truncs = [15usize, 17, 19];
    let mut base_deficits = Vec::new();
    let mut product_deficits = Vec::new();
    for (&lb, &lf) in base_truncs.iter().zip(&fiber_truncs) {
        let (b, bmap) = conservative.truncate_at_layer(lb)?;
        let (f, fmap) = explosive.truncate_at_layer(lf)?;
        let b_start = bmap[0].expect("base start survives");
        let f_start = fmap[8].expect("fiber start survives");
        base_deficits.push(1.0 - b.heat_kernel(t)?.mass_from(b_start));
        let product = b.cartesian_product(&f)?;
        let kernel = product.heat_kernel(t)?;
        product_deficits.push(1.0 - kernel.mass_from(b_start * f.len() + f_start));
    }
    let incomplete_fiber_base = completeness_from_deficits(&base_truncs, &base_deficits);
    let incomplete_fiber_total = completeness_from_deficits(&base_truncs, &product_deficits);

    let control_case = &golden_equivalence_cases()?[0];
    let control = equivalence_suite(
        &control_case.name,
        &control_case.base,
        &control_case.fiber,
        &control_case.config,
    )?;

    let pattern_confirmed = line_bundle_base.outcome == Outcome::Holds
        && line_bundle_total.outcome == Outcome::Fails
        && incomplete_fiber_base.outcome == Outcome::Holds
        && incomplete_fiber_total.outcome == Outcome::Fails
        && control.verdicts_agree
        && control.all_decided;

    Ok(CounterexampleReport {
        line_bundle_base,
        line_bundle_total,
        incomplete_fiber_base,
        incomplete_fiber_total,
        product_deficits,
        control,
        pattern_confirmed,
    })
}

/// Kernel sanity figures for one graph across a truncation family.
#[derive(Debug, Clone)]
pub struct KernelPropertyReport {
    /// Graph label.
    pub name: String,
    /// Largest `|p(x,y) − p(y,x)|` over truncations (μ-symmetry).
    pub max_symmetry_defect: f64,
    /// Largest Chapman–Kolmogorov residual `|Ê_t Ê_t − Ê_{2t}|`.
    pub max_ck_defect: f64,
    /// Range of the per-vertex surviving mass over all truncations.
    pub mass_range: (f64, f64),
    /// Whether the start vertex's mass is nondecreasing in truncation.
    pub mass_monotone: bool,
}

/// Checks the defining semigroup properties — symmetry, Chapman–
/// Kolmogorov, sub-Markov mass, truncation monotonicity — on a family of
/// Dirichlet truncations of one graph.
pub fn kernel_property_suite(
    name: &str,
    g: &WeightedGraph,
    truncations: &[usize],
    t: f64,
    start: usize,
) -> Result<KernelPropertyReport> {
    if truncations.len() < 2 {
        return Err(Error::invalid("need at least two truncations"));
    }
    let mut max_symmetry_defect = 0.0f64;
    let mut max_ck_defect = 0.0f64;
    let mut mass_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut start_masses = Vec::new();
    for &cut in truncations {
        let (trunc, map) = g.truncate_at_layer(cut)?;
        let half = trunc.heat_kernel(t / 2.0)?;
        let full = trunc.heat_kernel(t)?;
        max_ck_defect = max_ck_defect.max(half.chapman_kolmogorov_defect(&half, &full));
        for x in 0..trunc.len() {
            let mass = full.mass_from(x);
            mass_range = (mass_range.0.min(mass), mass_range.1.max(mass));
            for y in 0..x {
                max_symmetry_defect =
                    max_symmetry_defect.max((full.density(x, y) - full.density(y, x)).abs());
            }
        }
        let s = map[start].ok_or_else(|| Error::Precondition("start vertex truncated away".into()))?;
        start_masses.push(full.mass_from(s));
    }
    let mass_monotone = start_masses.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    Ok(KernelPropertyReport {
        name: name.to_string(),
        max_symmetry_defect,
        max_ck_defect,
        mass_range,
        mass_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_k0;

    #[test]
    fn trivial_warping_has_geodesic_fibers() {
        let patch = WarpedPatch2D::new(|_| 1.0, 1e-3).unwrap();
        assert_eq!(patch.fiber_mean_curvature(0.3).unwrap(), 0.0);
        let check = patch.warped_divergence_check(&f64::sin, 0.3).unwrap();
        assert!(check.residual < 1e-14, "residual {}", check.residual);
        assert_eq!(check.curvature_term, 0.0);
    }

    #[test]
    fn exponential_warping_matches_symbolic_divergence() {
        // ψ = eˣ: Div of the lifted unit field is (ψ)'/ψ = 1, all of it
        // coming from the curvature term.
        let patch = WarpedPatch2D::new(f64::exp, 1e-3).unwrap();
        let check = patch.warped_divergence_check(&|_| 1.0, 0.0).unwrap();
        assert!((check.lhs - 1.0).abs() < 1e-6, "lhs {}", check.lhs);
        assert!((check.curvature_term - 1.0).abs() < 1e-6);
        assert!(check.residual < 1e-6);
        // The opposite sign convention flips the reported H but the
        // identity (and hence the residual) is convention-independent.
        let flipped = WarpedPatch2D::new(f64::exp, 1e-3)
            .unwrap()
            .with_sign(MeanCurvatureSign::PositiveTrace);
        assert!((flipped.fiber_mean_curvature(0.0).unwrap() + 1.0).abs() < 1e-6);
        let check = flipped.warped_divergence_check(&|_| 1.0, 0.0).unwrap();
        assert!(check.residual < 1e-6);
    }

    #[test]
    fn oscillating_warping_residual_is_second_order() {
        let patch = WarpedPatch2D::new(|x: f64| 2.0 + x.sin(), 1e-3).unwrap();
        for k in 0..20 {
            let x = -2.0 + 0.21 * k as f64;
            let check = patch.warped_divergence_check(&f64::cos, x).unwrap();
            assert!(check.residual < 1e-6, "residual {} at {x}", check.residual);
        }
        let degenerate = WarpedPatch2D::new(|x: f64| x, 1e-3).unwrap();
        assert!(degenerate.fiber_mean_curvature(-1.0).is_err());
    }

    #[test]
    fn lifting_commutes_to_machine_precision() {
        let base = path_graph(vec![1.0; 10], vec![1.0; 9], None).unwrap();
        let fiber = cycle_graph(3, 1.0).unwrap();
        let sub = ProductSubmersion::new(base, fiber).unwrap();
        let u: Vec<f64> = (0..10).map(|k| (0.83 * k as f64).sin()).collect();
        assert!(sub.lemma1_minimal_check(&u).unwrap() < 1e-12);

        // Bessel samples on a Euclidean plane chain, cycle(5) fiber.
        let model = ModelManifold::new(WarpingProfile::euclidean(), 2).unwrap();
        let base = discrete_model(&model, 0.25, 20).unwrap();
        let fiber = cycle_graph(5, 1.0).unwrap();
        let sub = ProductSubmersion::new(base, fiber).unwrap();
        let u: Vec<f64> = (0..20)
            .map(|k| bessel_k0((k as f64 + 0.5) * 0.25))
            .collect();
        assert!(sub.lemma1_minimal_check(&u).unwrap() < 1e-12);

        // Range preservation of the lift.
        let lifted = sub.lift(&u).unwrap();
        let sup = u.iter().cloned().fold(f64::MIN, f64::max);
        let lifted_sup = lifted.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(sup, lifted_sup);
    }

    #[test]
    fn compactness_of_the_fiber_is_enforced() {
        let base = z2_like_chain(5).unwrap();
        let killed_fiber = path_graph(vec![1.0, 1.0], vec![1.0], Some(1.0)).unwrap();
        assert!(ProductSubmersion::new(base.clone(), killed_fiber).is_err());
        let mut disconnected = WeightedGraph::new(vec![1.0, 1.0, 1.0]).unwrap();
        disconnected.add_edge(0, 1, 1.0).unwrap();
        assert!(ProductSubmersion::new(base, disconnected).is_err());
    }

    #[test]
    fn golden_bases_have_the_expected_verdict_patterns() {
        let cases = golden_equivalence_cases().unwrap();
        let expected = [
            (Outcome::Holds, Outcome::Holds, Outcome::Holds),
            (Outcome::Fails, Outcome::Holds, Outcome::Holds),
            (Outcome::Fails, Outcome::Fails, Outcome::Holds),
        ];
        for (case, want) in cases.iter().zip(expected) {
            let report = graph_triple_verdicts(&case.base, &case.config).unwrap();
            assert_eq!(
                (
                    report.parabolicity.outcome,
                    report.completeness.outcome,
                    report.feller.outcome
                ),
                want,
                "{}: deficits {:?}, tails {:?}",
                case.name,
                report.deficits,
                report.tails
            );
        }
    }

    #[test]
    fn equivalence_holds_on_every_golden_product() {
        for case in golden_equivalence_cases().unwrap() {
            let report = equivalence_suite(&case.name, &case.base, &case.fiber, &case.config)
                .unwrap();
            assert!(report.verdicts_agree, "{}: verdicts split", report.name);
            assert!(report.all_decided, "{}: inconclusive", report.name);
            assert!(
                report.max_profile_gap < 1e-12,
                "{}: profile gap {}",
                report.name,
                report.max_profile_gap
            );
            assert!(
                report.max_flux_gap < 1e-12,
                "{}: flux gap {}",
                report.name,
                report.max_flux_gap
            );
        }
    }

    #[test]
    fn counterexamples_break_both_hypotheses() {
        let report = counterexample_suite().unwrap();
        assert_eq!(report.line_bundle_base.outcome, Outcome::Holds);
        assert_eq!(report.line_bundle_total.outcome, Outcome::Fails);
        assert_eq!(report.incomplete_fiber_base.outcome, Outcome::Holds);
        assert_eq!(
            report.incomplete_fiber_total.outcome,
            Outcome::Fails,
            "product deficits {:?}",
            report.product_deficits
        );
        assert!(report.pattern_confirmed);
    }

    #[test]
    fn kernel_properties_hold_across_truncations() {
        let g = z2_like_chain(40).unwrap();
        let report = kernel_property_suite("z2-like chain", &g, &[20, 30, 39], 1.0, 0).unwrap();
        assert!(report.max_symmetry_defect < 1e-10, "{report:?}");
        assert!(report.max_ck_defect < 1e-8, "{report:?}");
        assert!(report.mass_range.0 > 0.0 && report.mass_range.1 <= 1.0 + 1e-10);
        assert!(report.mass_monotone);
    }
}
