//! Induced geometry and mean curvature of parametrized surface patches in
//! rotationally symmetric ambient spaces, and the composed-Laplacian
//! identity that links them to the radial calculus.
//!
//! A patch is a map `φ: D ⊂ ℝ² → N` into a three-dimensional model
//! `N = (dr² + σ(r)²(dθ² + sin²θ dφ²))`, written in the polar chart
//! `(r, θ, φ)` and staying away from the pole `r = 0` and the axis
//! `θ ∈ {0, π}`.  From finite-difference (or user-supplied exact) jets the
//! module computes:
//!
//! * the induced first fundamental form and an orthonormal tangent frame,
//! * the mean curvature vector `H = tr_g α` as the tension field of the
//!   immersion, with a two-route tangentiality diagnostic,
//! * the composed Laplacian `Δ_M (g∘ρ∘φ)` by an intrinsic conservative
//!   stencil, compared against the radial identity
//!   `g″·|∇ρ|² + g′·(σ′/σ)·(2 − |∇ρ|²) + g′·⟨H, ∇ρ⟩`,
//! * the super-solution chain `Δu ≤ g″ + g′⟨∇ρ, H⟩ ≤ μ·u` for
//!   `u = e^{−√λ(ρ−R)}` and `μ = λ + √λ·sup|H|`, valid on convex
//!   (Cartan–Hadamard) ambients outside the ball `B(o, R)`.
//!
//! The golden patches at the bottom of the module (plane, geodesic slice,
//! round sphere, horosphere, paraboloid) have closed-form geometry and
//! anchor the test suite.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::profile::ModelManifold;

/// Parametrization callback: `(u, v) ↦ (r, θ, φ)` polar coordinates.
///
/// The map must be smooth on a neighborhood of the closed domain (the
/// finite-difference stencil evaluates slightly outside it) and must return
/// a *continuous* branch of the angular coordinates — a patch crossing the
/// `φ = ±π` seam of `atan2` has to unwrap the angle itself.
pub type PatchMap = Box<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;

/// Exact derivative callbacks, used instead of finite differences when
/// supplied.  `first` returns `(∂φ/∂u, ∂φ/∂v)`; `second` returns
/// `(∂²φ/∂u², ∂²φ/∂u∂v, ∂²φ/∂v²)`, all in chart components.
pub struct PatchJets {
    /// First derivatives `[∂_u φ, ∂_v φ]`.
    pub first: Box<dyn Fn(f64, f64) -> [[f64; 3]; 2] + Send + Sync>,
    /// Second derivatives `[∂_uu φ, ∂_uv φ, ∂_vv φ]`.
    pub second: Box<dyn Fn(f64, f64) -> [[f64; 3]; 3] + Send + Sync>,
}

/// A parametrized surface patch in a three-dimensional model manifold.
pub struct ImmersedPatch {
    ambient: ModelManifold,
    map: PatchMap,
    exact: Option<PatchJets>,
    domain: [[f64; 2]; 2],
    stencil: f64,
}

/// First-order data of the patch at one parameter point.
#[derive(Debug, Clone)]
pub struct InducedGeometry {
    /// Image point `(r, θ, φ)`.
    pub point: [f64; 3],
    /// Coordinate tangent `∂φ/∂u`.
    pub tangent_u: [f64; 3],
    /// Coordinate tangent `∂φ/∂v`.
    pub tangent_v: [f64; 3],
    /// Induced first fundamental form `g_ab` in the `(u, v)` basis.
    pub first_form: [[f64; 2]; 2],
    /// Orthonormal tangent frame `e_1, e_2` (ambient-metric Gram–Schmidt).
    pub frame: [[f64; 3]; 2],
    /// Unit normal (ambient components).
    pub normal: [f64; 3],
    /// Area density `√det g`.
    pub area_density: f64,
}

/// Mean curvature data at one parameter point.
#[derive(Debug, Clone)]
pub struct MeanCurvatureSample {
    /// Parameter point `(u, v)`.
    pub uv: [f64; 2],
    /// Image point `(r, θ, φ)`.
    pub point: [f64; 3],
    /// Mean curvature vector `H = tr_g α` (chart components), projected
    /// onto the normal space.
    pub vector: [f64; 3],
    /// `|H|` in the ambient metric.
    pub norm: f64,
    /// `⟨H, ∇ρ⟩ = H^r` — the radial component entering the composed
    /// Laplacian.
    pub radial_component: f64,
    /// Two-route tangentiality diagnostic: the tension field recomputed
    /// with intrinsic Christoffel symbols (differentiated from the first
    /// form) must be normal; this is the largest frame component left over.
    pub tangential_defect: f64,
}

/// Mean curvature sampled over a parameter grid.
#[derive(Debug, Clone)]
pub struct MeanCurvatureField {
    /// Per-sample data, row-major over the grid.
    pub samples: Vec<MeanCurvatureSample>,
    /// `sup |H|` over the grid.
    pub sup: f64,
}

/// `sup |H|` under nested grid refinement.
#[derive(Debug, Clone)]
pub struct CurvatureSupremum {
    /// Supremum on the finest grid.
    pub sup: f64,
    /// Supremum per refinement level (nondecreasing: the grids are nested).
    pub per_level: Vec<f64>,
    /// Increment contributed by the last refinement.
    pub refinement_delta: f64,
}

/// One evaluation of the composed-Laplacian identity.
#[derive(Debug, Clone)]
pub struct CompositionCheck {
    /// Intrinsic `Δ_M (g∘ρ∘φ)` by the conservative flux stencil.
    pub lhs: f64,
    /// Radial identity `g″A + g′(σ′/σ)(2−A) + g′H^r`.
    pub rhs: f64,
    /// `|lhs − rhs|`.
    pub residual: f64,
    /// `A = |∇^M ρ|² = Σ_a ⟨e_a, ∂_r⟩² ∈ [0, 1]`.
    pub gradient_alignment: f64,
    /// Stencil size used for the intrinsic Laplacian.
    pub stencil: f64,
}

/// Per-sample record of the super-solution chain.
#[derive(Debug, Clone)]
pub struct ChainSample {
    /// Parameter point.
    pub uv: [f64; 2],
    /// Ambient radius `ρ` at the sample.
    pub rho: f64,
    /// Intrinsic `Δ_M u`.
    pub laplacian: f64,
    /// Middle bound `g″(ρ) + g′(ρ)·⟨∇ρ, H⟩`.
    pub bound: f64,
    /// Right end `μ·u`.
    pub mu_u: f64,
    /// `bound − Δu` (first inequality, `≥ 0` up to stencil error).
    pub slack_first: f64,
    /// `μ·u − bound` (second inequality, `≥ 0` exactly).
    pub slack_second: f64,
    /// Both inequalities hold within tolerance.
    pub holds: bool,
}

/// Outcome of [`ImmersedPatch::supersolution_chain_check`].
#[derive(Debug, Clone)]
pub struct ChainCheckReport {
    /// Spectral parameter `λ`.
    pub lambda: f64,
    /// Exclusion radius `R` (the image must avoid `B(o, R)`).
    pub radius: f64,
    /// `sup |H|` over the sample grid.
    pub sup_h: f64,
    /// `μ = λ + √λ·sup|H|`.
    pub mu: f64,
    /// Per-sample slacks.
    pub samples: Vec<ChainSample>,
    /// Every sample satisfied both inequalities.
    pub all_hold: bool,
    /// Smallest first-inequality slack over the grid.
    pub worst_slack: f64,
}

#[derive(Debug, Clone, Copy)]
struct PatchJet {
    x: [f64; 3],
    du: [f64; 3],
    dv: [f64; 3],
    duu: [f64; 3],
    duv: [f64; 3],
    dvv: [f64; 3],
}

/// A radial test function `g(t)` with explicit first and second
/// derivatives, composed with the ambient radius in the Laplacian checks.
pub struct RadialFunction {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    d2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl RadialFunction {
    /// Builds a radial function from its value and first two derivatives.
    pub fn from_parts(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Box::new(f),
            d1: Box::new(d1),
            d2: Box::new(d2),
        }
    }

    /// `g(t) = t²`.
    pub fn square() -> Self {
        Self::from_parts(|t| t * t, |t| 2.0 * t, |_| 2.0)
    }

    /// `g(t) = t`.
    pub fn identity() -> Self {
        Self::from_parts(|t| t, |_| 1.0, |_| 0.0)
    }

    /// `g ≡ c`.
    pub fn constant(c: f64) -> Self {
        Self::from_parts(move |_| c, |_| 0.0, |_| 0.0)
    }

    /// `g(t) = e^{−√λ (t − shift)}` — the super-solution profile.
    pub fn exp_decay(lambda: f64, shift: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "exp_decay needs λ > 0, got {lambda}"
            )));
        }
        let s = lambda.sqrt();
        Ok(Self::from_parts(
            move |t| (-s * (t - shift)).exp(),
            move |t| -s * (-s * (t - shift)).exp(),
            move |t| lambda * (-s * (t - shift)).exp(),
        ))
    }

    /// `g(t)`.
    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    /// `g′(t)`.
    pub fn deriv(&self, t: f64) -> f64 {
        (self.d1)(t)
    }

    /// `g″(t)`.
    pub fn second_deriv(&self, t: f64) -> f64 {
        (self.d2)(t)
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Richardson combination `(4·fine − coarse)/3` of two same-order
/// finite-difference estimates at steps `h` and `h/2`.
fn richardson(coarse: [f64; 3], fine: [f64; 3]) -> [f64; 3] {
    [
        (4.0 * fine[0] - coarse[0]) / 3.0,
        (4.0 * fine[1] - coarse[1]) / 3.0,
        (4.0 * fine[2] - coarse[2]) / 3.0,
    ]
}

impl ImmersedPatch {
    /// Builds a patch over `domain = [[u₀, u₁], [v₀, v₁]]` into a
    /// three-dimensional ambient model.  The parametrization is probed at
    /// the corners and center; it must stay inside the polar chart
    /// (`r > 0`, `0 < θ < π`) on the whole domain.
    pub fn new(
        ambient: ModelManifold,
        map: PatchMap,
        domain: [[f64; 2]; 2],
    ) -> Result<Self> {
        if ambient.dimension() != 3 {
            return Err(Error::invalid(format!(
                "immersed patches need a three-dimensional ambient, got m = {}",
                ambient.dimension()
            )));
        }
        for [lo, hi] in domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "degenerate parameter interval [{lo}, {hi}]"
                )));
            }
        }
        let patch = Self {
            ambient,
            map,
            exact: None,
            domain,
            stencil: 1e-3,
        };
        let [[u0, u1], [v0, v1]] = domain;
        for (u, v) in [
            (u0, v0),
            (u0, v1),
            (u1, v0),
            (u1, v1),
            (0.5 * (u0 + u1), 0.5 * (v0 + v1)),
        ] {
            patch.chart(u, v)?;
        }
        Ok(patch)
    }

    /// Replaces the finite-difference step (default `10⁻³`).
    pub fn with_stencil(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 0.1) {
            return Err(Error::invalid(format!(
                "stencil must lie in (0, 0.1], got {h}"
            )));
        }
        self.stencil = h;
        Ok(self)
    }

    /// Supplies exact derivative callbacks, bypassing finite differences.
    pub fn with_exact_jets(mut self, jets: PatchJets) -> Self {
        self.exact = Some(jets);
        self
    }

    /// The ambient model.
    pub fn ambient(&self) -> &ModelManifold {
        &self.ambient
    }

    /// The parameter domain `[[u₀, u₁], [v₀, v₁]]`.
    pub fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    /// Evaluates the parametrization, checking that the image stays inside
    /// the polar chart.
    fn chart(&self, u: f64, v: f64) -> Result<[f64; 3]> {
        let x = (self.map)(u, v);
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid(format!(
                "parametrization returned a non-finite point at ({u}, {v})"
            )));
        }
        if x[0] <= 1e-8 {
            return Err(Error::invalid(format!(
                "patch touches the pole: r = {} at ({u}, {v})",
                x[0]
            )));
        }
        if x[1] <= 1e-8 || x[1] >= PI - 1e-8 {
            return Err(Error::invalid(format!(
                "patch touches the polar axis: θ = {} at ({u}, {v})",
                x[1]
            )));
        }
        Ok(x)
    }

    /// First- and second-order jet of the parametrization, by Richardson
    /// finite differences (steps `h` and `h/2`) or exact callbacks.
    ///
    /// With finite differences the two steps double as a convergence probe:
    /// if the raw second-difference estimates disagree wildly the
    /// parametrization is not `C²` at this stencil and a numerical error is
    /// returned instead of silently bad curvature.
    fn jet(&self, u: f64, v: f64) -> Result<PatchJet> {
        let x = self.chart(u, v)?;
        if let Some(jets) = &self.exact {
            let [du, dv] = (jets.first)(u, v);
            let [duu, duv, dvv] = (jets.second)(u, v);
            return Ok(PatchJet {
                x,
                du,
                dv,
                duu,
                duv,
                dvv,
            });
        }
        let h = self.stencil;
        let scale = 1.0 + x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut first = [[0.0; 3]; 2];
        let mut second_pure = [[0.0; 3]; 2];
        for (axis, slot) in [(0usize, 0usize), (1, 1)] {
            let eval = |t: f64| -> Result<[f64; 3]> {
                if axis == 0 {
                    self.chart(u + t, v)
                } else {
                    self.chart(u, v + t)
                }
            };
            let (pf, mf) = (eval(h)?, eval(-h)?);
            let (pf2, mf2) = (eval(h / 2.0)?, eval(-h / 2.0)?);
            let d_h = scale3(sub3(pf, mf), 1.0 / (2.0 * h));
            let d_h2 = scale3(sub3(pf2, mf2), 1.0 / h);
            first[slot] = richardson(d_h, d_h2);
            let mut s_h = [0.0; 3];
            let mut s_h2 = [0.0; 3];
            for i in 0..3 {
                s_h[i] = (pf[i] - 2.0 * x[i] + mf[i]) / (h * h);
                s_h2[i] = (pf2[i] - 2.0 * x[i] + mf2[i]) / (h * h / 4.0);
                let gap = (s_h[i] - s_h2[i]).abs();
                if gap > 1e-2 * scale.max(s_h[i].abs()) {
                    return Err(Error::numerical(format!(
                        "second derivatives do not converge at stencil {h} \
                         near ({u}, {v}): estimates {} vs {}",
                        s_h[i], s_h2[i]
                    )));
                }
            }
            second_pure[slot] = richardson(s_h, s_h2);
        }
        let corner = |du: f64, dv: f64| self.chart(u + du, v + dv);
        let mixed = |t: f64| -> Result<[f64; 3]> {
            let (pp, pm) = (corner(t, t)?, corner(t, -t)?);
            let (mp, mm) = (corner(-t, t)?, corner(-t, -t)?);
            let mut m = [0.0; 3];
            for i in 0..3 {
                m[i] = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * t * t);
            }
            Ok(m)
        };
        let duv = richardson(mixed(h)?, mixed(h / 2.0)?);
        Ok(PatchJet {
            x,
            du: first[0],
            dv: first[1],
            duu: second_pure[0],
            duv,
            dvv: second_pure[1],
        })
    }

    /// Diagonal ambient metric `(1, σ², σ² sin²θ)` at a chart point.
    fn metric_diag(&self, x: &[f64; 3]) -> [f64; 3] {
        let sigma = self.ambient.profile().sigma(x[0]);
        let s2 = sigma * sigma;
        [1.0, s2, s2 * x[1].sin().powi(2)]
    }

    fn ambient_inner(gd: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
        gd[0] * a[0] * b[0] + gd[1] * a[1] * b[1] + gd[2] * a[2] * b[2]
    }

    /// Christoffel contraction `Γ^i_{jk} a^j b^k` of the warped metric:
    /// `Γ^r_{θθ} = −σσ′`, `Γ^r_{φφ} = −σσ′ sin²θ`, `Γ^θ_{rθ} = Γ^φ_{rφ} =
    /// σ′/σ`, `Γ^θ_{φφ} = −sinθ cosθ`, `Γ^φ_{θφ} = cot θ`.
    fn christoffel_quadratic(&self, x: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        let jet = self.ambient.profile().jet(x[0]);
        let ss = jet.sigma * jet.dsigma; // σσ′
        let dls = jet.dlog_sigma; // σ′/σ
        let (sin_t, cos_t) = x[1].sin_cos();
        let cot_t = cos_t / sin_t;
        [
            -ss * (a[1] * b[1] + sin_t * sin_t * a[2] * b[2]),
            dls * (a[0] * b[1] + a[1] * b[0]) - sin_t * cos_t * a[2] * b[2],
            dls * (a[0] * b[2] + a[2] * b[0]) + cot_t * (a[1] * b[2] + a[2] * b[1]),
        ]
    }

    fn geometry_from_jet(&self, jet: &PatchJet) -> Result<InducedGeometry> {
        let gd = self.metric_diag(&jet.x);
        let g00 = Self::ambient_inner(&gd, &jet.du, &jet.du);
        let g01 = Self::ambient_inner(&gd, &jet.du, &jet.dv);
        let g11 = Self::ambient_inner(&gd, &jet.dv, &jet.dv);
        let det = g00 * g11 - g01 * g01;
        if !(det > 1e-10 * g00.max(g11).max(1e-300).powi(2) && g00 > 0.0) {
            return Err(Error::invalid(format!(
                "degenerate immersion: dφ has rank < 2 (det g = {det:.3e}) \
                 at r = {:.6}",
                jet.x[0]
            )));
        }
        let e1 = scale3(jet.du, 1.0 / g00.sqrt());
        let mut e2 = sub3(jet.dv, scale3(e1, Self::ambient_inner(&gd, &jet.dv, &e1)));
        let n2 = Self::ambient_inner(&gd, &e2, &e2);
        e2 = scale3(e2, 1.0 / n2.sqrt());
        // Covector ε_{ijk} T_u^j T_v^k annihilates the tangent plane; raise
        // its index with the (diagonal) metric and normalize.
        let c = [
            jet.du[1] * jet.dv[2] - jet.du[2] * jet.dv[1],
            jet.du[2] * jet.dv[0] - jet.du[0] * jet.dv[2],
            jet.du[0] * jet.dv[1] - jet.du[1] * jet.dv[0],
        ];
        let mut normal = [c[0] / gd[0], c[1] / gd[1], c[2] / gd[2]];
        let nn = Self::ambient_inner(&gd, &normal, &normal).sqrt();
        normal = scale3(normal, 1.0 / nn);
        Ok(InducedGeometry {
            point: jet.x,
            tangent_u: jet.du,
            tangent_v: jet.dv,
            first_form: [[g00, g01], [g01, g11]],
            frame: [e1, e2],
            normal,
            area_density: det.sqrt(),
        })
    }

    /// Induced first fundamental form, orthonormal tangent frame, and unit
    /// normal at `(u, v)`.  Errors when `dφ` drops rank (degenerate
    /// immersion).
    pub fn induced_geometry(&self, u: f64, v: f64) -> Result<InducedGeometry> {
        let jet = self.jet(u, v)?;
        self.geometry_from_jet(&jet)
    }

    /// First fundamental form alone (used for its parametric derivatives).
    fn first_form_at(&self, u: f64, v: f64) -> Result<[[f64; 2]; 2]> {
        let jet = self.jet(u, v)?;
        let gd = self.metric_diag(&jet.x);
        let g00 = Self::ambient_inner(&gd, &jet.du, &jet.du);
        let g01 = Self::ambient_inner(&gd, &jet.du, &jet.dv);
        let g11 = Self::ambient_inner(&gd, &jet.dv, &jet.dv);
        Ok([[g00, g01], [g01, g11]])
    }

    /// Mean curvature vector at `(u, v)`: the trace `g^{ab}(∂_a∂_b φ +
    /// Γ(∂_a φ, ∂_b φ))`, which for an isometric immersion is the tension
    /// field and equals `H`.  The returned vector is the trace projected
    /// onto the normal space; `tangential_defect` reports how far the
    /// independently computed tension field (intrinsic Christoffel route)
    /// is from being normal, which checks the whole jet pipeline.
    pub fn mean_curvature(&self, u: f64, v: f64) -> Result<MeanCurvatureSample> {
        let jet = self.jet(u, v)?;
        let geo = self.geometry_from_jet(&jet)?;
        let gd = self.metric_diag(&jet.x);
        let [[g00, g01], [_, g11]] = geo.first_form;
        let det = g00 * g11 - g01 * g01;
        let (iuu, iuv, ivv) = (g11 / det, -g01 / det, g00 / det);
        let alpha_uu = {
            let gamma = self.christoffel_quadratic(&jet.x, &jet.du, &jet.du);
            [
                jet.duu[0] + gamma[0],
                jet.duu[1] + gamma[1],
                jet.duu[2] + gamma[2],
            ]
        };
        let alpha_uv = {
            let gamma = self.christoffel_quadratic(&jet.x, &jet.du, &jet.dv);
            [
                jet.duv[0] + gamma[0],
                jet.duv[1] + gamma[1],
                jet.duv[2] + gamma[2],
            ]
        };
        let alpha_vv = {
            let gamma = self.christoffel_quadratic(&jet.x, &jet.dv, &jet.dv);
            [
                jet.dvv[0] + gamma[0],
                jet.dvv[1] + gamma[1],
                jet.dvv[2] + gamma[2],
            ]
        };
        let mut trace = [0.0; 3];
        for i in 0..3 {
            trace[i] = iuu * alpha_uu[i] + 2.0 * iuv * alpha_uv[i] + ivv * alpha_vv[i];
        }
        // Projection route: strip the tangential part of the raw trace.
        let mut vector = trace;
        for e in &geo.frame {
            let c = Self::ambient_inner(&gd, &vector, e);
            vector = sub3(vector, scale3(*e, c));
        }
        // Intrinsic route: the connection correction g^{ab} Γ^c_{ab} ∂_c φ,
        // with Γ^c_{ab} differentiated from the first fundamental form.
        let delta = self.stencil;
        let d_form = |axis: usize| -> Result<[[f64; 2]; 2]> {
            let eval = |t: f64| {
                if axis == 0 {
                    self.first_form_at(u + t, v)
                } else {
                    self.first_form_at(u, v + t)
                }
            };
            let (p, m) = (eval(delta)?, eval(-delta)?);
            let (p2, m2) = (eval(delta / 2.0)?, eval(-delta / 2.0)?);
            let mut out = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    let coarse = (p[a][b] - m[a][b]) / (2.0 * delta);
                    let fine = (p2[a][b] - m2[a][b]) / delta;
                    out[a][b] = (4.0 * fine - coarse) / 3.0;
                }
            }
            Ok(out)
        };
        let dg = [d_form(0)?, d_form(1)?];
        let inv = [[iuu, iuv], [iuv, ivv]];
        // γ^c = g^{ab} Γ^c_{ab} with Γ^c_{ab} = ½ g^{cd}(∂_a g_bd + ∂_b g_ad − ∂_d g_ab).
        let mut gamma_c = [0.0f64; 2];
        for c in 0..2 {
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let mut low = 0.0;
                    for d in 0..2 {
                        low += inv[c][d] * (dg[a][b][d] + dg[b][a][d] - dg[d][a][b]);
                    }
                    acc += inv[a][b] * 0.5 * low;
                }
            }
            gamma_c[c] = acc;
        }
        let correction = [
            gamma_c[0] * jet.du[0] + gamma_c[1] * jet.dv[0],
            gamma_c[0] * jet.du[1] + gamma_c[1] * jet.dv[1],
            gamma_c[0] * jet.du[2] + gamma_c[1] * jet.dv[2],
        ];
        let tension = sub3(trace, correction);
        let mut defect = 0.0f64;
        for e in &geo.frame {
            defect = defect.max(Self::ambient_inner(&gd, &tension, e).abs());
        }
        let norm = Self::ambient_inner(&gd, &vector, &vector).sqrt();
        Ok(MeanCurvatureSample {
            uv: [u, v],
            point: jet.x,
            vector,
            norm,
            radial_component: vector[0],
            tangential_defect: defect,
        })
    }

    fn grid(&self, n_u: usize, n_v: usize) -> Result<Vec<(f64, f64)>> {
        if n_u < 2 || n_v < 2 {
            return Err(Error::invalid("sample grids need at least 2×2 points"));
        }
        let [[u0, u1], [v0, v1]] = self.domain;
        let mut pts = Vec::with_capacity(n_u * n_v);
        for i in 0..n_u {
            let u = u0 + (u1 - u0) * i as f64 / (n_u - 1) as f64;
            for j in 0..n_v {
                let v = v0 + (v1 - v0) * j as f64 / (n_v - 1) as f64;
                pts.push((u, v));
            }
        }
        Ok(pts)
    }

    /// Mean curvature over an inclusive `n_u × n_v` parameter grid.
    pub fn mean_curvature_field(&self, n_u: usize, n_v: usize) -> Result<MeanCurvatureField> {
        let mut samples = Vec::new();
        let mut sup = 0.0f64;
        for (u, v) in self.grid(n_u, n_v)? {
            let s = self.mean_curvature(u, v)?;
            sup = sup.max(s.norm);
            samples.push(s);
        }
        Ok(MeanCurvatureField { samples, sup })
    }

    /// `sup |H|` over nested grids `(8·2^ℓ + 1)²`, `ℓ = 0..levels`.  The
    /// grids are nested (each refinement keeps all previous points), so the
    /// reported suprema are nondecreasing; the final increment estimates
    /// the refinement error.
    pub fn mean_curvature_supremum(&self, levels: usize) -> Result<CurvatureSupremum> {
        if levels < 2 {
            return Err(Error::invalid("need at least two refinement levels"));
        }
        let mut per_level = Vec::with_capacity(levels);
        for level in 0..levels {
            let n = 8 * (1usize << level) + 1;
            per_level.push(self.mean_curvature_field(n, n)?.sup);
        }
        let sup = *per_level.last().unwrap();
        let delta = sup - per_level[per_level.len() - 2];
        Ok(CurvatureSupremum {
            sup,
            per_level,
            refinement_delta: delta,
        })
    }

    /// Intrinsic Laplacian of `f(u, v)` at `(u, v)` by the conservative
    /// flux stencil `(1/√g) ∂_a (√g g^{ab} ∂_b f)` with step `s`.
    fn intrinsic_laplacian(
        &self,
        f: &dyn Fn(f64, f64) -> Result<f64>,
        u: f64,
        v: f64,
        s: f64,
    ) -> Result<f64> {
        let flux = |a: f64, b: f64, dir: usize| -> Result<f64> {
            let form = self.first_form_at(a, b)?;
            let det = form[0][0] * form[1][1] - form[0][1] * form[0][1];
            if !(det > 0.0) {
                return Err(Error::invalid(format!(
                    "degenerate immersion: dφ has rank < 2 (det g = {det:.3e}) \
                     at ({a}, {b})"
                )));
            }
            let fu = (f(a + s / 2.0, b)? - f(a - s / 2.0, b)?) / s;
            let fv = (f(a, b + s / 2.0)? - f(a, b - s / 2.0)?) / s;
            let up = (form[1][1] * fu - form[0][1] * fv) / det;
            let vp = (-form[0][1] * fu + form[0][0] * fv) / det;
            Ok(det.sqrt() * if dir == 0 { up } else { vp })
        };
        let form = self.first_form_at(u, v)?;
        let det = form[0][0] * form[1][1] - form[0][1] * form[0][1];
        Ok(
            (flux(u + s / 2.0, v, 0)? - flux(u - s / 2.0, v, 0)? + flux(u, v + s / 2.0, 1)?
                - flux(u, v - s / 2.0, 1)?)
                / (s * det.sqrt()),
        )
    }

    /// Checks the composed-Laplacian identity at `(u, v)`: the intrinsic
    /// `Δ_M (g∘ρ∘φ)` against `g″·A + g′·(σ′/σ)·(2−A) + g′·H^r`, where
    /// `A = |∇^M ρ|²`.  The radial Hessian enters through its two
    /// eigenvalues (0 radially, `σ′/σ` spherically); the residual decays
    /// at second order in the stencil.
    pub fn laplacian_composition_check(
        &self,
        g: &RadialFunction,
        u: f64,
        v: f64,
        stencil: f64,
    ) -> Result<CompositionCheck> {
        if !(stencil > 0.0 && stencil <= 0.1) {
            return Err(Error::invalid(format!(
                "composition stencil must lie in (0, 0.1], got {stencil}"
            )));
        }
        let f = |uu: f64, vv: f64| -> Result<f64> { Ok(g.value(self.chart(uu, vv)?[0])) };
        let lhs = self.intrinsic_laplacian(&f, u, v, stencil)?;
        let geo = self.induced_geometry(u, v)?;
        let h = self.mean_curvature(u, v)?;
        let rho = geo.point[0];
        let alignment = geo.frame[0][0].powi(2) + geo.frame[1][0].powi(2);
        let dls = self.ambient.profile().dlog_sigma(rho);
        let rhs = g.second_deriv(rho) * alignment
            + g.deriv(rho) * dls * (2.0 - alignment)
            + g.deriv(rho) * h.radial_component;
        Ok(CompositionCheck {
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            gradient_alignment: alignment,
            stencil,
        })
    }

    /// Verifies the super-solution chain `Δ_M u ≤ g″(ρ) + g′(ρ)⟨∇ρ, H⟩ ≤
    /// μ·u` for `u = e^{−√λ(ρ−R)}` on an `n_u × n_v` grid, with
    /// `μ = λ + √λ·sup|H|`.
    ///
    /// Preconditions (violations are `Error::Precondition`): the ambient
    /// must be convex (`σ″ ≥ 0`, nonpositive radial curvature) and the
    /// image must stay outside the ball `B(o, R)` — both are what make the
    /// middle bound drop the `A`-dependence with the right sign.
    pub fn supersolution_chain_check(
        &self,
        lambda: f64,
        radius: f64,
        grid: (usize, usize),
    ) -> Result<ChainCheckReport> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("need λ > 0, got {lambda}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("need R > 0, got {radius}")));
        }
        if !self.ambient.profile().is_cartan_hadamard() {
            return Err(Error::Precondition(
                "the super-solution chain needs a convex ambient (σ″ ≥ 0 \
                 everywhere); this model has positively curved regions"
                    .into(),
            ));
        }
        let points = self.grid(grid.0, grid.1)?;
        let mut curvatures = Vec::with_capacity(points.len());
        let mut min_rho = f64::INFINITY;
        let mut sup_h = 0.0f64;
        for &(u, v) in &points {
            let s = self.mean_curvature(u, v)?;
            min_rho = min_rho.min(s.point[0]);
            sup_h = sup_h.max(s.norm);
            curvatures.push(s);
        }
        if min_rho < radius - 1e-12 {
            return Err(Error::Precondition(format!(
                "the image must stay outside the ball B(o, R = {radius}), \
                 but the patch reaches ρ = {min_rho:.6}"
            )));
        }
        let sqrt_l = lambda.sqrt();
        let mu = lambda + sqrt_l * sup_h;
        let g = RadialFunction::exp_decay(lambda, radius)?;
        let f = |uu: f64, vv: f64| -> Result<f64> { Ok(g.value(self.chart(uu, vv)?[0])) };
        let mut samples = Vec::with_capacity(points.len());
        let mut all_hold = true;
        let mut worst = f64::INFINITY;
        for s in curvatures {
            let [u, v] = s.uv;
            let rho = s.point[0];
            let u_val = g.value(rho);
            let laplacian = self.intrinsic_laplacian(&f, u, v, 1e-2)?;
            let bound = lambda * u_val - sqrt_l * u_val * s.radial_component;
            let mu_u = mu * u_val;
            let slack_first = bound - laplacian;
            let slack_second = mu_u - bound;
            let tol = 1e-6 * mu_u.abs().max(1.0);
            let holds = slack_first >= -tol && slack_second >= -tol;
            all_hold &= holds;
            worst = worst.min(slack_first);
            samples.push(ChainSample {
                uv: s.uv,
                rho,
                laplacian,
                bound,
                mu_u,
                slack_first,
                slack_second,
                holds,
            });
        }
        Ok(ChainCheckReport {
            lambda,
            radius,
            sup_h,
            mu,
            samples,
            all_hold,
            worst_slack: worst,
        })
    }

    /// Rotates the patch by an ambient isometry (rotation through `angle`
    /// about the `y`-axis of the sphere factor).  Rotations fix the pole,
    /// so `ρ`, `|H|`, and every check are invariant.
    ///
    /// The rotated patch carries exact jets obtained by pushing the base
    /// patch's jets through the rotation with the analytic chain rule, so
    /// comparing geometry before and after exercises the covariance of the
    /// metric/Christoffel/curvature pipeline itself rather than the
    /// reproducibility of finite differences in a tilted chart.
    pub fn rotated_about_y(self, angle: f64) -> Result<Self> {
        let (sin_b, cos_b) = angle.sin_cos();
        let ambient = self.ambient.clone();
        let domain = self.domain;
        let stencil = self.stencil;
        let base = std::sync::Arc::new(self);
        let b_map = base.clone();
        let rotated: PatchMap = Box::new(move |u, v| {
            rotate_point(&(b_map.map)(u, v), cos_b, sin_b)
        });
        let b_first = base.clone();
        let b_second = base;
        let jets = PatchJets {
            first: Box::new(move |u, v| {
                let jet = b_first
                    .jet(u, v)
                    .expect("rotated patch evaluated outside the base chart");
                let push = pushforward_jet(&jet, cos_b, sin_b);
                [push.du, push.dv]
            }),
            second: Box::new(move |u, v| {
                let jet = b_second
                    .jet(u, v)
                    .expect("rotated patch evaluated outside the base chart");
                let push = pushforward_jet(&jet, cos_b, sin_b);
                [push.duu, push.duv, push.dvv]
            }),
        };
        Ok(Self::new(ambient, rotated, domain)?
            .with_stencil(stencil)?
            .with_exact_jets(jets))
    }
}

fn rotate_point(x: &[f64; 3], cos_b: f64, sin_b: f64) -> [f64; 3] {
    let (sin_t, cos_t) = x[1].sin_cos();
    let (sin_p, cos_p) = x[2].sin_cos();
    let n = [sin_t * cos_p, sin_t * sin_p, cos_t];
    let m = [
        cos_b * n[0] + sin_b * n[2],
        n[1],
        -sin_b * n[0] + cos_b * n[2],
    ];
    [x[0], m[2].clamp(-1.0, 1.0).acos(), m[1].atan2(m[0])]
}

/// First and second derivatives of the rotated angles `(θ′, φ′)` with
/// respect to the base angles `(θ, φ)`, via the unit-sphere embedding.
/// Returns `(dθ′, d²θ′, dφ′, d²φ′)` with second derivatives ordered
/// `(θθ, θφ, φφ)`.
#[allow(clippy::type_complexity)]
fn rotation_derivatives(
    theta: f64,
    phi: f64,
    cos_b: f64,
    sin_b: f64,
) -> ([f64; 2], [f64; 3], [f64; 2], [f64; 3]) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let rot = |a: [f64; 3]| {
        [
            cos_b * a[0] + sin_b * a[2],
            a[1],
            -sin_b * a[0] + cos_b * a[2],
        ]
    };
    let m = rot([st * cp, st * sp, ct]);
    let m_t = rot([ct * cp, ct * sp, -st]);
    let m_p = rot([-st * sp, st * cp, 0.0]);
    let m_tt = rot([-st * cp, -st * sp, -ct]);
    let m_tp = rot([-ct * sp, ct * cp, 0.0]);
    let m_pp = rot([-st * cp, -st * sp, 0.0]);
    // θ′ = acos(m_z): dθ′ = −dm_z/sin θ′.
    let w = m[2];
    let s2 = (1.0 - w * w).max(f64::MIN_POSITIVE);
    let s = s2.sqrt();
    let th_d = |wx: f64| -wx / s;
    let th_dd = |wx: f64, wy: f64, wxy: f64| -(wxy * s2 + w * wx * wy) / (s2 * s);
    let dth = [th_d(m_t[2]), th_d(m_p[2])];
    let ddth = [
        th_dd(m_t[2], m_t[2], m_tt[2]),
        th_dd(m_t[2], m_p[2], m_tp[2]),
        th_dd(m_p[2], m_p[2], m_pp[2]),
    ];
    // φ′ = atan2(m_y, m_x).
    let (p, q) = (m[0], m[1]);
    let r2 = p * p + q * q;
    let ph_d = |px: f64, qx: f64| (p * qx - q * px) / r2;
    let ph_dd = |px: f64, qx: f64, py: f64, qy: f64, pxy: f64, qxy: f64| {
        (py * qx + p * qxy - qy * px - q * pxy) / r2
            - (p * qx - q * px) * 2.0 * (p * py + q * qy) / (r2 * r2)
    };
    let dph = [ph_d(m_t[0], m_t[1]), ph_d(m_p[0], m_p[1])];
    let ddph = [
        ph_dd(m_t[0], m_t[1], m_t[0], m_t[1], m_tt[0], m_tt[1]),
        ph_dd(m_t[0], m_t[1], m_p[0], m_p[1], m_tp[0], m_tp[1]),
        ph_dd(m_p[0], m_p[1], m_p[0], m_p[1], m_pp[0], m_pp[1]),
    ];
    (dth, ddth, dph, ddph)
}

/// Chain rule for a full patch jet through the rotation.
fn pushforward_jet(jet: &PatchJet, cos_b: f64, sin_b: f64) -> PatchJet {
    let (dth, ddth, dph, ddph) = rotation_derivatives(jet.x[1], jet.x[2], cos_b, sin_b);
    let first = |t: &[f64; 3]| {
        [
            t[0],
            dth[0] * t[1] + dth[1] * t[2],
            dph[0] * t[1] + dph[1] * t[2],
        ]
    };
    let second = |a: &[f64; 3], b: &[f64; 3], s: &[f64; 3]| {
        let quad_th = ddth[0] * a[1] * b[1]
            + ddth[1] * (a[1] * b[2] + a[2] * b[1])
            + ddth[2] * a[2] * b[2];
        let quad_ph = ddph[0] * a[1] * b[1]
            + ddph[1] * (a[1] * b[2] + a[2] * b[1])
            + ddph[2] * a[2] * b[2];
        [
            s[0],
            quad_th + dth[0] * s[1] + dth[1] * s[2],
            quad_ph + dph[0] * s[1] + dph[1] * s[2],
        ]
    };
    PatchJet {
        x: rotate_point(&jet.x, cos_b, sin_b),
        du: first(&jet.du),
        dv: first(&jet.dv),
        duu: second(&jet.du, &jet.du, &jet.duu),
        duv: second(&jet.du, &jet.dv, &jet.duv),
        dvv: second(&jet.dv, &jet.dv, &jet.dvv),
    }
}

/// Flat plane through the origin of Euclidean ℝ³ (the `z = 0` plane in
/// Cartesian terms), parametrized by the Cartesian coordinates themselves:
/// the induced form is the identity and `H = 0`.
pub fn plane_patch() -> Result<ImmersedPatch> {
    let ambient = ModelManifold::new(crate::profile::WarpingProfile::euclidean(), 3)?;
    let map: PatchMap = Box::new(|u, v| [(u * u + v * v).sqrt(), PI / 2.0, v.atan2(u)]);
    ImmersedPatch::new(ambient, map, [[1.0, 2.0], [0.3, 0.9]])
}

/// Exact jets for [`plane_patch`], for cross-checking the finite
/// differences.
pub fn plane_patch_jets() -> PatchJets {
    PatchJets {
        first: Box::new(|u, v| {
            let r = (u * u + v * v).sqrt();
            let r2 = r * r;
            [[u / r, 0.0, -v / r2], [v / r, 0.0, u / r2]]
        }),
        second: Box::new(|u, v| {
            let r2 = u * u + v * v;
            let r = r2.sqrt();
            let r3 = r2 * r;
            let r4 = r2 * r2;
            [
                [v * v / r3, 0.0, 2.0 * u * v / r4],
                [-u * v / r3, 0.0, (v * v - u * u) / r4],
                [u * u / r3, 0.0, -2.0 * u * v / r4],
            ]
        }),
    }
}

/// Totally geodesic slice `θ = π/2` of hyperbolic 3-space: an isometric
/// copy of the hyperbolic plane (`ds² = du² + sinh²u dv²`) with `H = 0`.
pub fn geodesic_slice_patch() -> Result<ImmersedPatch> {
    let ambient = ModelManifold::new(crate::profile::WarpingProfile::hyperbolic(1.0)?, 3)?;
    let map: PatchMap = Box::new(|u, v| [u, PI / 2.0, v]);
    ImmersedPatch::new(ambient, map, [[1.0, 2.0], [0.3, 1.2]])
}

/// Exact jets for [`geodesic_slice_patch`] (the map is affine).
pub fn geodesic_slice_jets() -> PatchJets {
    PatchJets {
        first: Box::new(|_, _| [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
        second: Box::new(|_, _| [[0.0; 3]; 3]),
    }
}

/// Round sphere `ρ = radius` in Euclidean ℝ³, parametrized by `(θ, φ)`.
/// Induced form `radius²·(round metric)`; `H` points inward with
/// `|H| = 2/radius` (trace convention).
pub fn sphere_patch(radius: f64) -> Result<ImmersedPatch> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!(
            "sphere radius must be positive, got {radius}"
        )));
    }
    let ambient = ModelManifold::new(crate::profile::WarpingProfile::euclidean(), 3)?;
    let map: PatchMap = Box::new(move |u, v| [radius, u, v]);
    ImmersedPatch::new(ambient, map, [[0.4, PI - 0.4], [0.3, 1.2]])
}

/// Horosphere patch in hyperbolic 3-space: the Busemann level set
/// `cosh r − sinh r cos θ = 1`, i.e. `r(θ) = 2 artanh(cos θ)`.  Flat
/// intrinsic metric, constant `|H| = 2` (both principal curvatures 1).
pub fn horosphere_patch() -> Result<ImmersedPatch> {
    let ambient = ModelManifold::new(crate::profile::WarpingProfile::hyperbolic(1.0)?, 3)?;
    let map: PatchMap = Box::new(|u, v| [2.0 * u.cos().atanh(), u, v]);
    ImmersedPatch::new(ambient, map, [[0.5, 1.2], [0.3, 1.2]])
}

/// Paraboloid `z = x² + y²` over `|u|, |v| ≤ 1`, shifted to `x = 2 + u` so
/// the surface clears the pole, then expressed in polar coordinates.  The
/// translation is a Euclidean isometry, so the classical graph curvature
/// applies: `|H|(u, v) = (4 + 8ρ²)/(1 + 4ρ²)^{3/2}` with `ρ² = u² + v²`,
/// maximal (`= 4`) at the apex `u = v = 0`.
pub fn paraboloid_patch() -> Result<ImmersedPatch> {
    let ambient = ModelManifold::new(crate::profile::WarpingProfile::euclidean(), 3)?;
    let map: PatchMap = Box::new(|u, v| {
        let (x, y, z) = (2.0 + u, v, u * u + v * v);
        let r = (x * x + y * y + z * z).sqrt();
        [r, (z / r).clamp(-1.0, 1.0).acos(), y.atan2(x)]
    });
    ImmersedPatch::new(ambient, map, [[-1.0, 1.0], [-1.0, 1.0]])
}

/// One knot of the generating curve of a tabulated revolution patch: the
/// curve parameter `t` with the polar radius `r(t)` and colatitude `θ(t)`
/// and their first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct CurveSample {
    pub t: f64,
    pub r: f64,
    pub dr: f64,
    pub d2r: f64,
    pub theta: f64,
    pub dtheta: f64,
    pub d2theta: f64,
}

/// Cubic Hermite value and slope on one interval of width `h`, from the
/// endpoint values `f0, f1` and slopes `m0, m1`, at local coordinate
/// `t ∈ [0, 1]`.
fn hermite3(h: f64, t: f64, f0: f64, m0: f64, f1: f64, m1: f64) -> (f64, f64) {
    let (t2, t3) = (t * t, t * t * t);
    let value = (2.0 * t3 - 3.0 * t2 + 1.0) * f0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * f1
        + (t3 - t2) * h * m1;
    let deriv = ((6.0 * t2 - 6.0 * t) * f0
        + (3.0 * t2 - 4.0 * t + 1.0) * h * m0
        + (-6.0 * t2 + 6.0 * t) * f1
        + (3.0 * t2 - 2.0 * t) * h * m1)
        / h;
    (value, deriv)
}

/// `[f, f', f'']` of one tabulated coordinate at parameter `t`: value and
/// slope from the Hermite interpolant of `(f, f')`, curvature from the
/// Hermite interpolant of `(f', f'')` — the same two-level scheme the
/// tabulated warping profiles use.  Outside the table the boundary
/// interval's polynomial extrapolates, so the patch stays smooth on the
/// stencil neighborhood of its domain.
fn curve_jet(
    samples: &[CurveSample],
    t: f64,
    select: impl Fn(&CurveSample) -> (f64, f64, f64),
) -> [f64; 3] {
    let hi = samples
        .partition_point(|s| s.t <= t)
        .clamp(1, samples.len() - 1);
    let (a, b) = (&samples[hi - 1], &samples[hi]);
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let (f0, df0, d2f0) = select(a);
    let (f1, df1, d2f1) = select(b);
    let (value, deriv) = hermite3(h, s, f0, df0, f1, df1);
    let (second, _) = hermite3(h, s, df0, d2f0, df1, d2f1);
    [value, deriv, second]
}

/// Surface of revolution about the polar axis, given by a tabulated
/// generating curve: `(u, v) ↦ (r(u), θ(u), v)` with `r` and `θ` evaluated
/// by Hermite interpolation of the [`CurveSample`] table.  The
/// interpolant's derivatives are attached as exact jets, so no finite
/// differencing crosses the table knots.
///
/// Validation requires at least two knots with strictly increasing `t`,
/// finite entries, `r > 0`, `θ ∈ (0, π)`, and tabulated derivatives
/// consistent with divided differences of the values (guarding against
/// mislabeled or shuffled columns).
pub fn revolution_patch(
    ambient: ModelManifold,
    samples: Vec<CurveSample>,
    v_range: [f64; 2],
) -> Result<ImmersedPatch> {
    if samples.len() < 2 {
        return Err(Error::invalid(format!(
            "revolution patch needs at least 2 curve samples, got {}",
            samples.len()
        )));
    }
    for s in &samples {
        let fields = [s.t, s.r, s.dr, s.d2r, s.theta, s.dtheta, s.d2theta];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("curve samples must be finite"));
        }
        if !(s.r > 0.0) {
            return Err(Error::invalid(format!(
                "curve radius must be positive, got r = {} at t = {}",
                s.r, s.t
            )));
        }
        if !(s.theta > 0.0 && s.theta < PI) {
            return Err(Error::invalid(format!(
                "curve colatitude must lie in (0, π), got θ = {} at t = {}",
                s.theta, s.t
            )));
        }
    }
    for w in samples.windows(2) {
        let h = w[1].t - w[0].t;
        if !(h > 0.0) {
            return Err(Error::invalid(
                "curve parameters must be strictly increasing",
            ));
        }
        // Divided-difference guard: for smooth data the secant equals the
        // mean endpoint slope up to h²·f'''/12, proxied by the spread of
        // the tabulated second derivatives.
        for (label, f, df, d2f) in [
            ("r", [w[0].r, w[1].r], [w[0].dr, w[1].dr], [w[0].d2r, w[1].d2r]),
            (
                "theta",
                [w[0].theta, w[1].theta],
                [w[0].dtheta, w[1].dtheta],
                [w[0].d2theta, w[1].d2theta],
            ),
        ] {
            let secant = (f[1] - f[0]) / h;
            let mean_slope = 0.5 * (df[0] + df[1]);
            let scale = f[0].abs().max(f[1].abs()).max(1.0);
            let tol = 1e-6 * scale + 0.25 * h * (d2f[0].abs() + d2f[1].abs());
            if (secant - mean_slope).abs() > tol {
                return Err(Error::invalid(format!(
                    "curve column {label} is not consistent with its tabulated \
                     derivative near t = {}: secant {secant:.6e} vs mean slope \
                     {mean_slope:.6e}",
                    w[0].t
                )));
            }
        }
    }
    let domain = [[samples[0].t, samples[samples.len() - 1].t], v_range];
    let table = std::sync::Arc::new(samples);
    let (t_map, t_first, t_second) = (table.clone(), table.clone(), table);
    let map: PatchMap = Box::new(move |u, v| {
        let r = curve_jet(&t_map, u, |s| (s.r, s.dr, s.d2r));
        let th = curve_jet(&t_map, u, |s| (s.theta, s.dtheta, s.d2theta));
        [r[0], th[0], v]
    });
    let jets = PatchJets {
        first: Box::new(move |u, _| {
            let r = curve_jet(&t_first, u, |s| (s.r, s.dr, s.d2r));
            let th = curve_jet(&t_first, u, |s| (s.theta, s.dtheta, s.d2theta));
            [[r[1], th[1], 0.0], [0.0, 0.0, 1.0]]
        }),
        second: Box::new(move |u, _| {
            let r = curve_jet(&t_second, u, |s| (s.r, s.dr, s.d2r));
            let th = curve_jet(&t_second, u, |s| (s.theta, s.dtheta, s.d2theta));
            [[r[2], th[2], 0.0], [0.0; 3], [0.0; 3]]
        }),
    };
    Ok(ImmersedPatch::new(ambient, map, domain)?.with_exact_jets(jets))
}
