//! Warping profiles `σ` and rotationally symmetric model manifolds.
//!
//! A model manifold is `M_σ = [0, ∞) × S^{m-1}` with metric
//! `dr² + σ(r)² dθ²`, where the *warping profile* `σ` is smooth with
//! `σ(0) = 0`, `σ'(0) = 1`, and `σ > 0` for `r > 0`.  Everything the
//! laboratory measures — Laplacian drift `(m-1) σ'/σ`, boundary area
//! `ω_{m-1} σ^{m-1}`, radial curvature `-σ''/σ` — is derived from `σ`.
//!
//! Profiles with super-exponential growth (`σ ~ r e^{a r^p}`) or decay
//! (`σ ~ e^{-a r^p}`) overflow `f64` long before the radii of interest, so
//! every kind exposes `log σ`, `σ'/σ` and `(σ'/σ)'` in closed form; all
//! solvers consume those stable quantities.  The plain `σ`, `σ'`, `σ''`
//! values are also available and may legitimately round to `0` or `±∞` far
//! out — only the logarithmic interface is meant for large radii.
//!
//! Growing kinds that differ from `r` near the origin are joined to the
//! Euclidean profile by a C² quintic smoothstep on `[r₀/2, r₀]`, keeping
//! the model-manifold boundary conditions exact while matching the target
//! profile exactly beyond `r₀`.

use crate::error::{Error, Result};
use crate::special::{coth, ln_sinh, unit_sphere_area};

/// One row of a tabulated profile: radius, `σ`, `σ'`, `σ''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub r: f64,
    pub sigma: f64,
    pub dsigma: f64,
    pub d2sigma: f64,
}

/// Value of `σ` and its first two derivatives at one radius, in both plain
/// and logarithmic form.
#[derive(Debug, Clone, Copy)]
pub struct SigmaJet {
    /// `σ(r)` (may overflow to `∞` or underflow to `0` for extreme kinds).
    pub sigma: f64,
    /// `σ'(r)` (same caveat).
    pub dsigma: f64,
    /// `σ''(r)` (same caveat).
    pub d2sigma: f64,
    /// `ln σ(r)`, computed analytically — never through `σ` itself.
    pub log_sigma: f64,
    /// `σ'/σ`, the logarithmic derivative.
    pub dlog_sigma: f64,
    /// `(σ'/σ)' = σ''/σ - (σ'/σ)²`.
    pub dlog_sigma_deriv: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    Euclidean,
    Hyperbolic { k: f64 },
    PolyExp { a: f64, p: f64, join: f64 },
    Cusp { a: f64, p: f64, join: f64 },
    Tabulated { samples: Vec<ProfileSample> },
}

/// A validated warping profile.
#[derive(Debug, Clone)]
pub struct WarpingProfile {
    kind: Kind,
}

/// Quintic smoothstep `w(t) = t³(10 - 15t + 6t²)` with `w(0)=w'(0)=w''(0)=0`
/// and `w(1)=1`, `w'(1)=w''(1)=0`; returns `(w, w', w'')`.
fn smoothstep5(t: f64) -> (f64, f64, f64) {
    let w = t * t * t * (10.0 + t * (6.0 * t - 15.0));
    let dw = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    let d2w = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (w, dw, d2w)
}

/// `csch x = 1/sinh x` for `x > 0`, stable for large `x`.
fn csch(x: f64) -> f64 {
    2.0 * (-x).exp() / (-f64::exp_m1(-2.0 * x))
}

impl WarpingProfile {
    /// The flat profile `σ(r) = r` (Euclidean space `ℝ^m`).
    pub fn euclidean() -> Self {
        WarpingProfile {
            kind: Kind::Euclidean,
        }
    }

    /// `σ(r) = sinh(kr)/k`, constant curvature `-k²` (hyperbolic space).
    pub fn hyperbolic(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "hyperbolic curvature scale k must be positive and finite, got {k}"
            )));
        }
        Ok(WarpingProfile {
            kind: Kind::Hyperbolic { k },
        })
    }

    /// Super-exponential growth `σ(r) = r e^{a r^p}` beyond the join radius
    /// (default `r₀ = 1`), joined to `r` near the origin.
    pub fn poly_exp(a: f64, p: f64) -> Result<Self> {
        Self::poly_exp_with_join(a, p, 1.0)
    }

    /// [`WarpingProfile::poly_exp`] with an explicit join radius.
    pub fn poly_exp_with_join(a: f64, p: f64, join: f64) -> Result<Self> {
        validate_power_params(a, p, join)?;
        Ok(WarpingProfile {
            kind: Kind::PolyExp { a, p, join },
        })
    }

    /// Super-exponential decay `σ(r) = e^{-a r^p}` beyond the join radius
    /// (default `r₀ = 1`), joined to `r` near the origin (a cusp-like end).
    pub fn cusp(a: f64, p: f64) -> Result<Self> {
        Self::cusp_with_join(a, p, 1.0)
    }

    /// [`WarpingProfile::cusp`] with an explicit join radius.
    pub fn cusp_with_join(a: f64, p: f64, join: f64) -> Result<Self> {
        validate_power_params(a, p, join)?;
        Ok(WarpingProfile {
            kind: Kind::Cusp { a, p, join },
        })
    }

    /// A profile given by samples of `(r, σ, σ', σ'')`, evaluated by cubic
    /// Hermite interpolation.
    ///
    /// Validation requires: radii strictly increasing starting at `0` with
    /// `σ(0) = 0`, `σ'(0) = 1`; `σ > 0` elsewhere; and the tabulated
    /// derivatives must be consistent with finite differences of the values
    /// to about `1e-4` relative accuracy (guarding against mislabeled or
    /// shuffled columns).
    pub fn tabulated(samples: Vec<ProfileSample>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InvalidProfile(format!(
                "tabulated profile needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        for s in &samples {
            if !(s.r.is_finite() && s.sigma.is_finite() && s.dsigma.is_finite() && s.d2sigma.is_finite()) {
                return Err(Error::InvalidProfile(
                    "tabulated profile contains non-finite entries".into(),
                ));
            }
        }
        if samples[0].r != 0.0 {
            return Err(Error::InvalidProfile(format!(
                "tabulated profile must start at r = 0, got {}",
                samples[0].r
            )));
        }
        if samples[0].sigma.abs() > 1e-12 || (samples[0].dsigma - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProfile(format!(
                "model-manifold boundary conditions need σ(0) = 0 and σ'(0) = 1, got σ(0) = {}, σ'(0) = {}",
                samples[0].sigma, samples[0].dsigma
            )));
        }
        for pair in samples.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if !(b.r > a.r) {
                return Err(Error::InvalidProfile(format!(
                    "tabulated radii must be strictly increasing, got {} then {}",
                    a.r, b.r
                )));
            }
            if b.sigma <= 0.0 {
                return Err(Error::InvalidProfile(format!(
                    "σ must be positive for r > 0, got σ({}) = {}",
                    b.r, b.sigma
                )));
            }
            // The centred difference differs from the mean derivative by
            // h²f'''(ξ)/12; estimate f''' from the next column so smooth
            // but strongly curved tables are not rejected.
            let h = b.r - a.r;
            let slope = (b.sigma - a.sigma) / h;
            let mean_d = 0.5 * (a.dsigma + b.dsigma);
            let truncation = 0.25 * h * (b.d2sigma - a.d2sigma).abs();
            if (slope - mean_d).abs() > 1e-4 * slope.abs().max(1.0) + truncation {
                return Err(Error::InvalidProfile(format!(
                    "tabulated σ' is inconsistent with σ near r = {}: finite difference {slope} vs tabulated mean {mean_d}",
                    a.r
                )));
            }
            let dslope = (b.dsigma - a.dsigma) / h;
            let mean_d2 = 0.5 * (a.d2sigma + b.d2sigma);
            // No σ''' column exists; fall back to the scale of σ'' itself.
            let trunc2 = 0.15 * h * (a.d2sigma.abs() + b.d2sigma.abs() + 1.0);
            if (dslope - mean_d2).abs() > 1e-4 * dslope.abs().max(1.0) + trunc2 {
                return Err(Error::InvalidProfile(format!(
                    "tabulated σ'' is inconsistent with σ' near r = {}: finite difference {dslope} vs tabulated mean {mean_d2}",
                    a.r
                )));
            }
        }
        Ok(WarpingProfile {
            kind: Kind::Tabulated { samples },
        })
    }

    /// Largest radius this profile can be evaluated at (`None` if unbounded).
    pub fn max_radius(&self) -> Option<f64> {
        match &self.kind {
            Kind::Tabulated { samples } => Some(samples.last().unwrap().r),
            _ => None,
        }
    }

    /// `σ` and its first two derivatives at `r ≥ 0`, plain and logarithmic.
    ///
    /// At `r = 0` the logarithmic fields are `-∞`/`+∞` as dictated by
    /// `σ(0) = 0`.  Tabulated profiles panic beyond their last sample —
    /// check [`WarpingProfile::max_radius`] first.
    pub fn jet(&self, r: f64) -> SigmaJet {
        assert!(
            r >= 0.0 && r.is_finite(),
            "profile evaluated at invalid radius {r}"
        );
        match &self.kind {
            Kind::Euclidean => euclidean_jet(r),
            Kind::Hyperbolic { k } => {
                if r == 0.0 {
                    return SigmaJet {
                        sigma: 0.0,
                        dsigma: 1.0,
                        d2sigma: 0.0,
                        log_sigma: f64::NEG_INFINITY,
                        dlog_sigma: f64::INFINITY,
                        dlog_sigma_deriv: f64::NEG_INFINITY,
                    };
                }
                let x = k * r;
                let cs = csch(x);
                SigmaJet {
                    sigma: x.sinh() / k,
                    dsigma: x.cosh(),
                    d2sigma: k * x.sinh(),
                    log_sigma: ln_sinh(x) - k.ln(),
                    dlog_sigma: k * coth(x),
                    dlog_sigma_deriv: -k * k * cs * cs,
                }
            }
            Kind::PolyExp { a, p, join } => {
                power_kind_jet(r, *join, &poly_exp_tail(*a, *p), &|r| {
                    let rp = r.powf(*p);
                    (
                        r.ln() + a * rp,
                        1.0 / r + a * p * rp / r,
                        -1.0 / (r * r) + a * p * (p - 1.0) * rp / (r * r),
                    )
                })
            }
            Kind::Cusp { a, p, join } => power_kind_jet(r, *join, &cusp_tail(*a, *p), &|r| {
                let rp = r.powf(*p);
                (
                    -a * rp,
                    -a * p * rp / r,
                    -a * p * (p - 1.0) * rp / (r * r),
                )
            }),
            Kind::Tabulated { samples } => tabulated_jet(samples, r),
        }
    }

    /// `σ(r)`.
    pub fn sigma(&self, r: f64) -> f64 {
        self.jet(r).sigma
    }

    /// `σ'(r)`.
    pub fn dsigma(&self, r: f64) -> f64 {
        self.jet(r).dsigma
    }

    /// `ln σ(r)`, stable for all kinds.
    pub fn log_sigma(&self, r: f64) -> f64 {
        self.jet(r).log_sigma
    }

    /// `σ'/σ`, stable for all kinds.
    pub fn dlog_sigma(&self, r: f64) -> f64 {
        self.jet(r).dlog_sigma
    }

    /// Radial sectional curvature `K(r) = -σ''/σ = -((σ'/σ)' + (σ'/σ)²)`.
    pub fn radial_curvature(&self, r: f64) -> f64 {
        let jet = self.jet(r);
        -(jet.dlog_sigma_deriv + jet.dlog_sigma * jet.dlog_sigma)
    }

    /// Whether the model has nonpositive radial curvature everywhere
    /// (`σ'' ≥ -1e-12` on a dense sample), i.e. is a Cartan–Hadamard model.
    ///
    /// Euclidean and hyperbolic kinds are convex in closed form; power-law
    /// kinds are checked on their join window (their tails are convex
    /// analytically for growth, never for decay); tabulated kinds use the
    /// tabulated `σ''`.
    pub fn is_cartan_hadamard(&self) -> bool {
        const TOL: f64 = -1e-12;
        match &self.kind {
            Kind::Euclidean | Kind::Hyperbolic { .. } => true,
            Kind::PolyExp { join, .. } => {
                // Tail σ'' = σ (dlog' + dlog²) > 0 for a, p > 0; only the
                // blend window can dip.
                (0..=2048)
                    .map(|i| join * 0.5 + join * 0.5 * (i as f64) / 2048.0)
                    .all(|r| self.jet(r).d2sigma >= TOL)
            }
            // A decaying end forces σ'' < 0 somewhere between slope 1 at the
            // origin and negative slope in the tail.
            Kind::Cusp { .. } => false,
            Kind::Tabulated { samples } => samples.iter().all(|s| s.d2sigma >= TOL),
        }
    }
}

fn validate_power_params(a: f64, p: f64, join: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidProfile(format!(
            "amplitude a must be positive and finite, got {a}"
        )));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidProfile(format!(
            "exponent p must be at least 1, got {p}"
        )));
    }
    if !(join > 0.0) || !join.is_finite() {
        return Err(Error::InvalidProfile(format!(
            "join radius must be positive and finite, got {join}"
        )));
    }
    Ok(())
}

fn euclidean_jet(r: f64) -> SigmaJet {
    SigmaJet {
        sigma: r,
        dsigma: 1.0,
        d2sigma: 0.0,
        log_sigma: r.ln(),
        dlog_sigma: 1.0 / r,
        dlog_sigma_deriv: -1.0 / (r * r),
    }
}

/// Tail value and first two derivatives of `r e^{a r^p}`.
fn poly_exp_tail(a: f64, p: f64) -> impl Fn(f64) -> (f64, f64, f64) {
    move |r: f64| {
        let rp = r.powf(p);
        let e = (a * rp).exp();
        let v = r * e;
        let d = e * (1.0 + a * p * rp);
        let d2 = e * a * p * rp / r * (1.0 + p + a * p * rp);
        (v, d, d2)
    }
}

/// Tail value and first two derivatives of `e^{-a r^p}`.
fn cusp_tail(a: f64, p: f64) -> impl Fn(f64) -> (f64, f64, f64) {
    move |r: f64| {
        let rp = r.powf(p);
        let e = (-a * rp).exp();
        let apr = a * p * rp / r;
        (e, -apr * e, e * (apr * apr - a * p * (p - 1.0) * rp / (r * r)))
    }
}

/// Jet for the joined kinds: Euclidean below `join/2`, quintic blend on
/// `[join/2, join]`, analytic tail beyond.  `log_tail` returns
/// `(ln σ, σ'/σ, (σ'/σ)')` for the tail region.
fn power_kind_jet(
    r: f64,
    join: f64,
    tail: &dyn Fn(f64) -> (f64, f64, f64),
    log_tail: &dyn Fn(f64) -> (f64, f64, f64),
) -> SigmaJet {
    let half = 0.5 * join;
    if r <= half {
        if r == 0.0 {
            return SigmaJet {
                sigma: 0.0,
                dsigma: 1.0,
                d2sigma: 0.0,
                log_sigma: f64::NEG_INFINITY,
                dlog_sigma: f64::INFINITY,
                dlog_sigma_deriv: f64::NEG_INFINITY,
            };
        }
        return euclidean_jet(r);
    }
    if r < join {
        let dt = 1.0 / half;
        let t = (r - half) * dt;
        let (w, dw, d2w) = smoothstep5(t);
        let (tv, td, td2) = tail(r);
        let sigma = (1.0 - w) * r + w * tv;
        let dsigma = (1.0 - w) + w * td + dw * dt * (tv - r);
        let d2sigma =
            w * td2 + 2.0 * dw * dt * (td - 1.0) + d2w * dt * dt * (tv - r);
        let dlog = dsigma / sigma;
        return SigmaJet {
            sigma,
            dsigma,
            d2sigma,
            log_sigma: sigma.ln(),
            dlog_sigma: dlog,
            dlog_sigma_deriv: d2sigma / sigma - dlog * dlog,
        };
    }
    let (log_sigma, dlog_sigma, dlog_sigma_deriv) = log_tail(r);
    // Plain values from the stable logarithmic ones; far out these can
    // round to 0 or ±∞, which is fine for the plain interface.
    let sigma = log_sigma.exp();
    SigmaJet {
        sigma,
        dsigma: sigma * dlog_sigma,
        d2sigma: sigma * (dlog_sigma_deriv + dlog_sigma * dlog_sigma),
        log_sigma,
        dlog_sigma,
        dlog_sigma_deriv,
    }
}

fn tabulated_jet(samples: &[ProfileSample], r: f64) -> SigmaJet {
    let last = samples.last().unwrap();
    assert!(
        r <= last.r * (1.0 + 1e-9),
        "tabulated profile evaluated at r = {r} beyond its last sample r = {}",
        last.r
    );
    let r = r.min(last.r);
    if r == 0.0 {
        return SigmaJet {
            sigma: 0.0,
            dsigma: 1.0,
            d2sigma: samples[0].d2sigma,
            log_sigma: f64::NEG_INFINITY,
            dlog_sigma: f64::INFINITY,
            dlog_sigma_deriv: f64::NEG_INFINITY,
        };
    }
    let hi = samples.partition_point(|s| s.r <= r).min(samples.len() - 1);
    let lo = hi - 1;
    let (a, b) = (&samples[lo], &samples[hi]);
    let h = b.r - a.r;
    let t = (r - a.r) / h;
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = (3.0 * t2 - 4.0 * t + 1.0) / h;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = (3.0 * t2 - 2.0 * t) / h;

    let sigma = h00 * a.sigma + h10 * h * a.dsigma + h01 * b.sigma + h11 * h * b.dsigma;
    let dsigma = dh00 * a.sigma + dh10 * h * a.dsigma + dh01 * b.sigma + dh11 * h * b.dsigma;
    // σ'' from the Hermite interpolant of (σ', σ'').
    let d2sigma =
        dh00 * a.dsigma + dh10 * h * a.d2sigma + dh01 * b.dsigma + dh11 * h * b.d2sigma;
    let dlog = dsigma / sigma;
    SigmaJet {
        sigma,
        dsigma,
        d2sigma,
        log_sigma: sigma.ln(),
        dlog_sigma: dlog,
        dlog_sigma_deriv: d2sigma / sigma - dlog * dlog,
    }
}

/// A model manifold: a warping profile together with a dimension `m ≥ 2`.
///
/// The weighted radial measure is `S(r) = σ(r)^{m-1}` (boundary area up to
/// the constant `ω_{m-1}`), and the radial part of the Laplace–Beltrami
/// operator is `Δf = f'' + (m-1)(σ'/σ) f'`.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    profile: WarpingProfile,
    dimension: usize,
}

impl ModelManifold {
    pub fn new(profile: WarpingProfile, dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::invalid(format!(
                "model manifold dimension must be at least 2, got {dimension}"
            )));
        }
        Ok(ModelManifold { profile, dimension })
    }

    pub fn profile(&self) -> &WarpingProfile {
        &self.profile
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `ln S(r) = (m-1) ln σ(r)`.
    pub fn log_s(&self, r: f64) -> f64 {
        (self.dimension as f64 - 1.0) * self.profile.log_sigma(r)
    }

    /// Radial drift `b(r) = (m-1) σ'/σ = (ln S)'`.
    pub fn drift(&self, r: f64) -> f64 {
        (self.dimension as f64 - 1.0) * self.profile.dlog_sigma(r)
    }

    /// Derivative of the drift, `(m-1)(σ'/σ)'`.
    pub fn drift_deriv(&self, r: f64) -> f64 {
        (self.dimension as f64 - 1.0) * self.profile.jet(r).dlog_sigma_deriv
    }

    /// Boundary area of the geodesic sphere, `ω_{m-1} σ(r)^{m-1}`
    /// (may overflow; see [`ModelManifold::log_boundary_area`]).
    pub fn boundary_area(&self, r: f64) -> f64 {
        self.log_boundary_area(r).exp()
    }

    /// `ln(ω_{m-1} σ^{m-1})`, stable for all kinds.
    pub fn log_boundary_area(&self, r: f64) -> f64 {
        unit_sphere_area(self.dimension).ln() + self.log_s(r)
    }

    /// Volume of the geodesic ball of radius `r`, `ω_{m-1} ∫₀^r S(t) dt`,
    /// computed in factored form so that only a genuinely huge volume
    /// overflows to `∞`.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!(
                "ball volume needs r > 0, got {r}"
            )));
        }
        let peak = self.max_log_s_on(0.0, r);
        let integral = crate::numerics::integrate(
            &|t| {
                if t == 0.0 {
                    0.0
                } else {
                    (self.log_s(t) - peak).exp()
                }
            },
            0.0,
            r,
            1e-12 * r,
        )?;
        Ok(unit_sphere_area(self.dimension) * (peak.exp() * integral))
    }

    /// The stable volume-to-area ratio `V(r)/S(r)·(1/ω) = ∫₀^r e^{ln S(t) - ln S(r)} dt`.
    ///
    /// Stays finite for super-exponentially growing profiles where `V` and
    /// `S` separately overflow; genuinely divergent ratios (decaying `σ`)
    /// overflow to `∞`, which callers treat as divergence.
    pub fn volume_area_ratio(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!(
                "volume/area ratio needs r > 0, got {r}"
            )));
        }
        let peak = self.max_log_s_on(0.0, r);
        let integral = crate::numerics::integrate(
            &|t| {
                if t == 0.0 {
                    0.0
                } else {
                    (self.log_s(t) - peak).exp()
                }
            },
            0.0,
            r,
            1e-12 * r,
        )?;
        Ok((peak - self.log_s(r)).exp() * integral)
    }

    fn max_log_s_on(&self, lo: f64, hi: f64) -> f64 {
        let mut peak = f64::NEG_INFINITY;
        let n = 256;
        for i in 0..=n {
            let t = lo + (hi - lo) * (i as f64) / (n as f64);
            if t > 0.0 {
                peak = peak.max(self.log_s(t));
            }
        }
        peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_second_derivative(p: &WarpingProfile, r: f64, h: f64) -> f64 {
        (p.sigma(r + h) - 2.0 * p.sigma(r) + p.sigma(r - h)) / (h * h)
    }

    #[test]
    fn euclidean_profile_basics() {
        let p = WarpingProfile::euclidean();
        assert_eq!(p.sigma(2.0), 2.0);
        assert_eq!(p.dsigma(2.0), 1.0);
        assert!((p.dlog_sigma(3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(p.radial_curvature(1.5).abs() < 1e-15);
        assert!(p.is_cartan_hadamard());
        assert_eq!(p.sigma(0.0), 0.0);
    }

    #[test]
    fn hyperbolic_profile_matches_closed_forms() {
        let p = WarpingProfile::hyperbolic(1.0).unwrap();
        assert!((p.sigma(0.5) - 0.521_095_305_493_747).abs() < 1e-14);
        assert!((p.dsigma(0.5) - 1.127_625_965_206_381).abs() < 1e-14);
        assert!((p.dlog_sigma(1.0) - 1.0 / f64::tanh(1.0)).abs() < 1e-14);
        // Constant curvature -1, far beyond the overflow range of sinh.
        for r in [0.1, 1.0, 10.0, 500.0] {
            assert!(
                (p.radial_curvature(r) + 1.0).abs() < 1e-11,
                "K({r}) = {}",
                p.radial_curvature(r)
            );
        }
        assert!(p.is_cartan_hadamard());

        let p2 = WarpingProfile::hyperbolic(2.0).unwrap();
        assert!((p2.radial_curvature(3.0) + 4.0).abs() < 1e-11);
        assert!((p2.sigma(1.0) - f64::sinh(2.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn poly_exp_profile_blends_smoothly() {
        let p = WarpingProfile::poly_exp(1.0, 3.0).unwrap();
        // Euclidean below the half-join.
        assert_eq!(p.sigma(0.3), 0.3);
        assert_eq!(p.dsigma(0.3), 1.0);
        // Exact tail at and beyond the join.
        assert!((p.sigma(1.0) - std::f64::consts::E).abs() < 1e-14);
        let r: f64 = 1.7;
        let want = r * (r.powi(3)).exp();
        assert!((p.sigma(r) - want).abs() < 1e-12 * want);
        // C² across both seams: σ, σ', σ'' have matching one-sided limits.
        for seam in [0.5f64, 1.0] {
            let eps = 1e-9;
            let (l, r) = (p.jet(seam - eps), p.jet(seam + eps));
            // One-sided gaps are bounded by 2ε times the next derivative.
            assert!((l.sigma - r.sigma).abs() < 1e-8 * l.dsigma.abs().max(1.0));
            assert!((l.dsigma - r.dsigma).abs() < 1e-7 * l.d2sigma.abs().max(1.0));
            assert!((l.d2sigma - r.d2sigma).abs() < 1e-6 * l.d2sigma.abs().max(1.0));
        }
        // And the analytic σ'' matches finite differences inside each piece.
        for r in [0.3, 0.75, 0.9, 1.5] {
            let fd = fd_second_derivative(&p, r, 1e-5);
            let jet = p.jet(r);
            assert!(
                (fd - jet.d2sigma).abs() < 1e-4 * jet.d2sigma.abs().max(1.0),
                "σ'' mismatch at r = {r}: fd {fd} vs jet {}",
                jet.d2sigma
            );
        }
        // Convex everywhere (Cartan–Hadamard eligible).
        assert!(p.is_cartan_hadamard());
        // Radial curvature beyond the join: K = -(12r + 9r⁴) for a=1, p=3.
        let k2 = p.radial_curvature(2.0);
        assert!((k2 + 168.0).abs() < 1e-9 * 168.0, "K(2) = {k2}");
    }

    #[test]
    fn poly_exp_log_interface_survives_overflow() {
        let p = WarpingProfile::poly_exp(1.0, 3.0).unwrap();
        // σ(15) = 15 e^3375 overflows f64; the log interface must not.
        assert!(p.sigma(15.0).is_infinite());
        let want_log = 15f64.ln() + 3375.0;
        assert!((p.log_sigma(15.0) - want_log).abs() < 1e-10 * want_log);
        let want_dlog = 1.0 / 15.0 + 3.0 * 225.0;
        assert!((p.dlog_sigma(15.0) - want_dlog).abs() < 1e-12 * want_dlog);
    }

    #[test]
    fn cusp_profile_decays_and_is_not_cartan_hadamard() {
        let p = WarpingProfile::cusp(1.0, 3.0).unwrap();
        assert_eq!(p.sigma(0.25), 0.25);
        let want = (-8.0f64).exp();
        assert!((p.sigma(2.0) - want).abs() < 1e-15);
        assert!((p.dlog_sigma(2.0) + 12.0).abs() < 1e-12);
        assert!(!p.is_cartan_hadamard());
        // Deep tail: σ underflows but log stays exact.
        assert!((p.log_sigma(50.0) + 125_000.0).abs() < 1e-9);
        // C² across seams and FD agreement inside the blend window.
        for seam in [0.5f64, 1.0] {
            let eps = 1e-9;
            let (l, r) = (p.jet(seam - eps), p.jet(seam + eps));
            // One-sided gaps are bounded by 2ε times the next derivative.
            assert!((l.sigma - r.sigma).abs() < 1e-8 * l.dsigma.abs().max(1.0));
            assert!((l.dsigma - r.dsigma).abs() < 1e-7 * l.d2sigma.abs().max(1.0));
            assert!((l.d2sigma - r.d2sigma).abs() < 1e-6 * l.d2sigma.abs().max(1.0));
        }
        for r in [0.75, 1.4] {
            let fd = fd_second_derivative(&p, r, 1e-5);
            let jet = p.jet(r);
            assert!((fd - jet.d2sigma).abs() < 1e-4 * jet.d2sigma.abs().max(1.0));
        }
    }

    #[test]
    fn tabulated_profile_reproduces_hyperbolic_space() {
        let exact = WarpingProfile::hyperbolic(1.0).unwrap();
        let samples: Vec<ProfileSample> = (0..=100)
            .map(|i| {
                let r = 0.05 * i as f64;
                ProfileSample {
                    r,
                    sigma: r.sinh(),
                    dsigma: r.cosh(),
                    d2sigma: r.sinh(),
                }
            })
            .collect();
        let p = WarpingProfile::tabulated(samples).unwrap();
        for &r in &[0.123, 1.77, 3.21, 4.9] {
            assert!((p.sigma(r) - exact.sigma(r)).abs() < 1e-6 * exact.sigma(r));
            assert!((p.dlog_sigma(r) - exact.dlog_sigma(r)).abs() < 1e-5);
            assert!((p.radial_curvature(r) + 1.0).abs() < 1e-3);
        }
        assert!(p.is_cartan_hadamard());
        assert_eq!(p.max_radius(), Some(5.0));
    }

    #[test]
    fn tabulated_profile_rejects_bad_data() {
        let good: Vec<ProfileSample> = (0..=20)
            .map(|i| {
                let r = 0.1 * i as f64;
                ProfileSample {
                    r,
                    sigma: r.sinh(),
                    dsigma: r.cosh(),
                    d2sigma: r.sinh(),
                }
            })
            .collect();
        assert!(WarpingProfile::tabulated(good.clone()).is_ok());

        // Wrong boundary conditions.
        let mut bad = good.clone();
        bad[0].dsigma = 2.0;
        assert!(WarpingProfile::tabulated(bad).is_err());

        // Derivative column inconsistent with values.
        let mut bad = good.clone();
        bad[10].dsigma *= 1.5;
        assert!(WarpingProfile::tabulated(bad).is_err());

        // Negative σ.
        let mut bad = good.clone();
        bad[5].sigma = -0.1;
        assert!(WarpingProfile::tabulated(bad).is_err());

        // Non-monotone radii.
        let mut bad = good;
        bad[7].r = bad[6].r;
        assert!(WarpingProfile::tabulated(bad).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(WarpingProfile::hyperbolic(0.0).is_err());
        assert!(WarpingProfile::hyperbolic(-1.0).is_err());
        assert!(WarpingProfile::poly_exp(0.0, 3.0).is_err());
        assert!(WarpingProfile::poly_exp(1.0, 0.5).is_err());
        assert!(WarpingProfile::poly_exp_with_join(1.0, 3.0, -1.0).is_err());
        assert!(WarpingProfile::cusp(f64::NAN, 3.0).is_err());
    }

    #[test]
    fn model_manifold_drift_and_measures() {
        // ℝ³: drift 2/r, sphere area 4πr², ball volume 4πr³/3.
        let m = ModelManifold::new(WarpingProfile::euclidean(), 3).unwrap();
        assert!((m.drift(2.0) - 1.0).abs() < 1e-15);
        let area = m.boundary_area(2.0);
        assert!((area - 16.0 * std::f64::consts::PI).abs() < 1e-12);
        let vol = m.ball_volume(2.0).unwrap();
        assert!((vol - 32.0 * std::f64::consts::PI / 3.0).abs() < 1e-9);
        // V/S in factored form: r/3 for ℝ³.
        let ratio = m.volume_area_ratio(2.0).unwrap();
        assert!((ratio - 2.0 / 3.0).abs() < 1e-9);

        // ℍ² (m = 2, k = 1): area 2π sinh r, volume 2π (cosh r - 1).
        let h = ModelManifold::new(WarpingProfile::hyperbolic(1.0).unwrap(), 2).unwrap();
        assert!((h.boundary_area(1.0) - 7.384_006_872_882_65).abs() < 1e-10);
        assert!((h.ball_volume(1.0).unwrap() - 3.412_276_265_284_90).abs() < 1e-8);

        assert!(ModelManifold::new(WarpingProfile::euclidean(), 1).is_err());
    }

    #[test]
    fn volume_area_ratio_is_stable_in_extreme_regimes() {
        // PolyExp: V and S overflow separately beyond r ≈ 9, but V/S → 0.
        let m = ModelManifold::new(WarpingProfile::poly_exp(1.0, 3.0).unwrap(), 2).unwrap();
        let ratio = m.volume_area_ratio(12.0).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
        // The tail dominates: V/S ≈ 1/(ln S)'(r) = 1/(1/r + 3r²) for m = 2.
        let expect = 1.0 / (1.0 / 12.0 + 3.0 * 144.0);
        assert!(
            (ratio - expect).abs() < 0.05 * expect,
            "ratio {ratio} vs asymptotic {expect}"
        );

        // Cusp: S(r) → 0 so V/S explodes to ∞ — reported as ∞, not an error.
        let c = ModelManifold::new(WarpingProfile::cusp(1.0, 3.0).unwrap(), 2).unwrap();
        let ratio = c.volume_area_ratio(12.0).unwrap();
        assert!(ratio.is_infinite() && ratio > 0.0);
    }

    #[test]
    fn higher_dimensional_drift_scales_linearly() {
        let p = WarpingProfile::hyperbolic(1.0).unwrap();
        let m3 = ModelManifold::new(p.clone(), 3).unwrap();
        let m7 = ModelManifold::new(p, 7).unwrap();
        let r = 1.3;
        assert!((m7.drift(r) / m3.drift(r) - 3.0).abs() < 1e-14);
    }
}
