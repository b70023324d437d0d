//! Adaptive Cash–Karp Runge–Kutta (order 4/5) with dense output.
//!
//! The integrator stores every accepted step together with its derivative,
//! so solutions can later be sampled anywhere by cubic Hermite
//! interpolation — the Khas'minskii machinery needs this to locate level
//! crossings of monotone test functions.  A user-supplied *guard* predicate
//! stops the integration early (used to detect finite-radius blow-up of
//! unbounded test functions without overflowing).

use crate::error::{Error, Result};

/// How an integration ended.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeStatus {
    /// Reached `t_end`.
    Completed,
    /// The guard predicate fired (or the state became non-finite) at `t`.
    GuardTriggered {
        /// Time of the last accepted step before the guard fired.
        t: f64,
    },
}

/// Dense solution record of one integration.
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    /// Times of accepted steps, strictly increasing, starting at `t0`.
    pub ts: Vec<f64>,
    /// States at the accepted steps.
    pub ys: Vec<[f64; N]>,
    /// Derivatives `f(t, y)` at the accepted steps.
    pub dys: Vec<[f64; N]>,
    /// Termination status.
    pub status: OdeStatus,
}

impl<const N: usize> OdeSolution<N> {
    /// Final stored time.
    pub fn last_t(&self) -> f64 {
        *self.ts.last().expect("solution stores at least the seed point")
    }

    /// Final stored state.
    pub fn last_y(&self) -> [f64; N] {
        *self.ys.last().expect("solution stores at least the seed point")
    }

    /// Samples the solution at `t` by cubic Hermite interpolation on the
    /// bracketing accepted step; clamps to the stored range.
    pub fn sample(&self, t: f64) -> [f64; N] {
        let ts = &self.ts;
        if t <= ts[0] {
            return self.ys[0];
        }
        if t >= *ts.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        let hi = ts.partition_point(|&s| s <= t);
        let lo = hi - 1;
        let h = ts[hi] - ts[lo];
        let s = (t - ts[lo]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * self.ys[lo][i]
                + h10 * h * self.dys[lo][i]
                + h01 * self.ys[hi][i]
                + h11 * h * self.dys[hi][i];
        }
        out
    }
}

/// Tuning knobs for [`integrate_rk45`].
#[derive(Debug, Clone)]
pub struct Rk45Options {
    /// Relative tolerance per step.
    pub rtol: f64,
    /// Absolute tolerance per step.
    pub atol: f64,
    /// Optional cap on the step size (improves dense-output resolution).
    pub h_max: Option<f64>,
    /// Optional thinning of the dense output: accepted steps closer than
    /// this to the previously stored one are not stored (the final state
    /// always is).  Keeps memory bounded on stiff problems that need
    /// millions of steps.
    pub min_store_dt: Option<f64>,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for Rk45Options {
    fn default() -> Self {
        Rk45Options {
            rtol: 1e-9,
            atol: 1e-12,
            h_max: None,
            min_store_dt: None,
            max_steps: 2_000_000,
        }
    }
}

// Cash–Karp tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 3.0 / 10.0;
const A42: f64 = -9.0 / 10.0;
const A43: f64 = 6.0 / 5.0;
const A51: f64 = -11.0 / 54.0;
const A52: f64 = 5.0 / 2.0;
const A53: f64 = -70.0 / 27.0;
const A54: f64 = 35.0 / 27.0;
const A61: f64 = 1631.0 / 55296.0;
const A62: f64 = 175.0 / 512.0;
const A63: f64 = 575.0 / 13824.0;
const A64: f64 = 44275.0 / 110592.0;
const A65: f64 = 253.0 / 4096.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 3.0 / 5.0;
const C5: f64 = 1.0;
const C6: f64 = 7.0 / 8.0;
// 5th-order weights.
const B1: f64 = 37.0 / 378.0;
const B3: f64 = 250.0 / 621.0;
const B4: f64 = 125.0 / 594.0;
const B6: f64 = 512.0 / 1771.0;
// Difference between 5th- and 4th-order weights (error estimator).
const E1: f64 = B1 - 2825.0 / 27648.0;
const E3: f64 = B3 - 18575.0 / 48384.0;
const E4: f64 = B4 - 13525.0 / 55296.0;
const E5: f64 = -277.0 / 14336.0;
const E6: f64 = B6 - 1.0 / 4.0;

/// Integrates `y' = f(t, y)` from `(t0, y0)` to `t_end > t0`.
///
/// `guard(t, y)` is evaluated on every accepted state; returning `true`
/// stops the integration with [`OdeStatus::GuardTriggered`] (the offending
/// state is *not* stored).  Non-finite states trigger the guard implicitly.
pub fn integrate_rk45<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Rk45Options,
    guard: &dyn Fn(f64, &[f64; N]) -> bool,
) -> Result<OdeSolution<N>> {
    if !(t_end > t0) {
        return Err(Error::invalid(format!(
            "integration interval [{t0}, {t_end}] must have positive length"
        )));
    }
    let mut sol = OdeSolution {
        ts: vec![t0],
        ys: vec![y0],
        dys: vec![f(t0, &y0)],
        status: OdeStatus::Completed,
    };
    let span = t_end - t0;
    let mut h = (1e-4 * span).min(opts.h_max.unwrap_or(f64::INFINITY));
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sol.dys[0];

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(sol);
        }
        h = h.min(t_end - t).min(opts.h_max.unwrap_or(f64::INFINITY));

        let stage = |y: &[f64; N], coeffs: &[(f64, &[f64; N])]| -> [f64; N] {
            let mut out = *y;
            for i in 0..N {
                for (a, k) in coeffs {
                    out[i] += h * a * k[i];
                }
            }
            out
        };

        let y2 = stage(&y, &[(A21, &k1)]);
        let k2 = f(t + C2 * h, &y2);
        let y3 = stage(&y, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(t + C3 * h, &y3);
        let y4 = stage(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(t + C4 * h, &y4);
        let y5 = stage(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(t + C5 * h, &y5);
        let y6 = stage(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = f(t + C6 * h, &y6);

        let mut y_next = [0.0; N];
        let mut err_norm: f64 = 0.0;
        let mut finite = true;
        for i in 0..N {
            let dy = h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B6 * k6[i]);
            y_next[i] = y[i] + dy;
            let err =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_next[i].abs());
            err_norm = err_norm.max((err / scale).abs());
            finite &= y_next[i].is_finite();
        }

        if !finite || (err_norm <= 1.0 && guard(t + h, &y_next)) {
            if *sol.ts.last().unwrap() < t {
                sol.ts.push(t);
                sol.ys.push(y);
                sol.dys.push(k1);
            }
            sol.status = OdeStatus::GuardTriggered { t };
            return Ok(sol);
        }

        if err_norm <= 1.0 {
            t += h;
            y = y_next;
            k1 = f(t, &y);
            let due = match opts.min_store_dt {
                Some(dt) => t - *sol.ts.last().unwrap() >= dt || t >= t_end,
                None => true,
            };
            if due {
                sol.ts.push(t);
                sol.ys.push(y);
                sol.dys.push(k1);
            }
            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * err_norm.powf(-0.25)).clamp(0.1, 1.0);
            if h < 1e-14 * span {
                return Err(Error::numerical(format!(
                    "step size underflow at t = {t} (effectively singular right-hand side)"
                )));
            }
        }
    }
    Err(Error::numerical(format!(
        "integrator exceeded {} steps before reaching t = {t_end}",
        opts.max_steps
    )))
}
