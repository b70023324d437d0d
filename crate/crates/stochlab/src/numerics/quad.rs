//! Adaptive Simpson quadrature.
//!
//! All integrands in this crate are smooth on the (finite) windows they are
//! integrated over — improper integrals are handled at a higher level by
//! windowing ([`crate::verdicts`]) — so classical adaptive Simpson with a
//! Richardson error estimate is a good fit.

use crate::error::{Error, Result};

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns an error if the recursion must descend deeper than 60 levels
/// (which would mean the integrand is effectively singular on the window)
/// or if the integrand produces non-finite values.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!(
            "quadrature window [{a}, {b}] must be finite"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol.max(1e-300), 0)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    if !whole.is_finite() {
        return Err(Error::numerical(format!(
            "integrand produced non-finite values on [{a}, {b}]"
        )));
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        // Richardson extrapolation of the composite estimate.
        return Ok(left + right + delta / 15.0);
    }
    if depth >= 60 {
        return Err(Error::numerical(format!(
            "adaptive quadrature failed to converge near [{a}, {b}]"
        )));
    }
    let lv = adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let rv = adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(lv + rv)
}
