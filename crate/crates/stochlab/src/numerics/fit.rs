//! Ordinary least squares for a straight line.

use crate::error::{Error, Result};

/// Fits `y ≈ slope · x + intercept` by least squares and returns
/// `(slope, intercept)`.
///
/// Used to read off asymptotic exponents: the slope of `ln I` against
/// `ln w` across integration windows, or of `ln γ` against `r` for
/// exponentially growing test functions.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(
            "linear_fit requires equally many abscissae and ordinates",
        ));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("linear_fit requires at least two points"));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("linear_fit abscissae are all identical"));
    }
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}
