//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves the tridiagonal system with sub-diagonal `lower` (length `n-1`),
/// diagonal `diag` (length `n`), super-diagonal `upper` (length `n-1`), and
/// right-hand side `rhs` (length `n`).
///
/// The exterior-problem matrices this crate produces are irreducibly
/// diagonally dominant M-matrices, for which the Thomas algorithm is
/// backward stable without pivoting; a zero pivot is reported as an error
/// rather than a panic.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::invalid("tridiagonal system is empty"));
    }
    if lower.len() != n - 1 || upper.len() != n - 1 || rhs.len() != n {
        return Err(Error::invalid(format!(
            "tridiagonal shape mismatch: diag {n}, lower {}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }

    let mut c = vec![0.0; n - 1];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::numerical("zero or non-finite pivot in row 0"));
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::numerical(format!(
                "zero or non-finite pivot in row {i}"
            )));
        }
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
