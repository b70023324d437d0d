//! Dense linear algebra: LU with partial pivoting, the scaling-and-squaring
//! matrix exponential (degree-13 Padé), and preconditioned conjugate
//! gradients for symmetric positive definite systems.

use ndarray::Array2;

use crate::error::{Error, Result};

/// LU factorisation `PA = LU` with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Array2<f64>,
    piv: Vec<usize>,
}

impl LuFactors {
    /// Factors a square matrix; fails on non-square input or a pivot below
    /// `1e-300` (numerically singular).
    pub fn new(a: &Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::invalid(format!(
                "LU requires a square matrix, got {}×{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !best.is_finite() || best < 1e-300 {
                return Err(Error::numerical(format!(
                    "matrix is numerically singular at elimination step {k}"
                )));
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= m * lu[(k, j)];
                    }
                }
            }
        }
        Ok(LuFactors { lu, piv })
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &Array2<f64>) -> Result<Array2<f64>> {
        let n = self.lu.nrows();
        if b.nrows() != n {
            return Err(Error::invalid(format!(
                "right-hand side has {} rows, expected {n}",
                b.nrows()
            )));
        }
        let mut x = b.clone();
        // Apply row interchanges.
        for (k, &p) in self.piv.iter().enumerate() {
            if p != k {
                for j in 0..x.ncols() {
                    let tmp = x[(k, j)];
                    x[(k, j)] = x[(p, j)];
                    x[(p, j)] = tmp;
                }
            }
        }
        // Forward substitution (L has unit diagonal).
        for k in 0..n {
            for i in k + 1..n {
                let m = self.lu[(i, k)];
                if m != 0.0 {
                    for j in 0..x.ncols() {
                        x[(i, j)] -= m * x[(k, j)];
                    }
                }
            }
        }
        // Backward substitution.
        for k in (0..n).rev() {
            let d = self.lu[(k, k)];
            for j in 0..x.ncols() {
                x[(k, j)] /= d;
            }
            for i in 0..k {
                let m = self.lu[(i, k)];
                if m != 0.0 {
                    for j in 0..x.ncols() {
                        x[(i, j)] -= m * x[(k, j)];
                    }
                }
            }
        }
        Ok(x)
    }
}

/// One-shot `A X = B` solve.
pub fn lu_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    LuFactors::new(a)?.solve_matrix(b)
}

/// Maximum absolute column sum (the induced 1-norm).
fn norm_1(a: &Array2<f64>) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..a.ncols() {
        let mut s = 0.0;
        for i in 0..a.nrows() {
            s += a[(i, j)].abs();
        }
        best = best.max(s);
    }
    best
}

// Degree-13 Padé coefficients for the matrix exponential.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA_13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
///
/// Backward stable for the (essentially normal) symmetrised graph
/// generators used in this crate; independent cross-checks against scaled
/// Taylor series live in the graph test suite.
pub fn expm(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid(format!(
            "expm requires a square matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("expm input contains non-finite entries"));
    }
    let norm = norm_1(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s as i32);

    let ident = Array2::<f64>::eye(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b = &PADE13;

    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_poly = a6.dot(&u_inner) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = scaled.dot(&u_poly);
    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = a6.dot(&v_inner) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];

    let mut r = lu_solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Jacobi-preconditioned conjugate gradients for `A x = b` with `A`
/// symmetric positive definite, supplied matrix-free through `apply`.
///
/// `inv_diag` holds the reciprocals of the diagonal of `A`.  Converges when
/// the 2-norm of the residual falls below `tol · ‖b‖₂`.
pub fn pcg(
    apply: &dyn Fn(&[f64], &mut [f64]),
    inv_diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    if inv_diag.len() != n {
        return Err(Error::invalid("preconditioner length mismatch"));
    }
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let p_ap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if p_ap <= 0.0 || !p_ap.is_finite() {
            return Err(Error::numerical(
                "conjugate gradients: matrix is not positive definite",
            ));
        }
        let alpha = rz / p_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let norm_r = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_r <= tol * norm_b {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::numerical(format!(
        "conjugate gradients did not converge in {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn lu_solves_known_system() {
        let a = array![[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]];
        let b = array![[8.0], [-11.0], [-3.0]];
        let x = lu_solve(&a, &b).unwrap();
        let expect = [2.0, 3.0, -1.0];
        for i in 0..3 {
            assert!((x[(i, 0)] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular_matrix() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        let b = array![[1.0], [2.0]];
        assert!(lu_solve(&a, &b).is_err());
    }

    #[test]
    fn expm_of_diagonal_is_elementwise() {
        let a = array![[1.0, 0.0], [0.0, -2.0]];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-2f64).exp()).abs() < 1e-15);
        assert!(e[(0, 1)].abs() < 1e-16 && e[(1, 0)].abs() < 1e-16);
    }

    #[test]
    fn expm_of_nilpotent_matrix() {
        let a = array![[0.0, 1.0], [0.0, 0.0]];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((e[(0, 1)] - 1.0).abs() < 1e-15);
        assert!(e[(1, 0)].abs() < 1e-15);
        assert!((e[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expm_of_rotation_generator_uses_scaling_path() {
        // ‖A‖₁ = 20 > θ₁₃ forces several squarings.
        let t = 20.0;
        let a = array![[0.0, -t], [t, 0.0]];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-12);
        assert!((e[(0, 1)] + t.sin()).abs() < 1e-12);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-12);
        assert!((e[(1, 1)] - t.cos()).abs() < 1e-12);
    }

    #[test]
    fn expm_inverse_identity() {
        let a = array![[0.3, 0.7, -0.2], [0.7, -0.5, 0.1], [-0.2, 0.1, 0.9]];
        let e = expm(&a).unwrap();
        let em = expm(&(-&a)).unwrap();
        let prod = e.dot(&em);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn pcg_matches_lu_on_spd_system() {
        let a = array![
            [4.0, 1.0, 0.0, 0.0],
            [1.0, 5.0, 2.0, 0.0],
            [0.0, 2.0, 6.0, 1.0],
            [0.0, 0.0, 1.0, 3.0]
        ];
        let b = vec![1.0, -2.0, 3.5, 0.25];
        let inv_diag: Vec<f64> = (0..4).map(|i| 1.0 / a[(i, i)]).collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..4 {
                out[i] = (0..4).map(|j| a[(i, j)] * x[j]).sum();
            }
        };
        let x = pcg(&apply, &inv_diag, &b, 1e-14, 100).unwrap();
        let bm = Array2::from_shape_vec((4, 1), b.clone()).unwrap();
        let x_lu = lu_solve(&a, &bm).unwrap();
        for i in 0..4 {
            assert!((x[i] - x_lu[(i, 0)]).abs() < 1e-10);
        }
    }
}
