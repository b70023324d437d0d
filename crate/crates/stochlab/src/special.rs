//! Special functions used as closed-form oracles.
//!
//! The exterior Dirichlet problem on Euclidean `ℝ²` has the exact solution
//! `h(r) = K₀(√λ r) / K₀(√λ R)`, and the radial Khas'minskii equation on
//! `ℝ²` is solved by `I₀(√λ r)`; both Bessel functions are provided here so
//! solver output can be checked against machine-accurate references.  The
//! module also collects small numerically careful helpers (`ln_sinh`,
//! `coth`) used by hyperbolic warping profiles, and unit-sphere areas for
//! volume normalisation.
//!
//! `I₀` follows the classical Chebyshev-expansion evaluation (two expansions
//! meeting at `x = 8`).  `K₀` uses the ascending series
//! `K₀ = -(ln(x/2) + γ) I₀(x) + Σ_{k≥1} (x²/4)^k / (k!)² · H_k` for `x ≤ 2`
//! and, for `x > 2`, the trapezoidal rule applied to
//! `K₀(x) = e^{-x} x^{-1/2} ∫₀^∞ exp(-x(cosh(u/√x) - 1)) du`,
//! which converges geometrically because the integrand is analytic and
//! decays doubly exponentially; both branches are accurate to a few ulps.

/// Euler–Mascheroni constant γ.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Chebyshev coefficients for `e^{-x} I₀(x)` on `[0, 8]`,
/// as a function of `x/2 - 2`.
const BESSI0_COEFFS_A: [f64; 30] = [
    -4.415_341_646_479_339_5E-18,
    3.330_794_518_822_238_4E-17,
    -2.431_279_846_547_955E-16,
    1.715_391_285_555_133E-15,
    -1.168_533_287_799_345_1E-14,
    7.676_185_498_604_936E-14,
    -4.856_446_783_111_929E-13,
    2.955_052_663_129_64E-12,
    -1.726_826_291_441_556E-11,
    9.675_809_035_373_237E-11,
    -5.189_795_601_635_263E-10,
    2.659_823_724_682_386_6E-9,
    -1.300_025_009_986_248E-8,
    6.046_995_022_541_919E-8,
    -2.670_793_853_940_612E-7,
    1.117_387_539_120_103_7E-6,
    -4.416_738_358_458_750_5E-6,
    1.644_844_807_072_889_6E-5,
    -5.754_195_010_082_104E-5,
    1.885_028_850_958_416_5E-4,
    -5.763_755_745_385_824E-4,
    1.639_475_616_941_335_7E-3,
    -4.324_309_995_050_576E-3,
    1.054_646_039_459_499_8E-2,
    -2.373_741_480_589_947E-2,
    4.930_528_423_967_071E-2,
    -9.490_109_704_804_764E-2,
    1.716_209_015_222_087_7E-1,
    -3.046_826_723_431_984E-1,
    6.767_952_744_094_761E-1,
];

/// Chebyshev coefficients for `e^{-x} √x I₀(x)` on `[8, ∞)`,
/// as a function of `32/x - 2`.
const BESSI0_COEFFS_B: [f64; 25] = [
    -7.233_180_487_874_754E-18,
    -4.830_504_485_944_182E-18,
    4.465_621_420_296_76E-17,
    3.461_222_867_697_461E-17,
    -2.827_623_980_516_583_6E-16,
    -3.425_485_619_677_219E-16,
    1.772_560_133_056_526_3E-15,
    3.811_680_669_352_622_4E-15,
    -9.554_846_698_828_307E-15,
    -4.150_569_347_287_222E-14,
    1.540_086_217_521_41E-14,
    3.852_778_382_742_142_6E-13,
    7.180_124_451_383_666E-13,
    -1.794_178_531_506_806_2E-12,
    -1.321_581_184_044_771_3E-11,
    -3.149_916_527_963_241_6E-11,
    1.188_914_710_784_643_9E-11,
    4.940_602_388_224_97E-10,
    3.396_232_025_708_386_5E-9,
    2.266_668_990_498_178E-8,
    2.048_918_589_469_063_8E-7,
    2.891_370_520_834_756_7E-6,
    6.889_758_346_916_825E-5,
    3.369_116_478_255_694_3E-3,
    8.044_904_110_141_088E-1,
];

/// Evaluates a Chebyshev series at `x` by Clenshaw recurrence.
fn chbevl(x: f64, coeffs: &[f64]) -> f64 {
    let mut b0 = coeffs[0];
    let mut b1 = 0.0;
    let mut b2 = 0.0;

    for c in coeffs.iter().skip(1) {
        b2 = b1;
        b1 = b0;
        b0 = x.mul_add(b1, *c) - b2;
    }

    0.5 * (b0 - b2)
}

/// Modified Bessel function of the first kind, `I₀(x)`.
pub fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 8.0 {
        let y = ax.mul_add(0.5, -2.0);
        ax.exp() * chbevl(y, &BESSI0_COEFFS_A)
    } else {
        ax.exp() * chbevl(32.0_f64.mul_add(ax.recip(), -2.0), &BESSI0_COEFFS_B) / ax.sqrt()
    }
}

/// Modified Bessel function of the second kind, `K₀(x)`, for `x > 0`.
///
/// Returns `f64::INFINITY` at `x = 0` and NaN for negative arguments.
pub fn bessel_k0(x: f64) -> f64 {
    if x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x <= 2.0 {
        // Ascending series. All terms of the correction sum are positive;
        // the only cancellation is against the log term and is bounded by
        // e^{2x} ≤ e⁴ in relative terms.
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..64 {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            let contrib = term * harmonic;
            sum += contrib;
            if contrib < 1e-20 * (sum + 1.0) {
                break;
            }
        }
        -(0.5 * x).ln().mul_add(bessel_i0(x), EULER_GAMMA * bessel_i0(x)) + sum
    } else {
        // Trapezoidal rule for the scaled integral; step 0.35 keeps the
        // discretisation error below 1e-15 relative for every x > 2.
        const H: f64 = 0.35;
        const UMAX: f64 = 11.0;
        let sx = x.sqrt();
        let mut total = 0.5;
        let mut u = H;
        while u <= UMAX {
            total += (-x * ((u / sx).cosh() - 1.0)).exp();
            u += H;
        }
        (-x).exp() * H * total / sx
    }
}

/// `ln(sinh x)` for `x > 0` without overflow.
///
/// Uses `ln sinh x = x + ln(1 - e^{-2x}) - ln 2` with the inner term
/// computed by `expm1`, which is accurate from `x = 1e-300` up to the
/// largest finite arguments.
pub fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x + (-f64::exp_m1(-2.0 * x)).ln() - std::f64::consts::LN_2
}

/// `coth x` for `x > 0` without overflow or small-`x` cancellation.
pub fn coth(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let e = (-2.0 * x).exp();
    (1.0 + e) / (-f64::exp_m1(-2.0 * x))
}

/// Surface area `ω_{m-1}` of the unit sphere `S^{m-1} ⊂ ℝ^m`, i.e.
/// `2 π^{m/2} / Γ(m/2)`, computed by the exact two-step recursion
/// `ω_m = 2π ω_{m-2} / (m - 2)` from `ω_1 = 2`, `ω_2 = 2π`.
pub fn unit_sphere_area(m: usize) -> f64 {
    assert!(m >= 1, "sphere dimension parameter m must be at least 1");
    let tau = std::f64::consts::TAU;
    let (mut k, mut area) = if m % 2 == 0 { (2, tau) } else { (1, 2.0) };
    while k < m {
        k += 2;
        area *= tau / (k as f64 - 2.0);
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rel(value: f64, reference: f64, tol: f64) {
        let scale = reference.abs().max(1e-300);
        assert!(
            (value - reference).abs() / scale <= tol,
            "value {value:e} vs reference {reference:e} (rel err {:e} > {tol:e})",
            (value - reference).abs() / scale,
        );
    }

    #[test]
    fn i0_matches_reference_values() {
        // Reference values computed with 25-digit arithmetic.
        assert_rel(bessel_i0(1.0), 1.266_065_877_752_008_3, 1e-14);
        assert_rel(bessel_i0(2.0), 2.279_585_302_336_067_3, 1e-14);
        assert_rel(bessel_i0(4.0), 11.301_921_952_136_33, 1e-14);
        assert_rel(bessel_i0(10.0), 2_815.716_628_466_254_5, 1e-14);
        assert_rel(bessel_i0(20.0), 43_558_282.559_553_533, 1e-14);
        assert_rel(bessel_i0(0.0), 1.0, 0.0);
        assert_rel(bessel_i0(-2.0), bessel_i0(2.0), 0.0);
    }

    #[test]
    fn k0_matches_reference_values() {
        assert_rel(bessel_k0(0.5), 0.924_419_071_227_665_9, 5e-14);
        assert_rel(bessel_k0(1.0), 0.421_024_438_240_708_33, 5e-14);
        assert_rel(bessel_k0(2.0), 0.113_893_872_749_533_44, 5e-14);
        assert_rel(bessel_k0(5.0), 3.691_098_334_042_594_3e-3, 5e-14);
        assert_rel(bessel_k0(10.0), 1.778_006_231_616_765_2e-5, 5e-14);
        assert!(bessel_k0(0.0).is_infinite());
        assert!(bessel_k0(-1.0).is_nan());
    }

    #[test]
    fn k0_branches_agree_at_the_seam() {
        let left = bessel_k0(2.0 - 1e-12);
        let right = bessel_k0(2.0 + 1e-12);
        assert_rel(left, right, 1e-11);
    }

    #[test]
    fn k0_ratio_oracle() {
        // h(2) for the exterior problem on ℝ² with λ = 1, R = 1.
        assert_rel(
            bessel_k0(2.0) / bessel_k0(1.0),
            0.270_516_061_313_329_19,
            1e-13,
        );
    }

    #[test]
    fn ln_sinh_is_stable_across_scales() {
        assert_rel(ln_sinh(1.0), 0.161_439_361_571_195_63, 1e-14);
        assert_rel(ln_sinh(50.0), 49.306_852_819_440_05, 1e-14);
        assert_rel(ln_sinh(1e-9), -20.723_265_836_946_41, 1e-14);
        // sinh(800) overflows f64; ln_sinh must not.
        assert_rel(ln_sinh(800.0), 800.0 - std::f64::consts::LN_2, 1e-14);
    }

    #[test]
    fn coth_is_stable_across_scales() {
        assert_rel(coth(1e-8), 1e8, 1e-12);
        assert_rel(coth(1.0), 1.0 / f64::tanh(1.0), 1e-14);
        assert_rel(coth(500.0), 1.0, 1e-15);
    }

    #[test]
    fn unit_sphere_areas_match_closed_forms() {
        use std::f64::consts::PI;
        assert_rel(unit_sphere_area(1), 2.0, 0.0);
        assert_rel(unit_sphere_area(2), 2.0 * PI, 1e-15);
        assert_rel(unit_sphere_area(3), 4.0 * PI, 1e-15);
        assert_rel(unit_sphere_area(4), 2.0 * PI * PI, 1e-15);
        assert_rel(unit_sphere_area(5), 8.0 * PI * PI / 3.0, 1e-15);
        assert_rel(unit_sphere_area(6), PI.powi(3), 1e-15);
        assert_rel(unit_sphere_area(7), 33.073_361_792_319_81, 1e-14);
        assert_rel(unit_sphere_area(10), 25.501_640_398_773_454, 1e-14);
        assert_rel(unit_sphere_area(11), 20.725_142_673_288_903, 1e-14);
        assert_rel(unit_sphere_area(14), 8.389_703_410_491_089, 1e-14);
    }
}
