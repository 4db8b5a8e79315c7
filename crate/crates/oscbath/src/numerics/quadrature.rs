// Tabulated constants carry their full published digit count.
#![allow(clippy::excessive_precision)]

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_2,
    0.949_107_912_342_758_524_5,
    0.864_864_423_359_769_072_8,
    0.741_531_185_599_394_439_9,
    0.586_087_235_467_691_130_3,
    0.405_845_151_377_397_166_9,
    0.207_784_955_007_898_467_6,
    0.0,
];
// Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_964,
    0.063_092_092_629_978_553_291,
    0.104_790_010_322_250_183_84,
    0.140_653_259_715_525_918_75,
    0.169_004_726_639_267_902_83,
    0.190_350_578_064_785_409_91,
    0.204_432_940_075_298_892_07,
    0.209_482_141_084_727_828_01,
];
// Embedded 7-point Gauss weights (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_27,
    0.279_705_391_489_276_667_9,
    0.381_830_050_505_118_944_95,
    0.417_959_183_673_469_387_76,
];

/// One Gauss-Kronrod 7/15 panel: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let lo = f(center - half * XGK[i]);
        let hi = f(center + half * XGK[i]);
        kronrod += WGK[i] * (lo + hi);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (lo + hi);
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    (integral, err)
}

/// Adaptive Gauss-Kronrod integration of a complex-valued integrand to an
/// absolute tolerance. Bisects the interval with the largest error estimate
/// until the summed estimate drops below `abs_tol`.
pub fn integrate_gk<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<(Complex64, f64)> {
    if a == b {
        return Ok((Complex64::ZERO, 0.0));
    }
    let mut intervals: Vec<(f64, f64, Complex64, f64)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    intervals.push((a, b, v, e));
    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= abs_tol {
            let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
            return Ok((total, total_err));
        }
        if intervals.len() >= max_intervals {
            return Err(Error::QuadratureNonConvergence {
                achieved: total_err,
                requested: abs_tol,
            });
        }
        // worst interval first; index tie-break keeps this deterministic
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap().then(y.0.cmp(&x.0)))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Closed form of the oscillatory phase integral over an interval:
/// int_a^b e^{i lambda s} ds, stable through lambda -> 0.
pub fn phase_integral(lambda: f64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let mid = 0.5 * (a + b);
    len * Complex64::from_polar(1.0, lambda * mid) * sinc(0.5 * lambda * len)
}

/// sin(x)/x with a series branch near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_29),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_29),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Fixed-order Gauss-Legendre quadrature of a matrix-valued integrand over
/// [a, b], split into `panels` equal panels.
pub fn gauss_legendre_matrix<F: Fn(f64) -> DMatrix<Complex64>>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    dim: usize,
) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    if a == b {
        return out;
    }
    let step = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + step * p as f64;
        let center = lo + 0.5 * step;
        let half = 0.5 * step;
        for (node, weight) in GL8 {
            out += f(center + half * node).scale(weight * half);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn oscillatory_gaussian_integral() {
        // int_0^4 e^{3is} e^{-(s-2)^2} ds against the phase-shifted error-function value
        // sqrt(pi) e^{-9/4} e^{6i} erf-range correction is negligible at +-2 sigma... use
        // a dense Simpson reference instead.
        let f = |s: f64| Complex64::from_polar((-(s - 2.0f64).powi(2)).exp(), 3.0 * s);
        let (value, err) = integrate_gk(f, 0.0, 4.0, 1e-12, 200).unwrap();
        let n = 1 << 16;
        let h = 4.0 / n as f64;
        let mut simpson = f(0.0) + f(4.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            simpson += w * f(i as f64 * h);
        }
        simpson *= h / 3.0;
        assert!(err <= 1e-12);
        assert!((value - simpson).norm() < 1e-11);
    }

    #[test]
    fn nonconvergence_reports_achieved_error() {
        // |x|^{-1/2} endpoint singularity with an absurd tolerance and a tiny budget
        let f = |s: f64| Complex64::new(s.abs().sqrt().recip(), 0.0);
        let e = integrate_gk(f, 1e-12, 1.0, 1e-14, 8).unwrap_err();
        match e {
            crate::error::Error::QuadratureNonConvergence {
                achieved,
                requested,
            } => {
                assert!(achieved > requested);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn phase_integral_matches_quadrature_and_limit() {
        let exact = phase_integral(1.7, 0.3, 2.1);
        let (quad, _) = integrate_gk(
            |s| Complex64::from_polar(1.0, 1.7 * s),
            0.3,
            2.1,
            1e-13,
            100,
        )
        .unwrap();
        assert!((exact - quad).norm() < 1e-12);
        // lambda -> 0 limit is the interval length
        let small = phase_integral(1e-13, 0.0, 2.0);
        assert_relative_eq!(small.re, 2.0, epsilon = 1e-12);
        assert!(small.im.abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // GL8 integrates degree-15 polynomials exactly
        let f =
            |s: f64| DMatrix::from_element(1, 1, Complex64::new(s.powi(15) - 3.0 * s.powi(7), 0.0));
        let v = gauss_legendre_matrix(&f, 0.0, 1.0, 1, 1);
        assert_relative_eq!(v[(0, 0)].re, 1.0 / 16.0 - 3.0 / 8.0, epsilon = 1e-14);
    }
}
