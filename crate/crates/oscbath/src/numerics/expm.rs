use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense matrix exponential by scaling-and-squaring with a Taylor kernel.
///
/// The argument is scaled by 2^k until its 1-norm is below 1/2, the series is
/// summed to machine precision, and the result squared k times. This route is
/// deliberately independent of the eigendecomposition-based propagators it is
/// used to cross-check.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = a.nrows();
    assert_eq!(dim, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(0.5f64.powi(squarings as i32));

    let mut result = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for j in 1..=40 {
        term = (&term * &scaled).scale(1.0 / j as f64);
        result += &term;
        if one_norm(&term) < 1e-17 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_diagonal_exponential() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, -1.5),
            Complex64::new(0.0, 2.0),
            Complex64::new(-0.3, 0.7),
        ]));
        let e = expm(&a);
        for i in 0..3 {
            let expected = a[(i, i)].exp();
            assert!((e[(i, i)] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn pauli_rotation_closed_form() {
        // exp(-i theta sigma_x) = cos(theta) I - i sin(theta) sigma_x
        let theta = 1.234f64;
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ZERO,
                Complex64::new(0.0, -theta),
                Complex64::new(0.0, -theta),
                Complex64::ZERO,
            ],
        );
        let e = expm(&a);
        assert!((e[(0, 0)] - Complex64::new(theta.cos(), 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - Complex64::new(0.0, -theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn unitary_for_antihermitian_argument() {
        // -i t H for a hermitian H with a large enough norm to force squaring
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.4, 0.3),
                Complex64::new(0.0, -0.2),
                Complex64::new(0.4, -0.3),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.0, 0.2),
                Complex64::new(0.1, 0.0),
                Complex64::new(5.0, 0.0),
            ],
        );
        let u = expm(&h.map(|z| z * Complex64::new(0.0, -3.7)));
        let defect = (&u * u.adjoint() - DMatrix::<Complex64>::identity(3, 3))
            .map(|z| z.norm())
            .max();
        assert!(defect < 1e-13, "unitarity defect {defect:e}");
    }
}
