//! Magnus-expansion propagator (orders 1-3) for time-dependent hermitian
//! generators, in angular-frequency units (H(t)/hbar).
//!
//! The exponent terms are anti-hermitian by construction, so the truncated
//! propagator is unitary at every order. Nested integrals are evaluated with
//! fixed-order Gauss-Legendre panels, doubling the panel count until each
//! term settles below the requested tolerance. The inner time-ordered
//! integrals are reduced using bilinearity of the commutator, so the triple
//! integral costs one nested 2-d sweep with a cumulative inner integral.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre_matrix;

/// Smoothness hint for the quadrature: piecewise generators start from more
/// panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Continuous,
    Piecewise,
}

/// A time-dependent hermitian generator t -> H(t)/hbar.
pub struct Generator {
    dim: usize,
    smoothness: Smoothness,
    f: Box<dyn Fn(f64) -> DMatrix<Complex64> + Send + Sync>,
}

impl Generator {
    pub fn new(
        dim: usize,
        smoothness: Smoothness,
        f: impl Fn(f64) -> DMatrix<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            smoothness,
            f: Box::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64) -> DMatrix<Complex64> {
        (self.f)(t)
    }

    /// Largest hermiticity defect over a time sample.
    pub fn hermiticity_defect(&self, t_max: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| {
                let t = t_max * i as f64 / samples.max(1) as f64;
                let h = self.eval(t);
                (&h - h.adjoint()).map(|z| z.norm()).max()
            })
            .fold(0.0, f64::max)
    }
}

/// Exponent terms with per-term quadrature error estimates.
#[derive(Debug, Clone)]
pub struct MagnusTerms {
    pub order: usize,
    pub u1: DMatrix<Complex64>,
    pub u2: DMatrix<Complex64>,
    pub u3: DMatrix<Complex64>,
    pub quad_errors: [f64; 3],
}

impl MagnusTerms {
    pub fn exponent(&self) -> DMatrix<Complex64> {
        &self.u1 + &self.u2 + &self.u3
    }

    pub fn antihermiticity_defect(&self) -> f64 {
        [&self.u1, &self.u2, &self.u3]
            .iter()
            .map(|u| (*u + u.adjoint()).map(|z| z.norm()).max())
            .fold(0.0, f64::max)
    }
}

fn comm(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

fn frob(a: &DMatrix<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Exponent terms over [0, t].
pub fn magnus_terms(gen: &Generator, t: f64, order: usize, quad_tol: f64) -> Result<MagnusTerms> {
    magnus_terms_on(gen, 0.0, t, order, quad_tol)
}

/// Exponent terms over [a, b]; used directly by the substep composition.
pub fn magnus_terms_on(
    gen: &Generator,
    a: f64,
    b: f64,
    order: usize,
    quad_tol: f64,
) -> Result<MagnusTerms> {
    assert!((1..=3).contains(&order), "order must be 1, 2, or 3");
    let dim = gen.dim();
    let zero = DMatrix::<Complex64>::zeros(dim, dim);
    let minus_i = Complex64::new(0.0, -1.0);

    let p0 = match gen.smoothness {
        Smoothness::Continuous => 1usize,
        Smoothness::Piecewise => 4,
    };
    let max_panels = p0 * 128;

    let compute = |panels: usize| -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
        let sub = |lo: f64, hi: f64| -> usize {
            let frac = if b > a { (hi - lo) / (b - a) } else { 0.0 };
            ((panels as f64 * frac).ceil() as usize).max(1)
        };
        let u1 = gauss_legendre_matrix(&|t1| gen.eval(t1), a, b, panels, dim).map(|z| z * minus_i);
        if order == 1 {
            return (u1, zero.clone(), zero.clone());
        }
        // u2 = -1/2 int dt1 [H(t1), S(t1)],  S(t1) = int_a^{t1} H
        let u2 = gauss_legendre_matrix(
            &|t1| {
                let h1 = gen.eval(t1);
                let s1 = gauss_legendre_matrix(&|t2| gen.eval(t2), a, t1, sub(a, t1), dim);
                comm(&h1, &s1)
            },
            a,
            b,
            panels,
            dim,
        )
        .map(|z| z * Complex64::new(-0.5, 0.0));
        if order == 2 {
            return (u1, u2, zero.clone());
        }
        // u3 = (i/6) int dt1 int_a^{t1} dt2 { [H1, [H2, S2]] + [S2, [H2, H1]] }
        let u3 = gauss_legendre_matrix(
            &|t1| {
                let h1 = gen.eval(t1);
                gauss_legendre_matrix(
                    &|t2| {
                        let h2 = gen.eval(t2);
                        let s2 = gauss_legendre_matrix(&|t3| gen.eval(t3), a, t2, sub(a, t2), dim);
                        comm(&h1, &comm(&h2, &s2)) + comm(&s2, &comm(&h2, &h1))
                    },
                    a,
                    t1,
                    sub(a, t1),
                    dim,
                )
            },
            a,
            b,
            panels,
            dim,
        )
        .map(|z| z * Complex64::new(0.0, 1.0 / 6.0));
        (u1, u2, u3)
    };

    let mut panels = p0;
    let mut previous = compute(panels);
    loop {
        panels *= 2;
        let current = compute(panels);
        let errs = [
            frob(&(&current.0 - &previous.0)),
            frob(&(&current.1 - &previous.1)),
            frob(&(&current.2 - &previous.2)),
        ];
        if errs.iter().all(|e| *e < quad_tol) {
            let (u1, u2, u3) = current;
            return Ok(MagnusTerms {
                order,
                u1,
                u2,
                u3,
                quad_errors: errs,
            });
        }
        if panels >= max_panels {
            return Err(Error::QuadratureNonConvergence {
                achieved: errs.iter().copied().fold(0.0, f64::max),
                requested: quad_tol,
            });
        }
        previous = current;
    }
}

/// exp(u1 + u2 + u3). The summed exponent is projected onto its
/// anti-hermitian part (discarding quadrature roundoff) and exponentiated
/// through a hermitian eigendecomposition, so the result is unitary to
/// machine precision at every truncation order.
pub fn magnus_propagator(terms: &MagnusTerms) -> DMatrix<Complex64> {
    let u = terms.exponent();
    let anti = (&u - u.adjoint()).scale(0.5);
    // i * anti is hermitian; exp(anti) = exp(-i (i anti))
    let herm = anti.map(|z| z * Complex64::new(0.0, 1.0));
    let eig = herm.symmetric_eigen();
    let mut scaled = eig.eigenvectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::from_polar(1.0, -eig.eigenvalues[k]);
    }
    scaled * eig.eigenvectors.adjoint()
}

/// U^dag A0 U: Heisenberg evolution of a dynamical variable.
pub fn heisenberg_evolve(a0: &DMatrix<Complex64>, terms: &MagnusTerms) -> DMatrix<Complex64> {
    let u = magnus_propagator(terms);
    u.adjoint() * a0 * u
}

/// Propagator over [0, t] with automatic substepping: the local truncation is
/// only accurate while int ||H|| dt stays of order one, so the interval is
/// split until each substep's accumulated generator norm is below 1, and the
/// substep propagators are composed (composition preserves unitarity).
pub fn propagator_with_substeps(
    gen: &Generator,
    t: f64,
    order: usize,
    quad_tol: f64,
) -> Result<DMatrix<Complex64>> {
    let norm_budget: f64 = gauss_legendre_matrix(
        &|s| DMatrix::from_element(1, 1, Complex64::new(frob(&gen.eval(s)), 0.0)),
        0.0,
        t,
        4,
        1,
    )[(0, 0)]
        .re;
    let n_sub = (norm_budget.ceil() as usize).max(1);
    let step = t / n_sub as f64;
    let mut u = DMatrix::<Complex64>::identity(gen.dim(), gen.dim());
    for i in 0..n_sub {
        let terms = magnus_terms_on(gen, step * i as f64, step * (i + 1) as f64, order, quad_tol)?;
        u = magnus_propagator(&terms) * u;
    }
    Ok(u)
}
