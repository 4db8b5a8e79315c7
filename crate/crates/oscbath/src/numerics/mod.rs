//! Shared numerical machinery: compensated summation, log-factorials,
//! quadrature rules, dense matrix exponentials and oscillator polynomials.

mod expm;
mod factorial;
mod kahan;
mod polynomials;
mod quadrature;

pub use expm::expm;
pub use factorial::LnFactorial;
pub use kahan::{Accumulator, ComplexAccumulator};
pub use polynomials::{hermite_psi, laguerre};
pub use quadrature::{gauss_legendre_matrix, integrate_gk, phase_integral};
