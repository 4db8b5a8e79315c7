//! Time-dependent c-number coefficients of the Heisenberg-picture solution.
//!
//! The oscillator + bath quadratic Hamiltonian closes on single-excitation
//! amplitudes: the ladder operators at time t are linear combinations of the
//! initial ones with coefficients given by the (N+1)x(N+1) unitary
//! U1(t) = exp(-i h t), where h couples the oscillator (row 0) to every bath
//! mode. One hermitian eigendecomposition of h then yields every coefficient
//! at any t with machine-precision unitarity, and the drive response comes
//! from per-eigenmode convolution integrals that are closed-form for all
//! drive shapes except the Gaussian pulse.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BathSpec, DriveSpec, OscillatorSpec, Scenario, ThermalBathState};
use crate::numerics::{integrate_gk, phase_integral};

/// The (N+1)x(N+1) hermitian single-excitation matrix. Row/column 0 is the
/// oscillator; rows 1..=N are the bath modes.
#[derive(Debug, Clone)]
pub struct OneParticleHamiltonian {
    matrix: DMatrix<Complex64>,
}

/// h[0][0] = omega0, h[j][j] = omega_j, h[0][j] = f_j, h[j][0] = conj(f_j).
pub fn assemble_one_particle(osc: &OscillatorSpec, bath: &BathSpec) -> OneParticleHamiltonian {
    let n = bath.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n + 1, n + 1);
    matrix[(0, 0)] = Complex64::new(osc.omega0, 0.0);
    for (j, mode) in bath.modes.iter().enumerate() {
        matrix[(j + 1, j + 1)] = Complex64::new(mode.omega, 0.0);
        matrix[(0, j + 1)] = mode.f;
        matrix[(j + 1, 0)] = mode.f.conj();
    }
    OneParticleHamiltonian { matrix }
}

impl OneParticleHamiltonian {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() - 1
    }
}

/// Homogeneous coefficient blocks at one time.
#[derive(Debug, Clone)]
pub struct HomogeneousBlocks {
    pub g: Complex64,
    pub m: Vec<Complex64>,
    pub gamma: Vec<Complex64>,
    pub lambda: DMatrix<Complex64>,
}

/// Every coefficient of the Heisenberg solution at one time.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub t: f64,
    pub g: Complex64,
    pub m: Vec<Complex64>,
    pub lambda: DMatrix<Complex64>,
    pub gamma: Vec<Complex64>,
    pub zeta: Complex64,
    pub omega_vec: Vec<Complex64>,
    pub eta: f64,
    pub chi_kernel: Complex64,
}

impl CoefficientSet {
    /// Defect of |G|^2 + sum_j |M_j|^2 = 1.
    pub fn excitation_defect(&self) -> f64 {
        let total: f64 = self.g.norm_sqr() + self.m.iter().map(|z| z.norm_sqr()).sum::<f64>();
        (total - 1.0).abs()
    }

    /// Defect of (Lambda Lambda^†)_jj + |Gamma_j|^2 = 1 for row j.
    pub fn lambda_row_defect(&self, j: usize) -> f64 {
        let row_norm: f64 = self.lambda.row(j).iter().map(|z| z.norm_sqr()).sum();
        (row_norm + self.gamma[j].norm_sqr() - 1.0).abs()
    }
}

/// Precomputed eigendecomposition of the single-excitation matrix. Immutable
/// and shareable; every per-t evaluation is a pure function.
#[derive(Debug, Clone)]
pub struct OneParticlePropagator {
    dim: usize,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl OneParticlePropagator {
    pub fn new(h: &OneParticleHamiltonian) -> Result<Self> {
        let dim = h.dim();
        let off_diagonal_max = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| h.matrix[(i, j)].norm())
            .fold(0.0, f64::max);
        if off_diagonal_max == 0.0 {
            // Fully decoupled system: keep the trivial decomposition exact so
            // zero-coupling limits hold to the last bit.
            return Ok(Self {
                dim,
                eigenvalues: h.matrix.diagonal().map(|z| z.re),
                eigenvectors: DMatrix::identity(dim, dim),
            });
        }
        let eig = h
            .matrix
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::EigendecompositionFailure { dim })?;
        Ok(Self {
            dim,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.dim - 1
    }

    /// U1(t) = exp(-i h t).
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            self.dim,
            self.eigenvalues
                .iter()
                .map(|&l| Complex64::from_polar(1.0, -l * t)),
        );
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Coefficient blocks read off U1(t):
    /// G = U1[0][0], M_j = i U1[0][j], Gamma_j = U1[j][0], Lambda_jk = U1[j][k].
    pub fn homogeneous(&self, t: f64) -> HomogeneousBlocks {
        let u = self.unitary(t);
        blocks_from_unitary(&u)
    }

    /// Inhomogeneous response to the classical drive:
    /// v(t) = -i * int_0^t U1(t-t') (K(t'), 0, ..., 0) dt', with
    /// zeta = i v[0] and Omega_j = v[j].
    pub fn drive_response(
        &self,
        drive: &DriveSpec,
        t: f64,
        quad_tol: f64,
    ) -> Result<(Complex64, Vec<Complex64>)> {
        let n_modes = self.n_modes();
        if drive.is_zero() || t == 0.0 {
            return Ok((Complex64::ZERO, vec![Complex64::ZERO; n_modes]));
        }
        let mut v = DVector::<Complex64>::zeros(self.dim);
        for k in 0..self.dim {
            let weight = self.eigenvectors[(0, k)].conj();
            if weight == Complex64::ZERO {
                continue;
            }
            let lambda = self.eigenvalues[k];
            let integral = eigenmode_integral(drive, lambda, t, quad_tol)?;
            let factor = Complex64::new(0.0, -1.0)
                * weight
                * Complex64::from_polar(1.0, -lambda * t)
                * integral;
            v.axpy(
                factor,
                &self.eigenvectors.column(k).clone_owned(),
                Complex64::ONE,
            );
        }
        let zeta = Complex64::new(0.0, 1.0) * v[0];
        let omega_vec = (1..self.dim).map(|j| v[j]).collect();
        Ok((zeta, omega_vec))
    }

    /// All coefficients for a scenario at one time.
    pub fn coefficients(&self, scenario: &Scenario, t: f64) -> Result<CoefficientSet> {
        let blocks = self.homogeneous(t);
        let (zeta, omega_vec) =
            self.drive_response(&scenario.drive, t, scenario.numerics.quadrature_tol)?;
        let eta = thermal_eta(
            &blocks.m,
            &scenario.bath,
            &scenario.bath_state,
            scenario.oscillator.hbar,
        );
        Ok(CoefficientSet {
            t,
            g: blocks.g,
            m: blocks.m,
            lambda: blocks.lambda,
            gamma: blocks.gamma,
            zeta,
            omega_vec,
            eta,
            chi_kernel: memory_kernel(&scenario.bath, t),
        })
    }
}

/// Extract (G, M, Gamma, Lambda) from a single-excitation unitary.
pub fn blocks_from_unitary(u: &DMatrix<Complex64>) -> HomogeneousBlocks {
    let n_modes = u.nrows() - 1;
    HomogeneousBlocks {
        g: u[(0, 0)],
        m: (0..n_modes)
            .map(|j| Complex64::new(0.0, 1.0) * u[(0, j + 1)])
            .collect(),
        gamma: (0..n_modes).map(|j| u[(j + 1, 0)]).collect(),
        lambda: u.view((1, 1), (n_modes, n_modes)).into_owned(),
    }
}

/// int_0^t e^{i lambda t'} K(t') dt' for one real eigenmode frequency.
fn eigenmode_integral(drive: &DriveSpec, lambda: f64, t: f64, quad_tol: f64) -> Result<Complex64> {
    match drive {
        DriveSpec::Zero => Ok(Complex64::ZERO),
        DriveSpec::Constant { k0 } => Ok(k0 * phase_integral(lambda, 0.0, t)),
        DriveSpec::Harmonic { k0, omega, phase } => {
            Ok(k0 * Complex64::from_polar(1.0, -phase) * phase_integral(lambda - omega, 0.0, t))
        }
        DriveSpec::PiecewiseConstant { table } => {
            let mut total = Complex64::ZERO;
            for (idx, entry) in table.iter().enumerate() {
                if entry.t_start >= t {
                    break;
                }
                let seg_end = table.get(idx + 1).map_or(t, |next| next.t_start.min(t));
                total += entry.k * phase_integral(lambda, entry.t_start, seg_end);
            }
            Ok(total)
        }
        DriveSpec::GaussianPulse {
            k0,
            t0,
            sigma,
            omega,
        } => {
            let detuned = lambda - omega;
            let (t0, sigma) = (*t0, *sigma);
            let (value, _err) = integrate_gk(
                move |s| {
                    Complex64::from_polar(
                        (-(s - t0).powi(2) / (2.0 * sigma * sigma)).exp(),
                        detuned * s,
                    )
                },
                0.0,
                t,
                quad_tol,
                4096,
            )?;
            Ok(k0 * value)
        }
    }
}

/// eta(t) = sum_j |M_j(t)|^2 n_occ(omega_j); exactly 0 at T = 0 or N = 0.
pub fn thermal_eta(m: &[Complex64], bath: &BathSpec, state: &ThermalBathState, hbar: f64) -> f64 {
    if state.is_zero_temperature() {
        return 0.0;
    }
    m.iter()
        .zip(&bath.modes)
        .map(|(mj, mode)| mj.norm_sqr() * state.occupation(hbar, mode.omega))
        .sum()
}

/// Memory kernel chi(t) = sum_j |f_j|^2 e^{-i omega_j t} (diagnostic).
pub fn memory_kernel(bath: &BathSpec, t: f64) -> Complex64 {
    bath.modes
        .iter()
        .map(|mode| Complex64::from_polar(mode.f.norm_sqr(), -mode.omega * t))
        .sum()
}
