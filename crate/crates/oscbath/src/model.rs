//! Problem-description types shared by every other module: oscillator, bath,
//! drive, initial states, temperature and numerical controls.
//!
//! All types are immutable plain data; once validated they can be shared
//! freely across threads.

// validation uses `!(x > 0.0)` forms on purpose: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Violation, ViolationKind};

/// Serialize complex numbers as two-element `[re, im]` arrays.
pub mod complex_array {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Complex matrices as row-major nested arrays of `[re, im]` pairs.
mod complex_matrix {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }
}

/// Inverse temperature, with `"inf"` accepted for the zero-temperature
/// sentinel (JSON has no literal infinity).
mod beta_value {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Word(String),
    }

    pub fn serialize<S: Serializer>(beta: &f64, s: S) -> Result<S::Ok, S::Error> {
        if beta.is_infinite() {
            Repr::Word("inf".into()).serialize(s)
        } else {
            Repr::Finite(*beta).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Finite(x) => Ok(x),
            Repr::Word(w) if w == "inf" => Ok(f64::INFINITY),
            Repr::Word(w) => Err(D::Error::custom(format!("bad beta value `{w}`"))),
        }
    }
}

fn default_hbar() -> f64 {
    1.0
}

/// The main oscillator: angular frequency and the action scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub omega0: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

impl OscillatorSpec {
    pub fn new(omega0: f64) -> Self {
        Self { omega0, hbar: 1.0 }
    }
}

/// A single bath mode: angular frequency and complex coupling amplitude.
///
/// The coupling enters the interaction exactly as stored; it is never
/// auto-conjugated, so the placement of `f` vs `conj(f)` is fixed once here.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BathMode {
    pub omega: f64,
    #[serde(with = "complex_array")]
    pub f: Complex64,
}

/// Ordered list of bath modes. Empty means no dissipation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BathSpec {
    pub modes: Vec<BathMode>,
}

impl BathSpec {
    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// One segment of a piecewise-constant drive table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseEntry {
    pub t_start: f64,
    #[serde(with = "complex_array")]
    pub k: Complex64,
}

/// Classical external source K(t), restricted to a closed family so the
/// response integrals admit closed forms or controlled quadrature.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DriveSpec {
    Zero,
    Constant {
        #[serde(with = "complex_array")]
        k0: Complex64,
    },
    /// K(t) = k0 * exp(-i (omega t + phase))
    Harmonic {
        #[serde(with = "complex_array")]
        k0: Complex64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// K(t) = k0 * exp(-(t - t0)^2 / (2 sigma^2)) * exp(-i omega t)
    GaussianPulse {
        #[serde(with = "complex_array")]
        k0: Complex64,
        t0: f64,
        sigma: f64,
        #[serde(default)]
        omega: f64,
    },
    /// Constant on [t_start[i], t_start[i+1]); last value holds for all later t.
    PiecewiseConstant {
        table: Vec<PiecewiseEntry>,
    },
}

impl DriveSpec {
    /// Evaluate K(t). Total on t >= 0.
    pub fn value(&self, t: f64) -> Complex64 {
        match self {
            DriveSpec::Zero => Complex64::ZERO,
            DriveSpec::Constant { k0 } => *k0,
            DriveSpec::Harmonic { k0, omega, phase } => {
                k0 * Complex64::from_polar(1.0, -(omega * t + phase))
            }
            DriveSpec::GaussianPulse {
                k0,
                t0,
                sigma,
                omega,
            } => {
                let envelope = (-(t - t0).powi(2) / (2.0 * sigma * sigma)).exp();
                k0 * envelope * Complex64::from_polar(1.0, -omega * t)
            }
            DriveSpec::PiecewiseConstant { table } => table
                .iter()
                .rev()
                .find(|entry| t >= entry.t_start)
                .map_or(Complex64::ZERO, |entry| entry.k),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DriveSpec::Zero => true,
            DriveSpec::Constant { k0 } => *k0 == Complex64::ZERO,
            _ => false,
        }
    }
}

/// Initial state of the oscillator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialOscState {
    Number {
        k: usize,
    },
    Coherent {
        #[serde(with = "complex_array")]
        alpha: Complex64,
    },
    FockMatrix {
        #[serde(with = "complex_matrix")]
        rho0: DMatrix<Complex64>,
    },
}

/// Thermal state of the bath. `beta = +inf` is the exact zero-temperature
/// sentinel: every occupation number is exactly zero, not merely small.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermalBathState {
    #[serde(with = "beta_value")]
    pub beta: f64,
}

impl ThermalBathState {
    pub fn new(beta: f64) -> Self {
        Self { beta }
    }

    pub fn zero_temperature() -> Self {
        Self {
            beta: f64::INFINITY,
        }
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    /// Bose-Einstein occupation 1/(e^{beta hbar omega} - 1); exactly 0 at T = 0.
    pub fn occupation(&self, hbar: f64, omega: f64) -> f64 {
        if self.is_zero_temperature() {
            0.0
        } else {
            1.0 / (self.beta * hbar * omega).exp_m1()
        }
    }
}

fn default_fock_cutoff() -> usize {
    32
}
fn default_series_tol() -> f64 {
    1e-12
}
fn default_series_smax() -> usize {
    400
}
fn default_quadrature_tol() -> f64 {
    1e-10
}

/// Truncation and tolerance controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericsParams {
    #[serde(default = "default_fock_cutoff")]
    pub fock_cutoff_osc: usize,
    #[serde(default = "default_series_tol")]
    pub series_tol: f64,
    #[serde(default = "default_series_smax")]
    pub series_smax: usize,
    #[serde(default = "default_quadrature_tol")]
    pub quadrature_tol: f64,
}

impl Default for NumericsParams {
    fn default() -> Self {
        Self {
            fock_cutoff_osc: default_fock_cutoff(),
            series_tol: default_series_tol(),
            series_smax: default_series_smax(),
            quadrature_tol: default_quadrature_tol(),
        }
    }
}

/// Full problem statement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub oscillator: OscillatorSpec,
    #[serde(default)]
    pub bath: BathSpec,
    pub drive: DriveSpec,
    pub initial_osc: InitialOscState,
    pub bath_state: ThermalBathState,
    #[serde(default)]
    pub numerics: NumericsParams,
}

/// Direct coefficient injection bypassing the dynamics; the series engine
/// consumes (G, zeta, eta) without knowing their origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SyntheticCoefficients {
    #[serde(with = "complex_array")]
    pub g: Complex64,
    #[serde(with = "complex_array")]
    pub zeta: Complex64,
    pub eta: f64,
}

impl SyntheticCoefficients {
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.g.norm() > 1.0 + 1e-12 {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "synthetic.g",
                "|G| must be <= 1",
            );
        }
        if !(self.eta >= 0.0) {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "synthetic.eta",
                "eta must be >= 0",
            );
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

fn push(v: &mut Vec<Violation>, kind: ViolationKind, field: &str, message: &str) {
    v.push(Violation {
        kind,
        field: field.to_string(),
        message: message.to_string(),
    });
}

const STATE_TOL: f64 = 1e-12;

impl Scenario {
    /// Check every type invariant, collecting all violations rather than
    /// stopping at the first. Idempotent: an accepted scenario is returned
    /// unchanged.
    pub fn validate(&self) -> Result<&Self, Vec<Violation>> {
        let mut v = Vec::new();

        if !(self.oscillator.omega0 > 0.0) {
            push(
                &mut v,
                ViolationKind::NonPositiveFrequency,
                "oscillator.omega0",
                "must be > 0",
            );
        }
        if !(self.oscillator.hbar > 0.0) {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "oscillator.hbar",
                "must be > 0",
            );
        }

        for (j, mode) in self.bath.modes.iter().enumerate() {
            if !(mode.omega > 0.0) {
                push(
                    &mut v,
                    ViolationKind::NonPositiveFrequency,
                    &format!("bath.modes[{j}].omega"),
                    "must be > 0",
                );
            }
        }

        self.validate_drive(&mut v);
        self.validate_initial(&mut v);

        if !(self.bath_state.beta > 0.0) {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "bath_state.beta",
                "must be > 0",
            );
        }

        let num = &self.numerics;
        if num.fock_cutoff_osc < 1 {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "numerics.fock_cutoff_osc",
                "must be >= 1",
            );
        }
        if !(num.series_tol > 0.0) {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "numerics.series_tol",
                "must be > 0",
            );
        }
        if num.series_smax < 1 {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "numerics.series_smax",
                "must be >= 1",
            );
        }
        if !(num.quadrature_tol > 0.0) {
            push(
                &mut v,
                ViolationKind::NonPositiveParameter,
                "numerics.quadrature_tol",
                "must be > 0",
            );
        }

        if v.is_empty() {
            Ok(self)
        } else {
            Err(v)
        }
    }

    fn validate_drive(&self, v: &mut Vec<Violation>) {
        match &self.drive {
            DriveSpec::GaussianPulse { sigma, .. } => {
                if !(*sigma > 0.0) {
                    push(
                        v,
                        ViolationKind::NonPositiveParameter,
                        "drive.sigma",
                        "must be > 0",
                    );
                }
            }
            DriveSpec::PiecewiseConstant { table } => {
                if table.is_empty() || table[0].t_start != 0.0 {
                    push(
                        v,
                        ViolationKind::BadPiecewiseTable,
                        "drive.table",
                        "must start at t = 0",
                    );
                }
                if table.windows(2).any(|w| w[1].t_start <= w[0].t_start) {
                    push(
                        v,
                        ViolationKind::BadPiecewiseTable,
                        "drive.table",
                        "t_start must be strictly increasing",
                    );
                }
            }
            _ => {}
        }
    }

    fn validate_initial(&self, v: &mut Vec<Violation>) {
        match &self.initial_osc {
            InitialOscState::Number { k } => {
                if *k >= self.numerics.fock_cutoff_osc {
                    push(
                        v,
                        ViolationKind::NonPositiveParameter,
                        "initial_osc.k",
                        "must be below numerics.fock_cutoff_osc",
                    );
                }
            }
            InitialOscState::Coherent { .. } => {}
            InitialOscState::FockMatrix { rho0 } => {
                if rho0.nrows() != rho0.ncols() || rho0.nrows() == 0 {
                    push(
                        v,
                        ViolationKind::NonHermitianInitialState,
                        "initial_osc.rho0",
                        "must be square and nonempty",
                    );
                    return;
                }
                let herm_defect = (rho0 - rho0.adjoint()).map(|z| z.norm()).max();
                if herm_defect > STATE_TOL {
                    push(
                        v,
                        ViolationKind::NonHermitianInitialState,
                        "initial_osc.rho0",
                        &format!("hermiticity defect {herm_defect:e} exceeds 1e-12"),
                    );
                }
                let trace: Complex64 = rho0.diagonal().iter().sum();
                if (trace - Complex64::ONE).norm() > STATE_TOL {
                    push(
                        v,
                        ViolationKind::NonNormalizedInitialState,
                        "initial_osc.rho0",
                        &format!("trace {trace} is not 1 within 1e-12"),
                    );
                }
                if herm_defect <= STATE_TOL {
                    let herm = (rho0 + rho0.adjoint()).scale(0.5);
                    let min_eig = herm
                        .symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min);
                    if min_eig < -STATE_TOL {
                        push(
                            v,
                            ViolationKind::NonNormalizedInitialState,
                            "initial_osc.rho0",
                            &format!("negative eigenvalue {min_eig:e}"),
                        );
                    }
                }
            }
        }
    }
}
