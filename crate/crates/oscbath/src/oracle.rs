//! Brute-force ground truth: evolves the full truncated oscillator (x) bath
//! Fock space, partial-traces, and measures everything the coefficient-based
//! modules predict. It exists to verify, not to perform; every routine here
//! favors directness over scalability.
//!
//! The full Hamiltonian is built in energy units (hbar included); evolution
//! is a product of exact step exponentials with the drive frozen at midpoint
//! values, so there is no splitting error between terms, only the drive
//! sampling error controlled by step halving. Step exponentials use the
//! scaling-and-squaring route, deliberately different from the
//! eigendecomposition route used by the coefficient propagator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::model::{BathSpec, InitialOscState, Scenario, ThermalBathState};
use crate::numerics::expm;
use crate::propagator::{
    blocks_from_unitary, CoefficientSet, HomogeneousBlocks, OneParticleHamiltonian,
};

pub const DEFAULT_DIM_CAP: usize = 20_000;

/// Truncated product Fock space: cutoffs[0] is the oscillator, the rest are
/// bath modes. Flat indices are little-endian mixed radix, so the oscillator
/// index varies fastest and bath blocks are contiguous.
#[derive(Debug, Clone)]
pub struct FockSpace {
    cutoffs: Vec<usize>,
}

impl FockSpace {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        Self::with_cap(cutoffs, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(cutoffs: Vec<usize>, cap: usize) -> Result<Self> {
        assert!(!cutoffs.is_empty() && cutoffs.iter().all(|&d| d >= 1));
        let dim: usize = cutoffs.iter().product();
        if dim > cap {
            return Err(Error::DimensionOverflow { dim, cap });
        }
        Ok(Self { cutoffs })
    }

    /// Oscillator cutoff `d_osc`, the same bath cutoff `d_bath` per mode.
    pub fn for_scenario(scn: &Scenario, d_osc: usize, d_bath: usize) -> Result<Self> {
        let mut cutoffs = vec![d_osc];
        cutoffs.resize(1 + scn.bath.len(), d_bath);
        Self::new(cutoffs)
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.iter().product()
    }

    pub fn osc_dim(&self) -> usize {
        self.cutoffs[0]
    }

    pub fn bath_dim(&self) -> usize {
        self.cutoffs[1..].iter().product()
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len() - 1
    }

    fn stride(&self, site: usize) -> usize {
        self.cutoffs[..site].iter().product()
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.cutoffs.len());
        multi
            .iter()
            .zip(&self.cutoffs)
            .fold((0usize, 1usize), |(acc, stride), (&n, &d)| {
                debug_assert!(n < d);
                (acc + n * stride, stride * d)
            })
            .0
    }

    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = Vec::with_capacity(self.cutoffs.len());
        for &d in &self.cutoffs {
            multi.push(flat % d);
            flat /= d;
        }
        multi
    }
}

/// Full density matrix on the truncated product space.
#[derive(Debug, Clone)]
pub struct FullState {
    pub rho: DMatrix<Complex64>,
    pub space: FockSpace,
}

impl FullState {
    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }
}

/// Full Hamiltonian in energy units for a frozen drive value K:
/// hbar [ omega0 a^dag a + sum_j omega_j b_j^dag b_j
///        + sum_j (f_j b_j a^dag + conj(f_j) b_j^dag a) + K a^dag + conj(K) a ].
pub fn build_hamiltonian(
    scn: &Scenario,
    space: &FockSpace,
    k_value: Complex64,
) -> Result<DMatrix<Complex64>> {
    if space.n_modes() != scn.bath.len() {
        return Err(Error::UnsupportedRegime(
            "Fock space mode count does not match the scenario bath".into(),
        ));
    }
    let hbar = scn.oscillator.hbar;
    let dim = space.dim();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let stride0 = space.stride(0);
    for col in 0..dim {
        let multi = space.unflat(col);
        let n0 = multi[0];
        let mut diag = scn.oscillator.omega0 * n0 as f64;
        for (j, mode) in scn.bath.modes.iter().enumerate() {
            diag += mode.omega * multi[j + 1] as f64;
        }
        h[(col, col)] += Complex64::new(hbar * diag, 0.0);

        for (j, mode) in scn.bath.modes.iter().enumerate() {
            let nj = multi[j + 1];
            let stride_j = space.stride(j + 1);
            // b_j a^dag
            if nj >= 1 && n0 + 1 < space.cutoffs[0] {
                let row = col + stride0 - stride_j;
                let amp = ((n0 + 1) as f64 * nj as f64).sqrt();
                h[(row, col)] += hbar * mode.f * amp;
            }
            // b_j^dag a
            if n0 >= 1 && nj + 1 < space.cutoffs[j + 1] {
                let row = col - stride0 + stride_j;
                let amp = (n0 as f64 * (nj + 1) as f64).sqrt();
                h[(row, col)] += hbar * mode.f.conj() * amp;
            }
        }

        // drive
        if k_value != Complex64::ZERO {
            if n0 + 1 < space.cutoffs[0] {
                h[(col + stride0, col)] += hbar * k_value * ((n0 + 1) as f64).sqrt();
            }
            if n0 >= 1 {
                h[(col - stride0, col)] += hbar * k_value.conj() * (n0 as f64).sqrt();
            }
        }
    }
    Ok(h)
}

/// Pure-state decomposition of the initial oscillator state within the cutoff.
fn system_pure_states(
    initial: &InitialOscState,
    d_osc: usize,
) -> Result<Vec<(f64, DVector<Complex64>)>> {
    match initial {
        InitialOscState::Number { k } => {
            if *k >= d_osc {
                return Err(Error::DimensionOverflow {
                    dim: k + 1,
                    cap: d_osc,
                });
            }
            let mut v = DVector::<Complex64>::zeros(d_osc);
            v[*k] = Complex64::ONE;
            Ok(vec![(1.0, v)])
        }
        InitialOscState::Coherent { alpha } => {
            let mut v = DVector::<Complex64>::zeros(d_osc);
            let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
            for n in 0..d_osc {
                if n > 0 {
                    amp *= alpha / (n as f64).sqrt();
                }
                v[n] = amp;
            }
            let norm = v.norm();
            Ok(vec![(1.0, v.map(|z| z / norm))])
        }
        InitialOscState::FockMatrix { rho0 } => {
            if rho0.nrows() > d_osc {
                return Err(Error::DimensionOverflow {
                    dim: rho0.nrows(),
                    cap: d_osc,
                });
            }
            let mut embedded = DMatrix::<Complex64>::zeros(d_osc, d_osc);
            embedded
                .view_mut((0, 0), (rho0.nrows(), rho0.ncols()))
                .copy_from(rho0);
            let eig = embedded.symmetric_eigen();
            let mut states = Vec::new();
            for (i, &w) in eig.eigenvalues.iter().enumerate() {
                if w > 1e-14 {
                    states.push((w, eig.eigenvectors.column(i).clone_owned()));
                }
            }
            Ok(states)
        }
    }
}

/// Per-basis-state thermal weights of the truncated bath (normalized within
/// the box) and the bath energies E_b = sum_j hbar omega_j n_j.
fn bath_weights_and_energies(scn: &Scenario, space: &FockSpace) -> (Vec<f64>, Vec<f64>) {
    let hbar = scn.oscillator.hbar;
    let beta = &scn.bath_state;
    let mode_weights: Vec<Vec<f64>> = scn
        .bath
        .modes
        .iter()
        .zip(&space.cutoffs[1..])
        .map(|(mode, &d)| {
            let raw: Vec<f64> = (0..d)
                .map(|n| {
                    if beta.is_zero_temperature() {
                        if n == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        (-beta.beta * hbar * mode.omega * n as f64).exp()
                    }
                })
                .collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / z).collect()
        })
        .collect();

    let bath_dim = space.bath_dim();
    let mut weights = Vec::with_capacity(bath_dim);
    let mut energies = Vec::with_capacity(bath_dim);
    for b in 0..bath_dim {
        let mut idx = b;
        let mut w = 1.0;
        let mut e = 0.0;
        for (j, mode) in scn.bath.modes.iter().enumerate() {
            let d = space.cutoffs[j + 1];
            let n = idx % d;
            idx /= d;
            w *= mode_weights[j][n];
            e += hbar * mode.omega * n as f64;
        }
        weights.push(w);
        energies.push(e);
    }
    (weights, energies)
}

/// Initial product state rho_S(0) (x) thermal bath on the truncated space.
pub fn initial_full_state(scn: &Scenario, space: &FockSpace) -> Result<FullState> {
    let d_osc = space.osc_dim();
    let states = system_pure_states(&scn.initial_osc, d_osc)?;
    let (weights, _) = bath_weights_and_energies(scn, space);
    let dim = space.dim();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (w_sys, phi) in &states {
        for (b, &w_bath) in weights.iter().enumerate() {
            let scale = w_sys * w_bath;
            if scale < 1e-300 {
                continue;
            }
            for n in 0..d_osc {
                for m in 0..d_osc {
                    rho[(n + d_osc * b, m + d_osc * b)] += scale * phi[n] * phi[m].conj();
                }
            }
        }
    }
    Ok(FullState {
        rho,
        space: space.clone(),
    })
}

/// Caches step unitaries keyed by the frozen drive value, so drives with few
/// distinct values (zero, constant, piecewise) cost one exponential each.
struct StepEvolver {
    h_base: DMatrix<Complex64>,
    raise: DMatrix<Complex64>,
    dt: f64,
    hbar: f64,
    cache: Vec<(Complex64, DMatrix<Complex64>)>,
}

impl StepEvolver {
    fn new(scn: &Scenario, space: &FockSpace, dt: f64) -> Result<Self> {
        let h_base = build_hamiltonian(scn, space, Complex64::ZERO)?;
        let dim = space.dim();
        let stride0 = space.stride(0);
        let mut raise = DMatrix::<Complex64>::zeros(dim, dim);
        for col in 0..dim {
            let n0 = space.unflat(col)[0];
            if n0 + 1 < space.osc_dim() {
                raise[(col + stride0, col)] = Complex64::new(((n0 + 1) as f64).sqrt(), 0.0);
            }
        }
        Ok(Self {
            h_base,
            raise,
            dt,
            hbar: scn.oscillator.hbar,
            cache: Vec::new(),
        })
    }

    fn ensure(&mut self, k: Complex64) -> usize {
        if let Some(pos) = self.cache.iter().position(|(kc, _)| *kc == k) {
            return pos;
        }
        let mut h = self.h_base.clone();
        if k != Complex64::ZERO {
            h += self.raise.map(|z| z * k * self.hbar);
            h += self.raise.adjoint().map(|z| z * k.conj() * self.hbar);
        }
        let u = expm(&h.map(|z| z * Complex64::new(0.0, -self.dt / self.hbar)));
        self.cache.push((k, u));
        self.cache.len() - 1
    }
}

/// Stepwise evolution of the full state: rho -> U_k rho U_k^dag with the
/// drive frozen at each step midpoint.
pub fn evolve(state: &FullState, scn: &Scenario, t: f64, n_steps: usize) -> Result<FullState> {
    assert!(n_steps >= 1);
    let dt = t / n_steps as f64;
    let mut evolver = StepEvolver::new(scn, &state.space, dt)?;
    let mut rho = state.rho.clone();
    for k in 0..n_steps {
        let k_mid = scn.drive.value((k as f64 + 0.5) * dt);
        let idx = evolver.ensure(k_mid);
        let u = &evolver.cache[idx].1;
        rho = u * rho * u.adjoint();
    }
    Ok(FullState {
        rho,
        space: state.space.clone(),
    })
}

/// Reduced oscillator state by tracing out every bath mode.
pub fn partial_trace_osc(state: &FullState) -> DensityMatrix {
    let d_osc = state.space.osc_dim();
    let bath_dim = state.space.bath_dim();
    let mut rho_s = DMatrix::<Complex64>::zeros(d_osc, d_osc);
    for b in 0..bath_dim {
        let offset = d_osc * b;
        for n in 0..d_osc {
            for m in 0..d_osc {
                rho_s[(n, m)] += state.rho[(offset + n, offset + m)];
            }
        }
    }
    DensityMatrix::from_elements(rho_s)
}

/// Reduced state after evolution, computed through the pure-state
/// decomposition of rho(0) (system eigenvectors x thermal bath basis), which
/// avoids materializing the full density matrix: only state vectors are
/// propagated.
pub fn evolve_reduced(
    scn: &Scenario,
    space: &FockSpace,
    t: f64,
    n_steps: usize,
) -> Result<DensityMatrix> {
    assert!(n_steps >= 1);
    let d_osc = space.osc_dim();
    let dim = space.dim();
    let states = system_pure_states(&scn.initial_osc, d_osc)?;
    let (weights, _) = bath_weights_and_energies(scn, space);
    let dt = t / n_steps as f64;
    let mut evolver = StepEvolver::new(scn, space, dt)?;

    let mut rho_s = DMatrix::<Complex64>::zeros(d_osc, d_osc);
    for (w_sys, phi) in &states {
        for (b1, &w_bath) in weights.iter().enumerate() {
            let scale = w_sys * w_bath;
            if scale < 1e-18 {
                continue;
            }
            let mut psi = DVector::<Complex64>::zeros(dim);
            for n in 0..d_osc {
                psi[n + d_osc * b1] = phi[n];
            }
            for k in 0..n_steps {
                let k_mid = scn.drive.value((k as f64 + 0.5) * dt);
                let idx = evolver.ensure(k_mid);
                psi = &evolver.cache[idx].1 * psi;
            }
            for b in 0..space.bath_dim() {
                let offset = d_osc * b;
                for n in 0..d_osc {
                    let zn = psi[offset + n];
                    if zn == Complex64::ZERO {
                        continue;
                    }
                    for m in 0..d_osc {
                        rho_s[(n, m)] += scale * zn * psi[offset + m].conj();
                    }
                }
            }
        }
    }
    Ok(DensityMatrix::from_elements(rho_s))
}

/// Exact heat distribution from the two-point bath-energy measurement.
#[derive(Debug, Clone)]
pub struct HeatStatistics {
    outcomes: Vec<(f64, f64)>,
}

impl HeatStatistics {
    fn from_contributions(mut raw: Vec<(f64, f64)>) -> Self {
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let scale = raw.iter().map(|(q, _)| q.abs()).fold(0.0, f64::max) + 1.0;
        let tol = 1e-10 * scale;
        let mut outcomes: Vec<(f64, f64)> = Vec::new();
        for (q, p) in raw {
            if p == 0.0 {
                continue;
            }
            match outcomes.last_mut() {
                Some(last) if (q - last.0).abs() <= tol => last.1 += p,
                _ => outcomes.push((q, p)),
            }
        }
        Self { outcomes }
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|(_, p)| p).sum()
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|(q, p)| q * p).sum()
    }

    /// G(nu) = sum_Q P(Q) e^{i nu Q}.
    pub fn characteristic(&self, nu: f64) -> Complex64 {
        self.outcomes
            .iter()
            .map(|&(q, p)| Complex64::from_polar(p, nu * q))
            .sum()
    }
}

/// Two-point-measurement heat statistics: the bath is projectively measured
/// in the product number basis (where its Hamiltonian is diagonal) at times 0
/// and t. Bath-energy degeneracies are summed over product states.
pub fn heat_statistics(
    scn: &Scenario,
    space: &FockSpace,
    t: f64,
    n_steps: usize,
) -> Result<HeatStatistics> {
    assert!(n_steps >= 1);
    let d_osc = space.osc_dim();
    let dim = space.dim();
    let bath_dim = space.bath_dim();
    let states = system_pure_states(&scn.initial_osc, d_osc)?;
    let (weights, energies) = bath_weights_and_energies(scn, space);
    let dt = t / n_steps as f64;
    let mut evolver = StepEvolver::new(scn, space, dt)?;

    let mut contributions: Vec<(f64, f64)> = Vec::new();
    for (w_sys, phi) in &states {
        for (b1, &w_bath) in weights.iter().enumerate() {
            let scale = w_sys * w_bath;
            if scale < 1e-18 {
                continue;
            }
            let mut psi = DVector::<Complex64>::zeros(dim);
            for n in 0..d_osc {
                psi[n + d_osc * b1] = phi[n];
            }
            for k in 0..n_steps {
                let k_mid = scn.drive.value((k as f64 + 0.5) * dt);
                let idx = evolver.ensure(k_mid);
                psi = &evolver.cache[idx].1 * psi;
            }
            for b2 in 0..bath_dim {
                let offset = d_osc * b2;
                let pr: f64 = (0..d_osc).map(|n| psi[offset + n].norm_sqr()).sum();
                contributions.push((energies[b2] - energies[b1], scale * pr));
            }
        }
    }
    Ok(HeatStatistics::from_contributions(contributions))
}

/// Characteristic function by the trace formula
/// G(nu) = Tr[ U^dag e^{i nu H_R} U e^{-i nu H_R} rho(0) ],
/// an independent route to the same quantity (valid because the initial bath
/// state is diagonal in the measured basis).
pub fn characteristic_trace(
    scn: &Scenario,
    space: &FockSpace,
    t: f64,
    n_steps: usize,
    nu: f64,
) -> Result<Complex64> {
    let dt = t / n_steps as f64;
    let mut evolver = StepEvolver::new(scn, space, dt)?;
    let dim = space.dim();
    let mut u_total = DMatrix::<Complex64>::identity(dim, dim);
    for k in 0..n_steps {
        let k_mid = scn.drive.value((k as f64 + 0.5) * dt);
        let idx = evolver.ensure(k_mid);
        u_total = &evolver.cache[idx].1 * u_total;
    }
    let (_, energies) = bath_weights_and_energies(scn, space);
    let d_osc = space.osc_dim();
    let phase = |sign: f64| {
        DVector::<Complex64>::from_iterator(
            dim,
            (0..dim).map(|i| Complex64::from_polar(1.0, sign * nu * energies[i / d_osc])),
        )
    };
    let e_plus = phase(1.0);
    let e_minus = phase(-1.0);
    let rho0 = initial_full_state(scn, space)?.rho;

    // U^dag diag(e+) U diag(e-) rho0
    let mut m = u_total.clone();
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= e_plus[i];
    }
    let m = u_total.adjoint() * m;
    let mut m2 = rho0;
    for (i, mut row) in m2.row_iter_mut().enumerate() {
        row *= e_minus[i];
    }
    let product = m * m2;
    Ok(product.diagonal().iter().sum())
}

/// Thermal bath moment Tr[(B^dag)^u B^v rho_R(0)] with B = sum_j M_j b_j(0),
/// computed with explicit truncated operators on the bath-only space.
pub fn bath_moment(
    u: usize,
    v: usize,
    coeffs: &CoefficientSet,
    bath: &BathSpec,
    state: &ThermalBathState,
    bath_cutoffs: &[usize],
    hbar: f64,
) -> Result<Complex64> {
    assert_eq!(bath.len(), bath_cutoffs.len());
    let dim: usize = bath_cutoffs.iter().product();
    if dim > DEFAULT_DIM_CAP {
        return Err(Error::DimensionOverflow {
            dim,
            cap: DEFAULT_DIM_CAP,
        });
    }
    // B = sum_j M_j b_j on the bath product space
    let mut b_op = DMatrix::<Complex64>::zeros(dim, dim);
    let mut stride = 1usize;
    for (j, &d) in bath_cutoffs.iter().enumerate() {
        for col in 0..dim {
            let nj = (col / stride) % d;
            if nj >= 1 {
                // b_j |...n_j...> = sqrt(n_j) |...n_j - 1...>
                b_op[(col - stride, col)] += coeffs.m[j] * (nj as f64).sqrt();
            }
        }
        stride *= d;
    }
    // thermal weights, normalized within the box
    let mut weights = vec![1.0f64; dim];
    let mut stride = 1usize;
    for (j, &d) in bath_cutoffs.iter().enumerate() {
        let raw: Vec<f64> = (0..d)
            .map(|n| {
                if state.is_zero_temperature() {
                    if n == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (-state.beta * hbar * bath.modes[j].omega * n as f64).exp()
                }
            })
            .collect();
        let z: f64 = raw.iter().sum();
        for (idx, w) in weights.iter_mut().enumerate() {
            *w *= raw[(idx / stride) % d] / z;
        }
        stride *= d;
    }

    let b_dag = b_op.adjoint();
    let mut m = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..u {
        m = &m * &b_dag;
    }
    for _ in 0..v {
        m = &m * &b_op;
    }
    Ok((0..dim).map(|i| m[(i, i)] * weights[i]).sum())
}

/// Independent computation of the single-excitation blocks by dense
/// scaling-and-squaring exponential (no eigendecomposition).
pub fn single_excitation_check(h: &OneParticleHamiltonian, t: f64) -> HomogeneousBlocks {
    let u = expm(&h.matrix().map(|z| z * Complex64::new(0.0, -t)));
    blocks_from_unitary(&u)
}

/// Fine-step time-ordered product of midpoint exponentials for an arbitrary
/// generator in angular-frequency units; the reference that Magnus
/// truncations are judged against.
pub fn time_ordered_unitary(
    gen: &dyn Fn(f64) -> DMatrix<Complex64>,
    t: f64,
    n_steps: usize,
) -> DMatrix<Complex64> {
    let dt = t / n_steps as f64;
    let dim = gen(0.0).nrows();
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for k in 0..n_steps {
        let h = gen((k as f64 + 0.5) * dt);
        u = expm(&h.map(|z| z * Complex64::new(0.0, -dt))) * u;
    }
    u
}

/// Max elementwise change of the reduced state when every cutoff grows by
/// `bump`; the convergence certificate used before trusting oracle numbers.
pub fn cutoff_convergence_probe(
    scn: &Scenario,
    space: &FockSpace,
    t: f64,
    n_steps: usize,
    bump: usize,
) -> Result<f64> {
    let base = evolve_reduced(scn, space, t, n_steps)?;
    let bigger = FockSpace::new(space.cutoffs().iter().map(|&d| d + bump).collect())?;
    let grown = evolve_reduced(scn, &bigger, t, n_steps)?;
    let d = base.dim();
    let mut worst = 0.0f64;
    for n in 0..d {
        for m in 0..d {
            worst = worst.max((base.element(n, m) - grown.element(n, m)).norm());
        }
    }
    Ok(worst)
}
