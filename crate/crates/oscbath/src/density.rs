//! Reduced-density-matrix elements of the oscillator in the number basis.
//!
//! The engine evaluates the quadruple series expressing <n|rho_S(t)|m> in
//! terms of three channel parameters (G, zeta, eta) and the initial-state
//! moments Tr[(a^dag)^p a^q rho_S(0)]. Terms are assembled in log-magnitude /
//! phase form with exact unit factors for the alternating signs, and summed
//! with compensated accumulation: intermediate terms grow combinatorially
//! before the factorial suppression wins, so naive floating-point evaluation
//! loses the cancellation.
//!
//! Index conventions, with j1/j2 the powers of conj(G)/G:
//!   p = s + m - j1, r = s + n - j2, u <= min(p, r);
//! zeta enters as conj(zeta)^{p-u} zeta^{r-u} and eta as u! eta^u. A zero
//! coefficient raised to the zeroth power contributes exactly 1; this is
//! enforced structurally by skipping absent factors, which is what makes the
//! degenerate limits (pure decay, equilibrium) exact rather than approximate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{InitialOscState, NumericsParams, SyntheticCoefficients};
use crate::numerics::{ComplexAccumulator, LnFactorial};
use crate::par;
use crate::propagator::CoefficientSet;

/// The three numbers the series needs; the engine does not care whether they
/// came from the propagator or were injected synthetically.
#[derive(Debug, Clone, Copy)]
pub struct ChannelCoefficients {
    pub g: Complex64,
    pub zeta: Complex64,
    pub eta: f64,
}

impl From<&CoefficientSet> for ChannelCoefficients {
    fn from(c: &CoefficientSet) -> Self {
        Self {
            g: c.g,
            zeta: c.zeta,
            eta: c.eta,
        }
    }
}

impl From<SyntheticCoefficients> for ChannelCoefficients {
    fn from(s: SyntheticCoefficients) -> Self {
        Self {
            g: s.g,
            zeta: s.zeta,
            eta: s.eta,
        }
    }
}

/// Initial-state moments Tr[(a^dag)^p a^q rho_S(0)].
#[derive(Debug, Clone)]
pub enum InitialMoments {
    Number(usize),
    Coherent(Complex64),
    Matrix(DMatrix<Complex64>),
}

impl InitialMoments {
    pub fn new(state: &InitialOscState) -> Self {
        match state {
            InitialOscState::Number { k } => InitialMoments::Number(*k),
            InitialOscState::Coherent { alpha } => InitialMoments::Coherent(*alpha),
            InitialOscState::FockMatrix { rho0 } => InitialMoments::Matrix(rho0.clone()),
        }
    }

    /// Largest p (or q) with a nonvanishing moment, if finite.
    pub fn max_order(&self) -> Option<usize> {
        match self {
            InitialMoments::Number(k) => Some(*k),
            InitialMoments::Coherent(alpha) if *alpha == Complex64::ZERO => Some(0),
            InitialMoments::Coherent(_) => None,
            InitialMoments::Matrix(rho0) => Some(rho0.nrows() - 1),
        }
    }

    /// True when moment(p, q) vanishes for p != q.
    pub fn diagonal_only(&self) -> bool {
        match self {
            InitialMoments::Number(_) => true,
            InitialMoments::Coherent(alpha) => *alpha == Complex64::ZERO,
            InitialMoments::Matrix(rho0) => {
                // diagonal rho0 has moments only at p = q
                let dim = rho0.nrows();
                (0..dim).all(|i| (0..dim).all(|j| i == j || rho0[(i, j)] == Complex64::ZERO))
            }
        }
    }

    /// Moment value. Overflows f64 for very large coherent amplitudes; the
    /// engine uses the log form below instead.
    pub fn moment(&self, p: usize, q: usize) -> Complex64 {
        let lf = LnFactorial::new(p.max(q).max(self.max_order().unwrap_or(0)) + 1);
        match self.moment_polar(p, q, &lf) {
            None => Complex64::ZERO,
            Some((ln, phase)) => Complex64::from_polar(ln.exp(), phase),
        }
    }

    /// Moment in (ln magnitude, phase) form; `None` for an exact zero.
    fn moment_polar(&self, p: usize, q: usize, lf: &LnFactorial) -> Option<(f64, f64)> {
        match self {
            InitialMoments::Number(k) => (p == q && p <= *k).then(|| (lf.ln_falling(*k, p), 0.0)),
            InitialMoments::Coherent(alpha) => {
                if *alpha == Complex64::ZERO {
                    (p == 0 && q == 0).then_some((0.0, 0.0))
                } else {
                    let (mag, arg) = (alpha.norm(), alpha.arg());
                    Some((((p + q) as f64) * mag.ln(), (q as f64 - p as f64) * arg))
                }
            }
            InitialMoments::Matrix(rho0) => {
                let dim = rho0.nrows();
                let mut total = Complex64::ZERO;
                for c in q..dim {
                    let row = c - q + p;
                    if row >= dim {
                        continue;
                    }
                    let weight = (0.5 * (lf.ln_falling(c, q) + lf.ln_falling(row, p))).exp();
                    total += weight * rho0[(c, row)];
                }
                (total != Complex64::ZERO).then(|| (total.norm().ln(), total.arg()))
            }
        }
    }
}

/// Truncation controls for the series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesParams {
    pub tol: f64,
    pub smax: usize,
    /// Skip the closed-form dispatch and always run the series (cross-checks).
    pub force_general: bool,
}

impl SeriesParams {
    pub fn from_numerics(num: &NumericsParams) -> Self {
        Self {
            tol: num.series_tol,
            smax: num.series_smax,
            force_general: false,
        }
    }

    pub fn general(mut self) -> Self {
        self.force_general = true;
        self
    }
}

impl Default for SeriesParams {
    fn default() -> Self {
        Self::from_numerics(&NumericsParams::default())
    }
}

/// A converged series value with its truncation diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub terms: usize,
}

impl SeriesValue {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            terms: 0,
        }
    }
}

/// <n|rho_S(t)|m> from the channel parameters and initial moments.
pub fn rho_element(
    n: usize,
    m: usize,
    ch: &ChannelCoefficients,
    moments: &InitialMoments,
    params: &SeriesParams,
) -> Result<SeriesValue> {
    let lf = LnFactorial::new(params.smax + n.max(m) + 2);
    rho_element_with(n, m, ch, moments, params, &lf)
}

/// Closed form of the coherent-state element in the eta = 0 regime:
/// mu^n conj(mu)^m e^{-|mu|^2} / sqrt(n! m!) with mu = alpha G - i zeta.
pub fn coherent_element_closed_form(
    n: usize,
    m: usize,
    alpha: Complex64,
    g: Complex64,
    zeta: Complex64,
) -> Complex64 {
    let mu = alpha * g - Complex64::new(0.0, 1.0) * zeta;
    if mu == Complex64::ZERO {
        return if n == 0 && m == 0 {
            Complex64::ONE
        } else {
            Complex64::ZERO
        };
    }
    let lf = LnFactorial::new(n.max(m) + 1);
    let ln = ((n + m) as f64) * mu.norm().ln() - mu.norm_sqr() - 0.5 * (lf.get(n) + lf.get(m));
    Complex64::from_polar(ln.exp(), (n as f64 - m as f64) * mu.arg())
}

/// Equilibrium (fully decohered) element delta_nm eta^n / (1+eta)^{n+1},
/// independent of the initial state.
pub fn equilibrium_element(n: usize, m: usize, eta: f64) -> Complex64 {
    if n != m {
        return Complex64::ZERO;
    }
    Complex64::new(eta.powi(n as i32) / (1.0 + eta).powi(n as i32 + 1), 0.0)
}

enum UMode {
    /// zeta = 0 forces u = p = r.
    SingleU,
    /// eta = 0 forces u = 0.
    UZero,
    /// full inner sweep over u.
    Sweep,
}

struct Pieces {
    g: Option<(f64, f64)>,
    zeta: Option<(f64, f64)>,
    ln_eta: Option<f64>,
    prefix: f64,
}

fn polar_of(z: Complex64) -> Option<(f64, f64)> {
    (z != Complex64::ZERO).then(|| (z.norm().ln(), z.arg()))
}

pub(crate) fn rho_element_with(
    n: usize,
    m: usize,
    ch: &ChannelCoefficients,
    moments: &InitialMoments,
    params: &SeriesParams,
    lf: &LnFactorial,
) -> Result<SeriesValue> {
    let zeta_zero = ch.zeta == Complex64::ZERO;
    let g_zero = ch.g == Complex64::ZERO;
    let eta_zero = ch.eta == 0.0;

    if !params.force_general {
        if g_zero && zeta_zero {
            return Ok(SeriesValue::exact(equilibrium_element(n, m, ch.eta)));
        }
        if eta_zero {
            if let InitialMoments::Coherent(alpha) = moments {
                return Ok(SeriesValue::exact(coherent_element_closed_form(
                    n, m, *alpha, ch.g, ch.zeta,
                )));
            }
        }
    }

    // With no drive, diagonal-only moments keep the matrix exactly diagonal.
    if zeta_zero && moments.diagonal_only() && n != m {
        return Ok(SeriesValue::exact(Complex64::ZERO));
    }

    let mode = if zeta_zero {
        UMode::SingleU
    } else if eta_zero {
        UMode::UZero
    } else {
        UMode::Sweep
    };

    let pieces = Pieces {
        g: polar_of(ch.g),
        zeta: polar_of(ch.zeta),
        ln_eta: (ch.eta > 0.0).then(|| ch.eta.ln()),
        prefix: -0.5 * (lf.get(n) + lf.get(m)),
    };
    let order_cap = moments.max_order().unwrap_or(usize::MAX);
    let diagonal = moments.diagonal_only();

    let mut acc = ComplexAccumulator::new();
    let mut recent = [f64::INFINITY; 3];
    let mut partials = [Complex64::ZERO; 3];

    for s in 0..=params.smax {
        let mut s_acc = ComplexAccumulator::new();
        let j1_max = (s + m).min(order_cap);
        let j2_max = (s + n).min(order_cap);
        for j1 in 0..=j1_max {
            let p = s + m - j1;
            for j2 in 0..=j2_max {
                if diagonal && j1 != j2 {
                    continue;
                }
                let Some((mom_ln, mom_ph)) = moments.moment_polar(j1, j2, lf) else {
                    continue;
                };
                let r = s + n - j2;
                match mode {
                    UMode::SingleU => {
                        if p == r {
                            add_term(
                                &mut s_acc, lf, &pieces, s, n, m, p, r, p, j1, j2, mom_ln, mom_ph,
                            );
                        }
                    }
                    UMode::UZero => {
                        add_term(
                            &mut s_acc, lf, &pieces, s, n, m, p, r, 0, j1, j2, mom_ln, mom_ph,
                        );
                    }
                    UMode::Sweep => {
                        for u in 0..=p.min(r) {
                            add_term(
                                &mut s_acc, lf, &pieces, s, n, m, p, r, u, j1, j2, mom_ln, mom_ph,
                            );
                        }
                    }
                }
            }
        }
        let term = s_acc.value();
        if !term.re.is_finite() || !term.im.is_finite() {
            return Err(Error::SeriesNonConvergence {
                n,
                m,
                terms: s + 1,
                last: partials,
            });
        }
        acc.add(term);
        recent[s % 3] = term.norm();
        partials[s % 3] = acc.value();
        let threshold = params.tol * acc.value().norm().max(1.0);
        if s >= 2 && recent.iter().all(|&d| d <= threshold) {
            return Ok(SeriesValue {
                value: acc.value(),
                error_estimate: recent.iter().copied().fold(0.0, f64::max),
                terms: s + 1,
            });
        }
    }
    Err(Error::SeriesNonConvergence {
        n,
        m,
        terms: params.smax + 1,
        last: partials,
    })
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn add_term(
    acc: &mut ComplexAccumulator,
    lf: &LnFactorial,
    pieces: &Pieces,
    s: usize,
    n: usize,
    m: usize,
    p: usize,
    r: usize,
    u: usize,
    j1: usize,
    j2: usize,
    mom_ln: f64,
    mom_ph: f64,
) {
    let mut ln = pieces.prefix - lf.get(s)
        + lf.ln_binomial(s + m, p)
        + lf.ln_binomial(s + n, r)
        + lf.ln_binomial(p, u)
        + lf.ln_binomial(r, u)
        + lf.get(u)
        + mom_ln;
    let mut phase = mom_ph;
    if j1 + j2 > 0 {
        let Some((mag, arg)) = pieces.g else { return };
        ln += ((j1 + j2) as f64) * mag;
        phase += (j2 as f64 - j1 as f64) * arg;
    }
    let zeta_power = (p - u) + (r - u);
    if zeta_power > 0 {
        let Some((mag, arg)) = pieces.zeta else {
            return;
        };
        ln += (zeta_power as f64) * mag;
        phase += ((r - u) as f64 - (p - u) as f64) * arg;
    }
    if u > 0 {
        let Some(ln_eta) = pieces.ln_eta else { return };
        ln += (u as f64) * ln_eta;
    }
    let mut z = Complex64::from_polar(ln.exp(), phase);
    // exact unit factors: i^{p-r} and (-1)^s
    z *= match (p as i64 - r as i64).rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    if s % 2 == 1 {
        z = -z;
    }
    acc.add(z);
}

/// P_{k -> n}(t): diagonal element for an initial number state |k>.
pub fn transition_probability(
    k: usize,
    n: usize,
    ch: &ChannelCoefficients,
    params: &SeriesParams,
) -> Result<f64> {
    let sv = rho_element(n, n, ch, &InitialMoments::Number(k), params)?;
    Ok(sv.value.re)
}

/// P_{k -> n} for n = 0..count.
pub fn transition_distribution(
    k: usize,
    count: usize,
    ch: &ChannelCoefficients,
    params: &SeriesParams,
) -> Result<Vec<f64>> {
    let lf = LnFactorial::new(params.smax + count.max(k) + 2);
    par::map_indexed(count, |n| {
        rho_element_with(n, n, ch, &InitialMoments::Number(k), params, &lf).map(|sv| sv.value.re)
    })
    .into_iter()
    .collect()
}

/// Truncated density matrix with health diagnostics. Each element is computed
/// independently (no mirroring), so the hermiticity defect is a real measure
/// of series accuracy, not an artifact of symmetrization.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    elems: DMatrix<Complex64>,
    trace: f64,
    hermiticity_defect: f64,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn from_elements(elems: DMatrix<Complex64>) -> Self {
        assert_eq!(elems.nrows(), elems.ncols());
        let trace = elems.diagonal().iter().map(|z| z.re).sum();
        let hermiticity_defect = (&elems - elems.adjoint()).map(|z| z.norm()).max();
        let herm = (&elems + elems.adjoint()).scale(0.5);
        let min_eigenvalue = herm
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Self {
            elems,
            trace,
            hermiticity_defect,
            min_eigenvalue,
        }
    }

    pub fn dim(&self) -> usize {
        self.elems.nrows()
    }

    pub fn elems(&self) -> &DMatrix<Complex64> {
        &self.elems
    }

    pub fn element(&self, n: usize, m: usize) -> Complex64 {
        self.elems[(n, m)]
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// 1 - trace: probability mass beyond the cutoff (up to series error).
    pub fn trace_defect(&self) -> f64 {
        1.0 - self.trace
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }

    pub fn min_eigenvalue_estimate(&self) -> f64 {
        self.min_eigenvalue
    }

    /// sum_n n rho_nn over the stored block.
    pub fn mean_occupation(&self) -> f64 {
        self.elems
            .diagonal()
            .iter()
            .enumerate()
            .map(|(n, z)| n as f64 * z.re)
            .sum()
    }

    pub fn max_offdiagonal(&self) -> f64 {
        let dim = self.dim();
        let mut best = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    best = best.max(self.elems[(i, j)].norm());
                }
            }
        }
        best
    }
}

/// Full dim x dim element fill; elements are evaluated concurrently but each
/// one uses a fixed summation order, so results are schedule-independent.
pub fn rho_matrix(
    ch: &ChannelCoefficients,
    moments: &InitialMoments,
    dim: usize,
    params: &SeriesParams,
) -> Result<DensityMatrix> {
    let lf = LnFactorial::new(params.smax + dim + 2);
    let cells = par::map_indexed(dim * dim, |idx| {
        let (n, m) = (idx / dim, idx % dim);
        rho_element_with(n, m, ch, moments, params, &lf).map(|sv| sv.value)
    });
    let mut elems = DMatrix::<Complex64>::zeros(dim, dim);
    for (idx, cell) in cells.into_iter().enumerate() {
        elems[(idx / dim, idx % dim)] = cell?;
    }
    Ok(DensityMatrix::from_elements(elems))
}

/// Grow the cutoff until the trace defect drops below `leak_target` (or the
/// cap is reached; the caller can inspect the defect of the returned matrix).
pub fn rho_matrix_auto(
    ch: &ChannelCoefficients,
    moments: &InitialMoments,
    params: &SeriesParams,
    leak_target: f64,
    dim_cap: usize,
) -> Result<DensityMatrix> {
    let mean = mean_occupation(ch, moments);
    let mut dim = ((mean + 6.0 * (mean + 1.0).sqrt()).ceil() as usize + 4)
        .min(dim_cap)
        .max(2);
    loop {
        let rho = rho_matrix(ch, moments, dim, params)?;
        if rho.trace_defect() <= leak_target || dim >= dim_cap {
            return Ok(rho);
        }
        dim = (dim + dim / 2 + 2).min(dim_cap);
    }
}

/// <a^dag a>_t from the channel parameters and initial moments:
/// |G|^2 m11 + |zeta|^2 + eta + 2 Re[i conj(zeta) G m01].
pub fn mean_occupation(ch: &ChannelCoefficients, moments: &InitialMoments) -> f64 {
    let m11 = moments.moment(1, 1).re;
    let m01 = moments.moment(0, 1);
    ch.g.norm_sqr() * m11
        + ch.zeta.norm_sqr()
        + ch.eta
        + 2.0 * (Complex64::new(0.0, 1.0) * ch.zeta.conj() * ch.g * m01).re
}
