//! Scenario-level invariant suite behind the CLI `validate` command: sum
//! rules, state health, moment consistency, closed-form limits where the
//! scenario sits in one, and (when the truncated product space is small
//! enough) full oracle equivalence.

use num_complex::Complex64;

use crate::density::{self, InitialMoments, SeriesParams};
use crate::error::Result;
use crate::model::{InitialOscState, Scenario};
use crate::oracle;
use crate::sim::Simulation;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    /// Run the oracle cross-check even when the space is large.
    pub force_oracle: bool,
    /// Skip the oracle when the full dimension exceeds this.
    pub oracle_dim_limit: usize,
    pub oracle_d_osc: usize,
    pub oracle_d_bath: usize,
    pub oracle_steps: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            force_oracle: false,
            oracle_dim_limit: 1000,
            oracle_d_osc: 9,
            oracle_d_bath: 6,
            oracle_steps: 64,
        }
    }
}

/// Run every applicable check; the caller decides what a failure means.
pub fn run_scenario_checks(scn: &Scenario, opts: &CheckOptions) -> Result<Vec<CheckOutcome>> {
    let sim = Simulation::new(scn.clone())?;
    let mut out = Vec::new();
    let t_ref = sample_times(scn);

    // excitation sum rules over sampled times
    {
        let mut worst = 0.0f64;
        for &t in &t_ref {
            let c = sim.coefficients(t)?;
            worst = worst.max(c.excitation_defect());
            for j in 0..scn.bath.len() {
                worst = worst.max(c.lambda_row_defect(j));
            }
        }
        out.push(CheckOutcome::new(
            "excitation-sum-rules",
            worst <= 1e-10,
            format!(
                "max defect {worst:.3e} over {} times (tol 1e-10)",
                t_ref.len()
            ),
        ));
    }

    // state health at the reference time
    let t_probe = t_ref[t_ref.len() / 2];
    {
        let rho = sim.rho_matrix_auto(t_probe, 1e-6)?;
        let herm = rho.hermiticity_defect();
        let trace = rho.trace();
        let min_eig = rho.min_eigenvalue_estimate();
        let healthy =
            herm <= 1e-9 && (1.0 - 1e-6..=1.0 + 1e-9).contains(&trace) && min_eig >= -1e-8;
        out.push(CheckOutcome::new(
            "state-health",
            healthy,
            format!(
                "t={t_probe:.3}: hermiticity {herm:.3e}, trace {trace:.12}, min eig {min_eig:.3e}, dim {}",
                rho.dim()
            ),
        ));

        // first-moment sum rule against the Heisenberg route; needs a much
        // tighter tail than the health check to resolve 1e-8
        let tight = sim.rho_matrix_auto(t_probe, 1e-11)?;
        let mean_direct = sim.mean_number(t_probe)?;
        let mean_matrix = tight.mean_occupation();
        let diff = (mean_direct - mean_matrix).abs();
        out.push(CheckOutcome::new(
            "first-moment-sum-rule",
            diff <= 1e-8,
            format!("matrix {mean_matrix:.12} vs direct {mean_direct:.12} (tol 1e-8)"),
        ));
    }

    // closed-form limits when the scenario sits in one
    if scn.bath.is_empty() {
        if let InitialOscState::Coherent { alpha } = scn.initial_osc {
            let ch = sim.channel(t_probe)?;
            let forced = sim.series_params().general();
            let mut worst = 0.0f64;
            for n in 0..5 {
                for m in 0..5 {
                    let series = density::rho_element(n, m, &ch, sim.moments(), &forced)?.value;
                    let closed = density::coherent_element_closed_form(n, m, alpha, ch.g, ch.zeta);
                    worst = worst.max((series - closed).norm());
                }
            }
            out.push(CheckOutcome::new(
                "lossless-coherent-closed-form",
                worst <= 1e-10,
                format!("max |series - closed| = {worst:.3e} (tol 1e-10)"),
            ));
        }
    }
    if scn.drive.is_zero() {
        if let InitialOscState::Number { .. } = scn.initial_osc {
            let rho = sim.rho_matrix(t_probe, 8.min(scn.numerics.fock_cutoff_osc))?;
            let offdiag = rho.max_offdiagonal();
            out.push(CheckOutcome::new(
                "undriven-number-state-diagonal",
                offdiag == 0.0,
                format!("max off-diagonal {offdiag:.3e} (must be exactly 0)"),
            ));
        }
    }

    // zero-coupling heat
    if scn.bath.is_empty() {
        let heat = sim.mean_heat(t_probe)?;
        out.push(CheckOutcome::new(
            "zero-coupling-heat",
            heat.mean_q == 0.0,
            format!("mean Q = {} (must be exactly 0)", heat.mean_q),
        ));
    }

    // oracle equivalence on a desk-scale truncation, probed at an early time
    // where these cutoffs are certified converged
    let t_oracle = t_ref[0];
    let space = oracle::FockSpace::for_scenario(scn, opts.oracle_d_osc, opts.oracle_d_bath)?;
    if opts.force_oracle || space.dim() <= opts.oracle_dim_limit {
        let reduced = oracle::evolve_reduced(scn, &space, t_oracle, opts.oracle_steps)?;
        let params = sim.series_params();
        let ch = sim.channel(t_oracle)?;
        let d_cmp = reduced.dim().min(6);
        let mut worst = 0.0f64;
        for n in 0..d_cmp {
            for m in 0..d_cmp {
                let series = density::rho_element(n, m, &ch, sim.moments(), &params)?.value;
                worst = worst.max((series - reduced.element(n, m)).norm());
            }
        }
        out.push(CheckOutcome::new(
            "oracle-equivalence",
            worst <= 5e-4,
            format!(
                "max elementwise |series - oracle| = {worst:.3e} on a {d_cmp}x{d_cmp} block \
                 (tol 5e-4, cutoffs {:?})",
                space.cutoffs()
            ),
        ));
    }

    Ok(out)
}

fn sample_times(scn: &Scenario) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / scn.oscillator.omega0;
    (1..=8).map(|i| 0.4 * period * i as f64).collect()
}

/// Mean-heat agreement between the coefficient formula and the oracle
/// two-point measurement, using converged desk-scale cutoffs.
pub fn heat_cross_check(
    scn: &Scenario,
    t: f64,
    d_osc: usize,
    d_bath: usize,
    n_steps: usize,
) -> Result<(f64, f64)> {
    let sim = Simulation::new(scn.clone())?;
    let analytic = sim.mean_heat(t)?.mean_q;
    let space = oracle::FockSpace::for_scenario(scn, d_osc, d_bath)?;
    let stats = oracle::heat_statistics(scn, &space, t, n_steps)?;
    Ok((analytic, stats.mean()))
}

/// Series vs oracle elementwise distance at time t over an n x n block.
pub fn oracle_distance(
    scn: &Scenario,
    t: f64,
    block: usize,
    d_osc: usize,
    d_bath: usize,
    n_steps: usize,
) -> Result<f64> {
    let sim = Simulation::new(scn.clone())?;
    let space = oracle::FockSpace::for_scenario(scn, d_osc, d_bath)?;
    let reduced = oracle::evolve_reduced(scn, &space, t, n_steps)?;
    let ch = sim.channel(t)?;
    let params = sim.series_params();
    let mut worst = 0.0f64;
    for n in 0..block.min(reduced.dim()) {
        for m in 0..block.min(reduced.dim()) {
            let series = density::rho_element(n, m, &ch, sim.moments(), &params)?.value;
            worst = worst.max((series - reduced.element(n, m)).norm());
        }
    }
    Ok(worst)
}

/// Max off-diagonal magnitude of the series matrix for synthetic channel
/// parameters; used by the decoherence-trend check.
pub fn synthetic_max_offdiagonal(
    g: Complex64,
    eta: f64,
    alpha: Complex64,
    dim: usize,
) -> Result<f64> {
    let ch = density::ChannelCoefficients {
        g,
        zeta: Complex64::ZERO,
        eta,
    };
    let moments = InitialMoments::Coherent(alpha);
    let rho = density::rho_matrix(&ch, &moments, dim, &SeriesParams::default())?;
    Ok(rho.max_offdiagonal())
}
