//! High-level facade bundling a validated scenario with its precomputed
//! single-excitation propagator.

use num_complex::Complex64;

use crate::density::{
    self, ChannelCoefficients, DensityMatrix, InitialMoments, SeriesParams, SeriesValue,
};
use crate::error::{Error, Result};
use crate::model::{InitialOscState, Scenario, SyntheticCoefficients};
use crate::observables::{self, HeatStats};
use crate::propagator::{assemble_one_particle, CoefficientSet, OneParticlePropagator};
use crate::wigner::{self, WignerGrid, WignerGridSpec};

pub struct Simulation {
    scenario: Scenario,
    propagator: OneParticlePropagator,
    moments: InitialMoments,
    synthetic: Option<SyntheticCoefficients>,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate().map_err(Error::Validation)?;
        let h = assemble_one_particle(&scenario.oscillator, &scenario.bath);
        let propagator = OneParticlePropagator::new(&h)?;
        let moments = InitialMoments::new(&scenario.initial_osc);
        Ok(Self {
            scenario,
            propagator,
            moments,
            synthetic: None,
        })
    }

    /// Replace the dynamical channel parameters with injected ones; the
    /// initial state and numerics still come from the scenario.
    pub fn with_synthetic(mut self, synthetic: SyntheticCoefficients) -> Result<Self> {
        synthetic.validate().map_err(Error::Validation)?;
        self.synthetic = Some(synthetic);
        Ok(self)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn propagator(&self) -> &OneParticlePropagator {
        &self.propagator
    }

    pub fn moments(&self) -> &InitialMoments {
        &self.moments
    }

    pub fn series_params(&self) -> SeriesParams {
        SeriesParams::from_numerics(&self.scenario.numerics)
    }

    pub fn coefficients(&self, t: f64) -> Result<CoefficientSet> {
        self.propagator.coefficients(&self.scenario, t)
    }

    pub fn channel(&self, t: f64) -> Result<ChannelCoefficients> {
        if let Some(synthetic) = self.synthetic {
            return Ok(synthetic.into());
        }
        Ok(ChannelCoefficients::from(&self.coefficients(t)?))
    }

    pub fn rho_element(&self, t: f64, n: usize, m: usize) -> Result<SeriesValue> {
        let cutoff = self.scenario.numerics.fock_cutoff_osc;
        if n >= cutoff || m >= cutoff {
            return Err(Error::DimensionOverflow {
                dim: n.max(m) + 1,
                cap: cutoff,
            });
        }
        density::rho_element(
            n,
            m,
            &self.channel(t)?,
            &self.moments,
            &self.series_params(),
        )
    }

    pub fn rho_matrix(&self, t: f64, dim: usize) -> Result<DensityMatrix> {
        if dim > self.scenario.numerics.fock_cutoff_osc {
            return Err(Error::DimensionOverflow {
                dim,
                cap: self.scenario.numerics.fock_cutoff_osc,
            });
        }
        density::rho_matrix(&self.channel(t)?, &self.moments, dim, &self.series_params())
    }

    /// Grow the cutoff until the trace leak is below `leak_target`, capped by
    /// the scenario's fock_cutoff_osc.
    pub fn rho_matrix_auto(&self, t: f64, leak_target: f64) -> Result<DensityMatrix> {
        density::rho_matrix_auto(
            &self.channel(t)?,
            &self.moments,
            &self.series_params(),
            leak_target,
            self.scenario.numerics.fock_cutoff_osc,
        )
    }

    /// P_{k -> n} for n < count; requires a number initial state.
    pub fn transition_probabilities(&self, t: f64, count: usize) -> Result<Vec<f64>> {
        let InitialOscState::Number { k } = self.scenario.initial_osc else {
            return Err(Error::UnsupportedRegime(
                "transition probabilities need a number initial state".into(),
            ));
        };
        density::transition_distribution(k, count, &self.channel(t)?, &self.series_params())
    }

    pub fn mean_number(&self, t: f64) -> Result<f64> {
        Ok(observables::mean_number(
            &self.coefficients(t)?,
            &self.scenario.initial_osc,
        ))
    }

    pub fn energy(&self, t: f64) -> Result<f64> {
        Ok(observables::energy(
            &self.coefficients(t)?,
            &self.scenario.initial_osc,
            &self.scenario.oscillator,
        ))
    }

    pub fn mean_heat(&self, t: f64) -> Result<HeatStats> {
        Ok(observables::mean_heat(
            &self.coefficients(t)?,
            &self.scenario.bath,
            &self.scenario.bath_state,
            &self.scenario.initial_osc,
            self.scenario.oscillator.hbar,
        ))
    }

    /// Wigner function of the evolved state. Dispatches to the two regimes
    /// with exact representations: a number initial state with no drive
    /// (probability mixture over number states) or a coherent initial state
    /// with zero thermal injection (displaced Gaussian).
    pub fn wigner(&self, t: f64, spec: &WignerGridSpec) -> Result<WignerGrid> {
        let hbar = self.scenario.oscillator.hbar;
        let omega0 = self.scenario.oscillator.omega0;
        let ch = self.channel(t)?;
        match self.scenario.initial_osc {
            InitialOscState::Number { k } if ch.zeta == Complex64::ZERO => {
                let count = self.wigner_order_count(&ch, k);
                let probs = density::transition_distribution(k, count, &ch, &self.series_params())?;
                wigner::wigner_mixture(&probs, spec, hbar, omega0)
            }
            InitialOscState::Coherent { alpha } if ch.eta <= 1e-12 => Ok(
                wigner::wigner_coherent_evolved(alpha, ch.g, ch.zeta, spec, hbar, omega0),
            ),
            _ => Err(Error::UnsupportedRegime(
                "wigner needs a number state with zero drive or a coherent state at zero \
                 temperature; use `rho` for the general matrix"
                    .into(),
            )),
        }
    }

    fn wigner_order_count(&self, ch: &ChannelCoefficients, k: usize) -> usize {
        let mean = density::mean_occupation(ch, &InitialMoments::Number(k));
        let guess = (mean + 6.0 * (mean + 1.0).sqrt()).ceil() as usize + k + 4;
        guess.min(self.scenario.numerics.fock_cutoff_osc)
    }
}
