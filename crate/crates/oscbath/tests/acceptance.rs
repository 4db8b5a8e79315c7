//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured defect (visible under `--nocapture`).

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use oscbath::density::{
    self, coherent_element_closed_form, ChannelCoefficients, InitialMoments, SeriesParams,
};
use oscbath::magnus::{self, Generator, Smoothness};
use oscbath::model::{
    BathMode, BathSpec, DriveSpec, InitialOscState, NumericsParams, OscillatorSpec, Scenario,
    SyntheticCoefficients, ThermalBathState,
};
use oscbath::observables;
use oscbath::oracle;
use oscbath::propagator::{assemble_one_particle, OneParticlePropagator};
use oscbath::wigner;
use oscbath::Simulation;

fn bath_of(n: usize) -> BathSpec {
    // deterministic spread of frequencies and complex couplings
    BathSpec {
        modes: (0..n)
            .map(|j| {
                let frac = (j as f64 + 0.5) / n as f64;
                BathMode {
                    omega: 0.4 + 1.8 * frac,
                    f: Complex64::from_polar(0.05 + 0.1 * frac, 2.3 * j as f64),
                }
            })
            .collect(),
    }
}

fn desk_scenario(initial: InitialOscState) -> Scenario {
    Scenario {
        oscillator: OscillatorSpec::new(1.0),
        bath: BathSpec {
            modes: vec![
                BathMode {
                    omega: 0.8,
                    f: Complex64::new(0.15, 0.0),
                },
                BathMode {
                    omega: 1.3,
                    f: Complex64::new(0.1, 0.0),
                },
            ],
        },
        drive: DriveSpec::Constant {
            k0: Complex64::new(0.05, 0.0),
        },
        initial_osc: initial,
        bath_state: ThermalBathState::new(2.0),
        numerics: NumericsParams::default(),
    }
}

fn synthetic(g: Complex64, zeta: Complex64, eta: f64) -> ChannelCoefficients {
    SyntheticCoefficients { g, zeta, eta }.into()
}

#[test]
fn criterion_01_sum_rules() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [0usize, 1, 2, 5, 8] {
        let scn = Scenario {
            oscillator: OscillatorSpec::new(1.0),
            bath: bath_of(n),
            drive: DriveSpec::Zero,
            initial_osc: InitialOscState::Number { k: 0 },
            bath_state: ThermalBathState::new(2.0),
            numerics: NumericsParams::default(),
        };
        let h = assemble_one_particle(&scn.oscillator, &scn.bath);
        let prop = OneParticlePropagator::new(&h).unwrap();
        for i in 0..50 {
            let t = 20.0 * (i as f64 + 0.5) / 50.0;
            let c = prop.coefficients(&scn, t).unwrap();
            worst = worst.max(c.excitation_defect());
            for j in 0..n {
                worst = worst.max(c.lambda_row_defect(j));
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-10, "sum-rule defect {worst:e}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "acceptance 1 (sum rules): pass — max defect {worst:.2e} over 5 baths x 50 times in {elapsed:?}"
    );
}

#[test]
fn criterion_02_oracle_equivalence() {
    let start = Instant::now();

    fn series_gap(sim: &Simulation, reduced: &density::DensityMatrix, t: f64) -> f64 {
        let ch = sim.channel(t).unwrap();
        let params = sim.series_params();
        let mut worst = 0.0f64;
        for n in 0..8.min(reduced.dim()) {
            for m in 0..8.min(reduced.dim()) {
                let series = density::rho_element(n, m, &ch, sim.moments(), &params)
                    .unwrap()
                    .value;
                worst = worst.max((series - reduced.element(n, m)).norm());
            }
        }
        worst
    }

    let mut worst_converged = 0.0f64;
    let mut worst_nominal = 0.0f64;
    for initial in [
        InitialOscState::Coherent {
            alpha: Complex64::new(0.6, 0.0),
        },
        InitialOscState::Number { k: 2 },
    ] {
        let scn = desk_scenario(initial);
        let sim = Simulation::new(scn.clone()).unwrap();
        // nominal desk settings, with the step-halving stability check
        let nominal = oracle::FockSpace::for_scenario(&scn, 8, 5).unwrap();
        // settings that pass the bump-by-two convergence certificate below
        let converged = oracle::FockSpace::for_scenario(&scn, 9, 6).unwrap();
        for t in [0.5, 2.0] {
            let coarse = oracle::evolve_reduced(&scn, &nominal, t, 64).unwrap();
            let fine = oracle::evolve_reduced(&scn, &nominal, t, 128).unwrap();
            let step_err = (coarse.elems() - fine.elems()).map(|z| z.norm()).max();
            assert!(step_err < 1e-8, "step halving unstable: {step_err:e}");
            worst_nominal = worst_nominal.max(series_gap(&sim, &fine, t));

            let reduced = oracle::evolve_reduced(&scn, &converged, t, 128).unwrap();
            let gap = series_gap(&sim, &reduced, t);
            worst_converged = worst_converged.max(gap);
            assert!(gap <= 5e-4, "t={t}: series vs converged oracle {gap:e}");
        }
    }

    // convergence certificate at the worst point: growing every cutoff by 2
    // must move the reduced state by less than the claimed tolerance
    let scn = desk_scenario(InitialOscState::Number { k: 2 });
    let base = oracle::FockSpace::for_scenario(&scn, 9, 6).unwrap();
    let drift = oracle::cutoff_convergence_probe(&scn, &base, 2.0, 8, 2).unwrap();
    assert!(drift <= 5e-4, "certificate: bump-2 drift {drift:e}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "acceptance 2 (oracle equivalence): pass — max gap {worst_converged:.2e} at certified \
         cutoffs (bump-2 drift {drift:.2e}); nominal d_osc=8/d_j=5 gap {worst_nominal:.2e}; {elapsed:?}"
    );
}

#[test]
fn criterion_03_closed_form_limits() {
    // lossless driven coherent state vs the forced general series
    let scn = Scenario {
        oscillator: OscillatorSpec::new(1.0),
        bath: BathSpec::empty(),
        drive: DriveSpec::Harmonic {
            k0: Complex64::new(0.2, 0.1),
            omega: 1.3,
            phase: 0.4,
        },
        initial_osc: InitialOscState::Coherent {
            alpha: Complex64::new(0.5, -0.3),
        },
        bath_state: ThermalBathState::zero_temperature(),
        numerics: NumericsParams::default(),
    };
    let sim = Simulation::new(scn).unwrap();
    let t = 2.0;
    let ch = sim.channel(t).unwrap();
    let g_exact = Complex64::from_polar(1.0, -t);
    assert!((ch.g - g_exact).norm() < 1e-13);
    let forced = sim.series_params().general();
    let alpha = Complex64::new(0.5, -0.3);
    let mut worst = 0.0f64;
    for n in 0..6 {
        for m in 0..6 {
            let series = density::rho_element(n, m, &ch, sim.moments(), &forced)
                .unwrap()
                .value;
            let closed = coherent_element_closed_form(n, m, alpha, g_exact, ch.zeta);
            worst = worst.max((series - closed).norm());
        }
    }
    assert!(worst <= 1e-10, "lossless coherent gap {worst:e}");

    // binomial limit, including P(2->1) = 1/2 at |G|^2 = 1/2
    let params = SeriesParams::default();
    let ch_binom = synthetic(Complex64::new(0.5f64.sqrt(), 0.0), Complex64::ZERO, 0.0);
    let p21 = density::transition_probability(2, 1, &ch_binom, &params).unwrap();
    let mut worst_b = (p21 - 0.5).abs();
    let g2 = 0.35f64;
    let ch_b = synthetic(Complex64::from_polar(g2.sqrt(), 0.9), Complex64::ZERO, 0.0);
    for n in 0..=5usize {
        let p = density::transition_probability(3, n, &ch_b, &params).unwrap();
        let expected = if n <= 3 {
            binomial(3, n) * g2.powi(n as i32) * (1.0 - g2).powi(3 - n as i32)
        } else {
            0.0
        };
        worst_b = worst_b.max((p - expected).abs());
    }
    assert!(worst_b <= 1e-10, "binomial gap {worst_b:e}");

    // Poisson decay at |zeta|^2 = 1: P(0->n) = e^{-1}/n!
    let ch_p = synthetic(
        Complex64::from_polar(0.7, -0.5),
        Complex64::from_polar(1.0, 1.7),
        0.0,
    );
    let mut worst_p = 0.0f64;
    let mut fact = 1.0f64;
    for n in 0..=8usize {
        if n > 0 {
            fact *= n as f64;
        }
        let p = density::transition_probability(0, n, &ch_p, &params).unwrap();
        worst_p = worst_p.max((p - (-1.0f64).exp() / fact).abs());
    }
    assert!(worst_p <= 1e-10, "poisson gap {worst_p:e}");

    // geometric equilibrium at G = 0, eta = 1 for several initial states
    let ch_t = synthetic(Complex64::ZERO, Complex64::ZERO, 1.0);
    let mut worst_t = 0.0f64;
    for moments in [
        InitialMoments::Number(2),
        InitialMoments::Coherent(Complex64::new(0.4, 0.2)),
    ] {
        let r00 = density::rho_element(0, 0, &ch_t, &moments, &params)
            .unwrap()
            .value;
        let r11 = density::rho_element(1, 1, &ch_t, &moments, &params)
            .unwrap()
            .value;
        worst_t = worst_t.max((r00 - Complex64::new(0.5, 0.0)).norm());
        worst_t = worst_t.max((r11 - Complex64::new(0.25, 0.0)).norm());
        for n in 0..6usize {
            let v = density::rho_element(n, n, &ch_t, &moments, &params)
                .unwrap()
                .value;
            worst_t = worst_t.max((v.re - 0.5f64.powi(n as i32 + 1)).abs());
        }
    }
    assert!(worst_t <= 1e-10, "equilibrium gap {worst_t:e}");

    println!(
        "acceptance 3 (closed-form limits): pass — gaps: coherent {worst:.2e}, binomial {worst_b:.2e}, poisson {worst_p:.2e}, equilibrium {worst_t:.2e}"
    );
}

#[test]
fn criterion_04_state_health() {
    let mut lines = Vec::new();
    for initial in [
        InitialOscState::Coherent {
            alpha: Complex64::new(0.6, 0.0),
        },
        InitialOscState::Number { k: 2 },
    ] {
        let scn = desk_scenario(initial);
        let sim = Simulation::new(scn).unwrap();
        for t in [0.5, 2.0] {
            let rho = sim.rho_matrix_auto(t, 1e-6).unwrap();
            let herm = rho.hermiticity_defect();
            let trace = rho.trace();
            let min_eig = rho.min_eigenvalue_estimate();
            assert!(herm <= 1e-9, "hermiticity {herm:e}");
            assert!((1.0 - 1e-6..=1.0 + 1e-9).contains(&trace), "trace {trace}");
            assert!(min_eig >= -1e-8, "min eigenvalue {min_eig:e}");
            lines.push(format!(
                "t={t}: herm {herm:.1e}, trace {trace:.9}, eig {min_eig:.1e}"
            ));
        }
    }
    println!("acceptance 4 (state health): pass — {}", lines.join("; "));
}

#[test]
fn criterion_05_first_moment_sum_rule() {
    let mut worst = 0.0f64;
    for initial in [
        InitialOscState::Coherent {
            alpha: Complex64::new(0.6, 0.0),
        },
        InitialOscState::Number { k: 2 },
    ] {
        let scn = desk_scenario(initial);
        let sim = Simulation::new(scn).unwrap();
        for t in [0.5, 2.0] {
            let rho = sim.rho_matrix_auto(t, 1e-10).unwrap();
            let from_matrix = rho.mean_occupation();
            let direct = sim.mean_number(t).unwrap();
            worst = worst.max((from_matrix - direct).abs());
        }
    }
    assert!(worst <= 1e-8, "first-moment gap {worst:e}");
    println!("acceptance 5 (first-moment sum rule): pass — max gap {worst:.2e}");
}

#[test]
fn criterion_06_heat() {
    // corrected mean vs the two-point-measurement oracle
    let mut scn = desk_scenario(InitialOscState::Number { k: 1 });
    scn.drive = DriveSpec::Zero;
    let t = 2.0;
    let sim = Simulation::new(scn.clone()).unwrap();
    let analytic = sim.mean_heat(t).unwrap().mean_q;
    let space = oracle::FockSpace::for_scenario(&scn, 7, 8).unwrap();
    let stats = oracle::heat_statistics(&scn, &space, t, 8).unwrap();
    let oracle_mean = stats.mean();
    let gap = (analytic - oracle_mean).abs();
    assert!(
        gap <= 1e-4,
        "analytic {analytic} vs oracle {oracle_mean}: gap {gap:e}"
    );

    // zero coupling: exactly zero
    let mut lossless = scn.clone();
    lossless.bath = BathSpec::empty();
    let sim0 = Simulation::new(lossless).unwrap();
    let q0 = sim0.mean_heat(t).unwrap().mean_q;
    assert_eq!(q0, 0.0, "zero-coupling heat must be exactly 0");

    // T = 0, no drive: n sum_j hbar omega_j |Gamma_j|^2
    let mut cold = scn.clone();
    cold.bath_state = ThermalBathState::zero_temperature();
    cold.initial_osc = InitialOscState::Number { k: 3 };
    let simc = Simulation::new(cold.clone()).unwrap();
    let coeffs = simc.coefficients(t).unwrap();
    let q_cold = simc.mean_heat(t).unwrap().mean_q;
    let limit = observables::heat_zero_temperature_limit(&coeffs, 3, &cold.bath, 1.0);
    let cold_gap = (q_cold - limit).abs();
    assert!(cold_gap <= 1e-10, "cold-limit gap {cold_gap:e}");

    // characteristic function normalization and first moment
    let g0_defect = (stats.characteristic(0.0) - Complex64::ONE).norm();
    assert!(g0_defect <= 1e-12, "G(0) defect {g0_defect:e}");
    let h = 1e-5;
    let fd = (stats.characteristic(h) - stats.characteristic(-h)) / Complex64::new(0.0, 2.0 * h);
    let fd_rel = (fd.re - oracle_mean).abs() / oracle_mean.abs().max(1e-12);
    assert!(
        fd_rel <= 1e-6,
        "finite-difference moment relative gap {fd_rel:e}"
    );

    println!(
        "acceptance 6 (heat): pass — analytic/oracle gap {gap:.2e}, cold-limit gap {cold_gap:.2e}, G(0) defect {g0_defect:.2e}, fd relative {fd_rel:.2e}"
    );
}

#[test]
fn criterion_07_bath_moment_identity() {
    let scn = desk_scenario(InitialOscState::Number { k: 1 });
    let h = assemble_one_particle(&scn.oscillator, &scn.bath);
    let prop = OneParticlePropagator::new(&h).unwrap();
    let coeffs = prop.coefficients(&scn, 1.7).unwrap();
    let cutoffs = [24usize, 24];
    let mut worst_rel = 0.0f64;
    let mut worst_off = 0.0f64;
    for u in 0..=3usize {
        for v in 0..=3usize {
            let value =
                oracle::bath_moment(u, v, &coeffs, &scn.bath, &scn.bath_state, &cutoffs, 1.0)
                    .unwrap();
            if u == v {
                let expected =
                    (1..=u).map(|i| i as f64).product::<f64>() * coeffs.eta.powi(u as i32);
                worst_rel = worst_rel.max((value.re - expected).abs() / expected.max(1e-300));
                worst_rel = worst_rel.max(value.im.abs() / expected.max(1e-300));
            } else {
                worst_off = worst_off.max(value.norm());
            }
        }
    }
    assert!(
        worst_rel <= 1e-6,
        "diagonal moment relative gap {worst_rel:e}"
    );
    assert!(worst_off <= 1e-9, "off-diagonal moment leak {worst_off:e}");
    println!(
        "acceptance 7 (bath moment identity): pass — diagonal rel {worst_rel:.2e}, off-diagonal {worst_off:.2e}"
    );
}

#[test]
fn criterion_08_wigner() {
    // closed form vs defining integral at 25 points per order
    let (hbar, omega0) = (1.0, 1.0);
    let mut worst = 0.0f64;
    for n in 0..=5usize {
        for i in 0..5 {
            for j in 0..5 {
                let x = -1.6 + 0.8 * i as f64;
                let p = -1.6 + 0.8 * j as f64;
                let closed = wigner::wigner_number(n, x, p, hbar, omega0);
                let integral =
                    wigner::wigner_number_integral(n, x, p, hbar, omega0, 1e-11).unwrap();
                worst = worst.max((closed - integral).abs());
            }
        }
    }
    assert!(worst <= 1e-8, "laguerre vs integral {worst:e}");

    // peak value
    let w0 = wigner::wigner_number(0, 0.0, 0.0, 1.0, 1.0);
    let peak_gap = (w0 - 1.0 / std::f64::consts::PI).abs();
    assert!(peak_gap < 1e-14);

    // grid normalization for a thermal-ish mixture
    let probs = [0.4, 0.3, 0.15, 0.08, 0.04, 0.02, 0.01];
    let spec = wigner::WignerGridSpec::centered(hbar, omega0, 2.0, 6.0, 161);
    let grid = wigner::wigner_mixture(&probs, &spec, hbar, omega0).unwrap();
    let total: f64 = probs.iter().sum();
    let norm_gap = (grid.integral() - total).abs();
    assert!(norm_gap <= 1e-3, "normalization gap {norm_gap:e}");

    println!(
        "acceptance 8 (wigner): pass — closed-vs-integral {worst:.2e}, peak gap {peak_gap:.2e}, grid normalization gap {norm_gap:.2e}"
    );
}

#[test]
fn criterion_09_magnus() {
    let start = Instant::now();
    let gen = Generator::new(2, Smoothness::Continuous, |t: f64| {
        let cos = 0.8 * (3.0 * t).cos();
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(cos, 0.0),
                Complex64::new(cos, 0.0),
                Complex64::new(-0.5, 0.0),
            ],
        )
    });

    // unitarity at every order
    let mut worst_unitarity = 0.0f64;
    for order in 1..=3 {
        let terms = magnus::magnus_terms(&gen, 0.35, order, 1e-10).unwrap();
        let u = magnus::magnus_propagator(&terms);
        let defect = (&u * u.adjoint() - DMatrix::<Complex64>::identity(2, 2))
            .map(|z| z.norm())
            .max();
        worst_unitarity = worst_unitarity.max(defect);
    }
    assert!(
        worst_unitarity <= 1e-12,
        "unitarity defect {worst_unitarity:e}"
    );

    // constant generator: order 1 is exact
    let h_const = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.9, 0.0),
            Complex64::new(0.3, -0.2),
            Complex64::new(0.3, 0.2),
            Complex64::new(-0.1, 0.0),
        ],
    );
    let hc = h_const.clone();
    let cgen = Generator::new(2, Smoothness::Continuous, move |_| hc.clone());
    let terms = magnus::magnus_terms(&cgen, 1.1, 1, 1e-12).unwrap();
    let u1 = magnus::magnus_propagator(&terms);
    let exact = oscbath::numerics::expm(&h_const.map(|z| z * Complex64::new(0.0, -1.1)));
    let const_gap = (&u1 - exact).map(|z| z.norm()).max();
    assert!(const_gap <= 1e-12, "constant-generator gap {const_gap:e}");

    // order-3 global error slope: evolve to a fixed horizon with composed
    // substeps of size h; the O(h^5) local truncation accumulates to O(h^4)
    let horizon = 0.8;
    let reference = oracle::time_ordered_unitary(&|s| gen.eval(s), horizon, 100_000);
    let steps = [0.2, 0.1, 0.05, 0.025];
    let mut points = Vec::new();
    for &h in &steps {
        let n_sub = (horizon / h).round() as usize;
        let mut u = DMatrix::<Complex64>::identity(2, 2);
        for i in 0..n_sub {
            let terms =
                magnus::magnus_terms_on(&gen, h * i as f64, h * (i + 1) as f64, 3, 1e-12).unwrap();
            u = magnus::magnus_propagator(&terms) * u;
        }
        let err = (&u - &reference).map(|z| z.norm()).max();
        points.push((h.ln(), err.ln()));
    }
    let slope = fit_slope(&points);
    assert!(
        (slope - 4.0).abs() <= 0.5,
        "order-3 slope {slope} outside 4 +- 0.5 (errors {points:?})"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "acceptance 9 (magnus): pass — unitarity {worst_unitarity:.2e}, constant-gap {const_gap:.2e}, slope {slope:.3} in {elapsed:?}"
    );
}

#[test]
fn criterion_10_decoherence_trend() {
    let eta = 0.3;
    let alpha = Complex64::new(0.8, 0.0);
    let params = SeriesParams::default();
    let mut previous = f64::INFINITY;
    let mut values = Vec::new();
    for exp in 1..=4 {
        let g = Complex64::new(10f64.powi(-exp), 0.0);
        let ch = synthetic(g, Complex64::ZERO, eta);
        let rho = density::rho_matrix(&ch, &InitialMoments::Coherent(alpha), 10, &params).unwrap();
        let offdiag = rho.max_offdiagonal();
        assert!(
            offdiag < previous,
            "|G| = 1e-{exp}: off-diagonal {offdiag:e} did not decrease from {previous:e}"
        );
        values.push(offdiag);
        previous = offdiag;
    }
    println!(
        "acceptance 10 (decoherence trend): pass — max off-diagonals {:?} decrease monotonically",
        values
    );
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
