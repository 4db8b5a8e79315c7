//! Throughput of the data-parallel kernels. Compiled with default features
//! these exercise the rayon path; run again with `--no-default-features` to
//! measure the sequential fallback. The mode is baked into the benchmark id,
//! so both variants land side by side in the criterion report:
//!
//!   cargo bench -p oscbath
//!   cargo bench -p oscbath --no-default-features

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use oscbath::density::{self, ChannelCoefficients, InitialMoments, SeriesParams};
use oscbath::model::{
    BathMode, BathSpec, DriveSpec, InitialOscState, NumericsParams, OscillatorSpec, Scenario,
    ThermalBathState,
};
use oscbath::propagator::{assemble_one_particle, OneParticlePropagator};
use oscbath::wigner::{wigner_mixture, WignerGridSpec};

fn five_mode_scenario() -> Scenario {
    Scenario {
        oscillator: OscillatorSpec::new(1.0),
        bath: BathSpec {
            modes: (0..5)
                .map(|j| BathMode {
                    omega: 0.5 + 0.35 * j as f64,
                    f: Complex64::from_polar(0.08 + 0.02 * j as f64, 1.1 * j as f64),
                })
                .collect(),
        },
        drive: DriveSpec::Harmonic {
            k0: Complex64::new(0.1, 0.05),
            omega: 1.2,
            phase: 0.0,
        },
        initial_osc: InitialOscState::Coherent {
            alpha: Complex64::new(0.6, 0.2),
        },
        bath_state: ThermalBathState::new(2.0),
        numerics: NumericsParams::default(),
    }
}

fn bench_rho_matrix(c: &mut Criterion) {
    let ch = ChannelCoefficients {
        g: Complex64::from_polar(0.7, -1.1),
        zeta: Complex64::new(0.25, -0.1),
        eta: 0.18,
    };
    let moments = InitialMoments::Coherent(Complex64::new(0.6, 0.2));
    let params = SeriesParams::default();
    let mut group = c.benchmark_group("rho_matrix");
    group.sample_size(20);
    for dim in [8usize, 14] {
        group.bench_with_input(
            BenchmarkId::new(oscbath::par::mode(), dim),
            &dim,
            |b, &dim| {
                b.iter(|| density::rho_matrix(&ch, &moments, dim, &params).unwrap());
            },
        );
    }
    group.finish();
}

fn bench_wigner_grid(c: &mut Criterion) {
    let probs = [0.32, 0.27, 0.18, 0.11, 0.06, 0.03, 0.02, 0.01];
    let spec = WignerGridSpec::centered(1.0, 1.0, 2.0, 6.0, 201);
    let mut group = c.benchmark_group("wigner_grid");
    group.sample_size(30);
    group.bench_function(BenchmarkId::new(oscbath::par::mode(), "201x201"), |b| {
        b.iter(|| wigner_mixture(&probs, &spec, 1.0, 1.0).unwrap());
    });
    group.finish();
}

fn bench_coefficient_sweep(c: &mut Criterion) {
    let scn = five_mode_scenario();
    let h = assemble_one_particle(&scn.oscillator, &scn.bath);
    let prop = OneParticlePropagator::new(&h).unwrap();
    let times: Vec<f64> = (0..256).map(|i| 0.05 * i as f64).collect();
    let mut group = c.benchmark_group("coefficient_sweep");
    group.sample_size(30);
    group.bench_function(BenchmarkId::new(oscbath::par::mode(), "256 times"), |b| {
        b.iter(|| {
            let values = oscbath::par::map_indexed(times.len(), |i| {
                prop.coefficients(&scn, times[i]).unwrap().eta
            });
            values.iter().sum::<f64>()
        });
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_rho_matrix,
    bench_wigner_grid,
    bench_coefficient_sweep
);
criterion_main!(benches);
