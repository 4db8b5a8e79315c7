//! Command-line frontend: scenario ingestion, computation orchestration,
//! convergence reporting and data export.
//!
//! Exit codes: 0 success, 2 validation/usage failure, 3 numerical
//! non-convergence, 4 dimension overflow.

mod output;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use oscbath::density;
use oscbath::magnus::{self, Generator, Smoothness};
use oscbath::model::{BathMode, BathSpec, InitialOscState, Scenario, SyntheticCoefficients};
use oscbath::observables;
use oscbath::oracle;
use oscbath::verification::{self, CheckOptions};
use oscbath::wigner::WignerGridSpec;
use oscbath::Simulation;
use output::Table;

#[derive(Parser)]
#[command(
    name = "oscbath",
    about = "Exact simulation of a driven harmonic oscillator coupled to a finite bosonic bath",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct IoArgs {
    /// Scenario description file (JSON)
    #[arg(long)]
    scenario: PathBuf,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GridArgs {
    /// Single evaluation time (alternative to --t0/--t1/--n)
    #[arg(long, conflicts_with_all = ["t0", "t1", "n"])]
    t: Option<f64>,
    #[arg(long, requires = "t1", requires = "n")]
    t0: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    n: Option<usize>,
}

impl GridArgs {
    fn times(&self) -> Result<Vec<f64>, CliError> {
        if let Some(t) = self.t {
            if t < 0.0 {
                return Err(CliError::Usage("t must be >= 0".into()));
            }
            return Ok(vec![t]);
        }
        match (self.t0, self.t1, self.n) {
            (Some(t0), Some(t1), Some(n)) => {
                if !(t1 >= t0 && t0 >= 0.0) || n < 1 {
                    return Err(CliError::Usage("need t1 >= t0 >= 0 and n >= 1".into()));
                }
                if n == 1 {
                    return Ok(vec![t0]);
                }
                let step = (t1 - t0) / (n - 1) as f64;
                Ok((0..n).map(|i| t0 + step * i as f64).collect())
            }
            _ => Err(CliError::Usage("give either --t or --t0/--t1/--n".into())),
        }
    }

    fn single(&self) -> Result<f64, CliError> {
        let times = self.times()?;
        if times.len() != 1 {
            return Err(CliError::Usage("this command needs a single --t".into()));
        }
        Ok(times[0])
    }
}

/// Direct channel injection `G_re,G_im,zeta_re,zeta_im,eta`.
fn parse_synthetic(raw: &str) -> Result<SyntheticCoefficients, String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 5 {
        return Err("expected G_re,G_im,zeta_re,zeta_im,eta".into());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok(SyntheticCoefficients {
        g: Complex64::new(nums[0], nums[1]),
        zeta: Complex64::new(nums[2], nums[3]),
        eta: nums[4],
    })
}

fn parse_element(raw: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err("expected n,m".into());
    }
    let n = parts[0]
        .trim()
        .parse()
        .map_err(|e: std::num::ParseIntError| e.to_string())?;
    let m = parts[1]
        .trim()
        .parse()
        .map_err(|e: std::num::ParseIntError| e.to_string())?;
    Ok((n, m))
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario invariant suite and report pass/fail per check
    Validate {
        #[command(flatten)]
        io: IoArgs,
        /// Force the oracle cross-check even on large spaces
        #[arg(long)]
        oracle: bool,
    },
    /// Coefficient functions G, M, zeta, eta on a time grid
    Coefficients {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Reduced density matrix at one time
    Rho {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Matrix cutoff; grown automatically when omitted
        #[arg(long)]
        dim: Option<usize>,
        /// Single element `n,m` instead of the full matrix
        #[arg(long, value_parser = parse_element)]
        element: Option<(usize, usize)>,
        /// Inject channel parameters `G_re,G_im,zeta_re,zeta_im,eta`
        #[arg(long, value_parser = parse_synthetic)]
        synthetic: Option<SyntheticCoefficients>,
        /// Skip closed-form dispatch and force the general series
        #[arg(long)]
        general: bool,
    },
    /// Transition probabilities from the initial number state
    Probabilities {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Number of levels to report
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, value_parser = parse_synthetic)]
        synthetic: Option<SyntheticCoefficients>,
    },
    /// Mean occupation, energy and mean heat on a time grid
    Observables {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Also emit the literal printed-formula variants (number states only)
        #[arg(long)]
        as_printed: bool,
    },
    /// Mean heat per mode on a grid, or the exact heat distribution (--oracle)
    Heat {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Compute the two-point-measurement distribution at a single --t
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 8)]
        oracle_dosc: usize,
        #[arg(long, default_value_t = 6)]
        oracle_dj: usize,
        #[arg(long, default_value_t = 64)]
        oracle_steps: usize,
    },
    /// Wigner function on a centered phase-space grid
    Wigner {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Points per axis
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Grid half-extent in vacuum/thermal widths
        #[arg(long, default_value_t = 6.0)]
        widths: f64,
        #[arg(long, value_parser = parse_synthetic)]
        synthetic: Option<SyntheticCoefficients>,
    },
    /// Magnus integrator demo on a driven two-level generator
    MagnusDemo {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1.0)]
        omega0: f64,
        #[arg(long, default_value_t = 0.5)]
        coupling: f64,
        #[arg(long, default_value_t = 2.0)]
        drive_freq: f64,
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
    },
    /// Sample a spectral density into a finite bath description (JSON)
    Discretize {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        shape: SpectralShape,
        /// Number of modes
        #[arg(long)]
        n: usize,
        #[arg(long)]
        omega_min: f64,
        #[arg(long)]
        omega_max: f64,
        /// Overall coupling strength of the spectral density
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        /// Exponential cutoff frequency (ohmic)
        #[arg(long, default_value_t = 1.0)]
        omega_c: f64,
        /// Peak position (lorentzian)
        #[arg(long, default_value_t = 1.0)]
        peak: f64,
        /// Full width at half maximum (lorentzian)
        #[arg(long, default_value_t = 0.2)]
        width: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectralShape {
    Ohmic,
    Lorentzian,
}

enum CliError {
    Core(oscbath::Error),
    Io(std::io::Error),
    Usage(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::Io(_) | CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<oscbath::Error> for CliError {
    fn from(e: oscbath::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(err.code());
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))?;
    Ok(scenario)
}

fn emit(table: &Table, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let mut buffer: Vec<u8> = Vec::new();
    match format {
        Format::Csv => table.write_csv(&mut buffer)?,
        Format::Json => table.write_json(&mut buffer)?,
    }
    match out {
        Some(path) => std::fs::write(path, buffer)?,
        None => std::io::stdout().write_all(&buffer)?,
    }
    Ok(())
}

fn build_sim(
    io: &IoArgs,
    synthetic: Option<SyntheticCoefficients>,
) -> Result<Simulation, CliError> {
    let scenario = load_scenario(&io.scenario)?;
    let mut sim = Simulation::new(scenario)?;
    if let Some(synthetic) = synthetic {
        sim = sim.with_synthetic(synthetic)?;
    }
    Ok(sim)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { io, oracle } => {
            let scenario = load_scenario(&io.scenario)?;
            let opts = CheckOptions {
                force_oracle: oracle,
                ..CheckOptions::default()
            };
            let checks = verification::run_scenario_checks(&scenario, &opts)?;
            let mut report = String::new();
            let mut failed = 0usize;
            for check in &checks {
                let status = if check.passed { "pass" } else { "FAIL" };
                if !check.passed {
                    failed += 1;
                }
                writeln!(
                    report,
                    "check {:<36} {status} — {}",
                    check.name, check.detail
                )
                .expect("writing to string");
            }
            writeln!(report, "{} checks, {failed} failed", checks.len()).expect("string write");
            match &io.out {
                Some(path) => std::fs::write(path, &report)?,
                None => print!("{report}"),
            }
            if failed > 0 {
                return Err(CliError::Usage(format!(
                    "{failed} validation checks failed"
                )));
            }
            Ok(())
        }

        Command::Coefficients { io, grid } => {
            let sim = build_sim(&io, None)?;
            let times = grid.times()?;
            let mut table = Table::new(vec![
                "t", "re_g", "im_g", "abs_g2", "sum_mj2", "leakage", "eta", "re_zeta", "im_zeta",
            ]);
            table.meta("command", "coefficients");
            table.meta("n_modes", sim.scenario().bath.len());
            table.meta_float("quadrature_tol", sim.scenario().numerics.quadrature_tol);
            for &t in &times {
                let c = sim.coefficients(t)?;
                let g2 = c.g.norm_sqr();
                let m2: f64 = c.m.iter().map(|z| z.norm_sqr()).sum();
                table.push(vec![
                    t,
                    c.g.re,
                    c.g.im,
                    g2,
                    m2,
                    1.0 - g2 - m2,
                    c.eta,
                    c.zeta.re,
                    c.zeta.im,
                ]);
            }
            emit(&table, io.out.as_deref(), io.format)
        }

        Command::Rho {
            io,
            grid,
            dim,
            element,
            synthetic,
            general,
        } => {
            let sim = build_sim(&io, synthetic)?;
            let t = grid.single()?;
            let mut params = sim.series_params();
            if general {
                params = params.general();
            }
            if let Some((n, m)) = element {
                let ch = sim.channel(t)?;
                let value = density::rho_element(n, m, &ch, sim.moments(), &params)?;
                let mut table = Table::new(vec!["n", "m", "re", "im", "error_estimate", "terms"]);
                table.meta("command", "rho-element");
                table.meta_float("t", t);
                table.meta_float("series_tol", params.tol);
                table.meta("series_smax", params.smax);
                table.push(vec![
                    n as f64,
                    m as f64,
                    value.value.re,
                    value.value.im,
                    value.error_estimate,
                    value.terms as f64,
                ]);
                return emit(&table, io.out.as_deref(), io.format);
            }
            let ch = sim.channel(t)?;
            let rho = match dim {
                Some(d) => density::rho_matrix(&ch, sim.moments(), d, &params)?,
                None => density::rho_matrix_auto(
                    &ch,
                    sim.moments(),
                    &params,
                    1e-6,
                    sim.scenario().numerics.fock_cutoff_osc,
                )?,
            };
            let mut table = Table::new(vec!["n", "m", "re", "im"]);
            table.meta("command", "rho");
            table.meta_float("t", t);
            table.meta("dim", rho.dim());
            table.meta_float("series_tol", params.tol);
            table.meta("series_smax", params.smax);
            table.meta_float("trace", rho.trace());
            table.meta_float("trace_defect", rho.trace_defect());
            table.meta_float("hermiticity_defect", rho.hermiticity_defect());
            table.meta_float("min_eigenvalue", rho.min_eigenvalue_estimate());
            for n in 0..rho.dim() {
                for m in 0..rho.dim() {
                    let z = rho.element(n, m);
                    table.push(vec![n as f64, m as f64, z.re, z.im]);
                }
            }
            emit(&table, io.out.as_deref(), io.format)
        }

        Command::Probabilities {
            io,
            grid,
            dim,
            synthetic,
        } => {
            let sim = build_sim(&io, synthetic)?;
            let t = grid.single()?;
            let InitialOscState::Number { k } = sim.scenario().initial_osc else {
                return Err(CliError::Usage(
                    "probabilities needs a number initial state".into(),
                ));
            };
            let probs = sim.transition_probabilities(t, dim)?;
            let mut table = Table::new(vec!["n", "p"]);
            table.meta("command", "probabilities");
            table.meta("k", k);
            table.meta_float("t", t);
            table.meta_float("total", probs.iter().sum::<f64>());
            table.meta_float("series_tol", sim.scenario().numerics.series_tol);
            for (n, p) in probs.iter().enumerate() {
                table.push(vec![n as f64, *p]);
            }
            emit(&table, io.out.as_deref(), io.format)
        }

        Command::Observables {
            io,
            grid,
            as_printed,
        } => {
            let sim = build_sim(&io, None)?;
            let times = grid.times()?;
            let scn = sim.scenario().clone();
            let printed_n = match (&scn.initial_osc, as_printed) {
                (InitialOscState::Number { k }, true) => Some(*k),
                (_, true) => {
                    return Err(CliError::Usage(
                        "--as-printed applies to number initial states only".into(),
                    ))
                }
                _ => None,
            };
            let mut columns = vec!["t", "mean_number", "energy", "mean_q"];
            if printed_n.is_some() {
                columns.push("energy_as_printed");
                columns.push("mean_q_as_printed");
            }
            let mut table = Table::new(columns);
            table.meta("command", "observables");
            table.meta_float("quadrature_tol", scn.numerics.quadrature_tol);
            for &t in &times {
                let coeffs = sim.coefficients(t)?;
                let mut row = vec![
                    t,
                    sim.mean_number(t)?,
                    sim.energy(t)?,
                    sim.mean_heat(t)?.mean_q,
                ];
                if let Some(n) = printed_n {
                    row.push(observables::energy_as_printed(
                        &coeffs,
                        n,
                        &scn.oscillator,
                        &scn.bath,
                        &scn.bath_state,
                    ));
                    row.push(observables::mean_heat_as_printed(
                        &coeffs,
                        n,
                        &scn.bath,
                        &scn.bath_state,
                        scn.oscillator.hbar,
                    ));
                }
                table.push(row);
            }
            emit(&table, io.out.as_deref(), io.format)
        }

        Command::Heat {
            io,
            grid,
            oracle: use_oracle,
            oracle_dosc,
            oracle_dj,
            oracle_steps,
        } => {
            let sim = build_sim(&io, None)?;
            let scn = sim.scenario().clone();
            if use_oracle {
                let t = grid.single()?;
                let space = oracle::FockSpace::for_scenario(&scn, oracle_dosc, oracle_dj)?;
                let stats = oracle::heat_statistics(&scn, &space, t, oracle_steps)?;
                let mut table = Table::new(vec!["q", "probability"]);
                table.meta("command", "heat-distribution");
                table.meta_float("t", t);
                table.meta("cutoffs", format!("{:?}", space.cutoffs()));
                table.meta("n_steps", oracle_steps);
                table.meta_float("mean_oracle", stats.mean());
                table.meta_float("mean_analytic", sim.mean_heat(t)?.mean_q);
                table.meta_float(
                    "g0_defect",
                    (stats.characteristic(0.0) - Complex64::ONE).norm(),
                );
                for &(q, p) in stats.outcomes() {
                    table.push(vec![q, p]);
                }
                return emit(&table, io.out.as_deref(), io.format);
            }
            let times = grid.times()?;
            let mut columns: Vec<String> = vec!["t".into(), "mean_q".into()];
            columns.extend((0..scn.bath.len()).map(|j| format!("q_mode_{j}")));
            let mut table = Table::new(columns);
            table.meta("command", "heat");
            for (j, mode) in scn.bath.modes.iter().enumerate() {
                table.meta_float(&format!("omega_mode_{j}"), mode.omega);
            }
            for &t in &times {
                let stats = sim.mean_heat(t)?;
                let mut row = vec![t, stats.mean_q];
                row.extend(stats.per_mode);
                table.push(row);
            }
            emit(&table, io.out.as_deref(), io.format)
        }

        Command::Wigner {
            io,
            grid,
            points,
            widths,
            synthetic,
        } => {
            let sim = build_sim(&io, synthetic)?;
            let t = grid.single()?;
            let scn = sim.scenario();
            let mean = sim.mean_number(t)?.max(0.0);
            let spec = WignerGridSpec::centered(
                scn.oscillator.hbar,
                scn.oscillator.omega0,
                mean,
                widths,
                points,
            );
            let grid_values = sim.wigner(t, &spec)?;
            // JSON uses the matrix form; CSV flattens to x,p,w rows
            if matches!(io.format, Format::Json) {
                let values: Vec<Vec<f64>> = (0..grid_values.x_axis.len())
                    .map(|ix| {
                        (0..grid_values.p_axis.len())
                            .map(|ip| grid_values.values[(ix, ip)])
                            .collect()
                    })
                    .collect();
                let doc = serde_json::json!({
                    "meta": {
                        "command": "wigner",
                        "t": output::fmt(t),
                        "points": points.to_string(),
                        "widths": output::fmt(widths),
                        "grid_integral": output::fmt(grid_values.integral()),
                        "min_w": output::fmt(grid_values.min_value()),
                    },
                    "x_axis": grid_values.x_axis,
                    "p_axis": grid_values.p_axis,
                    "values": values,
                });
                let text = serde_json::to_string_pretty(&doc).expect("grid is valid json") + "\n";
                match &io.out {
                    Some(path) => std::fs::write(path, text)?,
                    None => print!("{text}"),
                }
                return Ok(());
            }
            let mut table = Table::new(vec!["x", "p", "w"]);
            table.meta("command", "wigner");
            table.meta_float("t", t);
            table.meta("points", points);
            table.meta_float("widths", widths);
            table.meta_float("grid_integral", grid_values.integral());
            table.meta_float("min_w", grid_values.min_value());
            for (ix, &x) in grid_values.x_axis.iter().enumerate() {
                for (ip, &p) in grid_values.p_axis.iter().enumerate() {
                    table.push(vec![x, p, grid_values.values[(ix, ip)]]);
                }
            }
            emit(&table, io.out.as_deref(), io.format)
        }

        Command::MagnusDemo {
            out,
            format,
            grid,
            omega0,
            coupling,
            drive_freq,
            quad_tol,
        } => {
            let times = if grid.t.is_none() && grid.t0.is_none() {
                (1..=8).map(|i| 0.05 * i as f64).collect()
            } else {
                grid.times()?
            };
            let gen = Generator::new(2, Smoothness::Continuous, move |t: f64| {
                let c = coupling * (drive_freq * t).cos();
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::new(0.5 * omega0, 0.0),
                        Complex64::new(c, 0.0),
                        Complex64::new(c, 0.0),
                        Complex64::new(-0.5 * omega0, 0.0),
                    ],
                )
            });
            let mut table = Table::new(vec![
                "t",
                "err_order1",
                "err_order2",
                "err_order3",
                "unitarity_defect_order1",
                "unitarity_defect_order2",
                "unitarity_defect_order3",
            ]);
            table.meta("command", "magnus-demo");
            table.meta_float("omega0", omega0);
            table.meta_float("coupling", coupling);
            table.meta_float("drive_freq", drive_freq);
            table.meta_float("quad_tol", quad_tol);
            let identity = DMatrix::<Complex64>::identity(2, 2);
            for &t in &times {
                let reference = oracle::time_ordered_unitary(&|s| gen.eval(s), t, 20_000);
                let mut row = vec![t];
                let mut defects = Vec::new();
                for order in 1..=3usize {
                    let terms = magnus::magnus_terms(&gen, t, order, quad_tol)?;
                    let u = magnus::magnus_propagator(&terms);
                    row.push((&u - &reference).map(|z| z.norm()).max());
                    defects.push((&u * u.adjoint() - &identity).map(|z| z.norm()).max());
                }
                row.extend(defects);
                table.push(row);
            }
            emit(&table, out.as_deref(), format)
        }

        Command::Discretize {
            out,
            shape,
            n,
            omega_min,
            omega_max,
            gamma,
            omega_c,
            peak,
            width,
        } => {
            if n < 1
                || omega_max.partial_cmp(&omega_min) != Some(std::cmp::Ordering::Greater)
                || omega_min < 0.0
            {
                return Err(CliError::Usage(
                    "need n >= 1 and omega_max > omega_min >= 0".into(),
                ));
            }
            let dw = (omega_max - omega_min) / n as f64;
            let spectral = |omega: f64| -> f64 {
                match shape {
                    SpectralShape::Ohmic => gamma * omega * (-omega / omega_c).exp(),
                    SpectralShape::Lorentzian => {
                        let half = 0.5 * width;
                        gamma * half * half / ((omega - peak).powi(2) + half * half)
                    }
                }
            };
            let modes: Vec<BathMode> = (0..n)
                .map(|j| {
                    let omega = omega_min + dw * (j as f64 + 0.5);
                    BathMode {
                        omega,
                        f: Complex64::new((spectral(omega) * dw).sqrt(), 0.0),
                    }
                })
                .collect();
            let bath = BathSpec { modes };
            let text = serde_json::to_string_pretty(&bath).expect("bath serializes");
            match out {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(())
        }
    }
}
