//! End-to-end tests of the binary: exit codes, output determinism, and the
//! documented table formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oscbath"))
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

type CsvTable = (Vec<(String, String)>, Vec<String>, Vec<Vec<f64>>);

/// Parse a CSV table into (meta, header, rows).
fn parse_csv(text: &str) -> CsvTable {
    let mut meta = Vec::new();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (key, value) = rest.split_once(" = ").expect("meta line");
            meta.push((key.to_string(), value.to_string()));
        } else if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
        } else {
            rows.push(line.split(',').map(|c| c.parse().unwrap()).collect());
        }
    }
    (meta, header, rows)
}

fn meta_value(meta: &[(String, String)], key: &str) -> f64 {
    meta.iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("missing meta key {key}"))
        .1
        .parse()
        .unwrap()
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for name in ["lossless_coherent.json", "pulsed_mode.json"] {
        let path = scenario_dir().join(name);
        let output = run(&["validate", "--scenario", path.to_str().unwrap()]);
        assert!(
            output.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        let text = String::from_utf8_lossy(&output.stdout).to_string();
        assert!(text.contains("0 failed"), "{text}");
    }
}

#[test]
fn invalid_scenario_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "oscillator": { "omega0": -1.0 },
            "bath": { "modes": [] },
            "drive": { "type": "zero" },
            "initial_osc": { "type": "number", "k": 0 },
            "bath_state": { "beta": 1.0 }
        }"#,
    )
    .unwrap();
    let output = run(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("NonPositiveFrequency"), "{stderr}");
}

#[test]
fn series_nonconvergence_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tight.json");
    std::fs::write(
        &path,
        r#"{
            "oscillator": { "omega0": 1.0 },
            "bath": { "modes": [] },
            "drive": { "type": "zero" },
            "initial_osc": { "type": "coherent", "alpha": [1.4, 0.0] },
            "bath_state": { "beta": 1.0 },
            "numerics": { "series_smax": 2 }
        }"#,
    )
    .unwrap();
    // force the general series so the closed form cannot rescue the tiny cap
    let output = run(&[
        "rho",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "1.0",
        "--dim",
        "4",
        "--general",
        "--synthetic",
        "0.7,0.0,1.2,0.0,0.0",
    ]);
    assert_eq!(
        output.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn coefficients_at_t_zero_are_exact() {
    let path = scenario_dir().join("desk_two_mode.json");
    let output = run(&[
        "coefficients",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "0",
    ]);
    let (_, header, rows) = parse_csv(&stdout_of(&output));
    assert_eq!(
        header,
        ["t", "re_g", "im_g", "abs_g2", "sum_mj2", "leakage", "eta", "re_zeta", "im_zeta"]
    );
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert!((row[1] - 1.0).abs() < 1e-12, "Re G = {}", row[1]);
    assert!(row[2].abs() < 1e-12);
    assert!(row[5].abs() < 1e-12, "leakage = {}", row[5]);
    assert!(row[7].abs() < 1e-14 && row[8].abs() < 1e-14);
}

#[test]
fn rho_matches_lossless_closed_form() {
    // N = 0 driven coherent state: the emitted matrix is the displaced
    // coherent projector; cross-check a handful of elements
    let path = scenario_dir().join("lossless_coherent.json");
    let t = 1.7;
    let output = run(&[
        "rho",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        &t.to_string(),
        "--dim",
        "6",
    ]);
    let (meta, _, rows) = parse_csv(&stdout_of(&output));
    assert!(meta_value(&meta, "hermiticity_defect") < 1e-11);

    let scenario: oscbath::model::Scenario = serde_json::from_str(
        &std::fs::read_to_string(scenario_dir().join("lossless_coherent.json")).unwrap(),
    )
    .unwrap();
    let sim = oscbath::Simulation::new(scenario).unwrap();
    let ch = sim.channel(t).unwrap();
    let alpha = Complex64::new(0.8, -0.3);
    for row in &rows {
        let (n, m) = (row[0] as usize, row[1] as usize);
        let expected = oscbath::density::coherent_element_closed_form(n, m, alpha, ch.g, ch.zeta);
        let got = Complex64::new(row[2], row[3]);
        assert!(
            (got - expected).norm() < 1e-10,
            "({n},{m}): {got} vs {expected}"
        );
    }
}

#[test]
fn output_is_deterministic() {
    let path = scenario_dir().join("desk_two_mode.json");
    let args = [
        "coefficients",
        "--scenario",
        path.to_str().unwrap(),
        "--t0",
        "0",
        "--t1",
        "5",
        "--n",
        "11",
    ];
    let first = stdout_of(&run(&args));
    let second = stdout_of(&run(&args));
    assert_eq!(first, second, "identical requests must be byte-identical");
}

#[test]
fn json_format_mirrors_csv() {
    let path = scenario_dir().join("number_relaxation.json");
    let csv = stdout_of(&run(&[
        "probabilities",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "1.0",
        "--dim",
        "4",
    ]));
    let json = stdout_of(&run(&[
        "probabilities",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "1.0",
        "--dim",
        "4",
        "--format",
        "json",
    ]));
    let (_, _, csv_rows) = parse_csv(&csv);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(["n", "p"]));
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), csv_rows.len());
    for (jr, cr) in json_rows.iter().zip(&csv_rows) {
        for (a, b) in jr.as_array().unwrap().iter().zip(cr) {
            assert_eq!(a.as_f64().unwrap(), *b);
        }
    }
}

#[test]
fn probabilities_requires_number_initial_state() {
    let path = scenario_dir().join("lossless_coherent.json");
    let output = run(&[
        "probabilities",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "1.0",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn wigner_header_and_normalization() {
    let path = scenario_dir().join("number_relaxation.json");
    let output = run(&[
        "wigner",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "2.0",
        "--points",
        "81",
    ]);
    let (meta, header, rows) = parse_csv(&stdout_of(&output));
    assert_eq!(header, ["x", "p", "w"]);
    assert_eq!(rows.len(), 81 * 81);
    let integral = meta_value(&meta, "grid_integral");
    assert!((integral - 1.0).abs() < 2e-3, "grid integral {integral}");
}

#[test]
fn wigner_json_uses_matrix_form() {
    let path = scenario_dir().join("number_relaxation.json");
    let output = run(&[
        "wigner",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "1.0",
        "--points",
        "21",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(doc["x_axis"].as_array().unwrap().len(), 21);
    assert_eq!(doc["p_axis"].as_array().unwrap().len(), 21);
    let values = doc["values"].as_array().unwrap();
    assert_eq!(values.len(), 21);
    assert_eq!(values[0].as_array().unwrap().len(), 21);
}

#[test]
fn synthetic_channel_reaches_equilibrium_row() {
    let path = scenario_dir().join("number_relaxation.json");
    let output = run(&[
        "rho",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "0",
        "--dim",
        "3",
        "--synthetic",
        "0,0,0,0,1.0",
    ]);
    let (_, _, rows) = parse_csv(&stdout_of(&output));
    for row in &rows {
        let (n, m) = (row[0] as usize, row[1] as usize);
        let expected = if n == m {
            0.5f64.powi(n as i32 + 1)
        } else {
            0.0
        };
        assert!((row[2] - expected).abs() < 1e-12 && row[3].abs() < 1e-12);
    }
}

#[test]
fn heat_oracle_distribution_sums_to_one() {
    let path = scenario_dir().join("number_relaxation.json");
    let output = run(&[
        "heat",
        "--scenario",
        path.to_str().unwrap(),
        "--t",
        "1.0",
        "--oracle",
        "--oracle-dosc",
        "6",
        "--oracle-dj",
        "5",
        "--oracle-steps",
        "16",
    ]);
    let (meta, header, rows) = parse_csv(&stdout_of(&output));
    assert_eq!(header, ["q", "probability"]);
    let total: f64 = rows.iter().map(|r| r[1]).sum();
    assert!((total - 1.0).abs() < 1e-9, "total probability {total}");
    let mean: f64 = rows.iter().map(|r| r[0] * r[1]).sum();
    let analytic = meta_value(&meta, "mean_analytic");
    assert!((mean - analytic).abs() < 5e-3, "{mean} vs {analytic}");
}

#[test]
fn discretize_midpoint_sum_and_symmetry() {
    // ohmic: sum |f_j|^2 equals the midpoint-rule integral of J by construction
    let output = run(&[
        "discretize",
        "--shape",
        "ohmic",
        "--n",
        "40",
        "--omega-min",
        "0",
        "--omega-max",
        "4",
        "--gamma",
        "0.1",
        "--omega-c",
        "1.0",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    let modes = doc["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 40);
    let dw = 4.0 / 40.0;
    let mut total = 0.0;
    let mut expected = 0.0;
    for (j, mode) in modes.iter().enumerate() {
        let omega = mode["omega"].as_f64().unwrap();
        assert!((omega - dw * (j as f64 + 0.5)).abs() < 1e-12);
        let f = mode["f"].as_array().unwrap();
        total += f[0].as_f64().unwrap().powi(2) + f[1].as_f64().unwrap().powi(2);
        expected += 0.1 * omega * (-omega).exp() * dw;
    }
    assert!((total - expected).abs() < 1e-12);

    // single mode lands at the grid center
    let output = run(&[
        "discretize",
        "--shape",
        "ohmic",
        "--n",
        "1",
        "--omega-min",
        "1",
        "--omega-max",
        "3",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(doc["modes"][0]["omega"].as_f64().unwrap(), 2.0);

    // lorentzian couplings symmetric about the peak
    let output = run(&[
        "discretize",
        "--shape",
        "lorentzian",
        "--n",
        "8",
        "--omega-min",
        "0.5",
        "--omega-max",
        "1.5",
        "--gamma",
        "0.2",
        "--peak",
        "1.0",
        "--width",
        "0.3",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    let modes = doc["modes"].as_array().unwrap();
    for j in 0..4 {
        let lo = modes[j]["f"][0].as_f64().unwrap();
        let hi = modes[7 - j]["f"][0].as_f64().unwrap();
        assert!((lo - hi).abs() < 1e-12, "asymmetric couplings {lo} vs {hi}");
    }
}

#[test]
fn scenario_round_trip_through_serde_is_identity() {
    for name in [
        "desk_two_mode.json",
        "lossless_coherent.json",
        "pulsed_mode.json",
    ] {
        let text = std::fs::read_to_string(scenario_dir().join(name)).unwrap();
        let parsed: oscbath::model::Scenario = serde_json::from_str(&text).unwrap();
        let emitted = serde_json::to_string_pretty(&parsed).unwrap();
        let reparsed: oscbath::model::Scenario = serde_json::from_str(&emitted).unwrap();
        let emitted_again = serde_json::to_string_pretty(&reparsed).unwrap();
        assert_eq!(emitted, emitted_again);
    }
}
