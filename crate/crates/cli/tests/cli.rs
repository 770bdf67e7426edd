use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use twdp::io::{parse_csv, read_trace, Table};

fn twdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(twdp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(twdp(&["theory", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(twdp(&["theory", "--kind", "rqq"]).status.code(), Some(2));
    assert_eq!(twdp(&[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "k = 1\nv1 = 0.3\n");
    let out = twdp(&["theory", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ambiguous"));
    assert_eq!(twdp(&["theory", "--config", "/no/such/file.toml"]).status.code(), Some(2));
    assert_eq!(twdp(&["--help"]).status.code(), Some(0));
}

#[test]
fn theory_rsq_simulator_at_zero_lag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rayleigh.toml", "k = 0\n");
    let out = twdp(&["theory", "--kind", "rsq", "--model", "simulator", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let table = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(table.columns, ["lag_s", "fd_tau", "value"]);
    assert_eq!(table.rows.len(), 1001);
    assert_eq!(table.rows[0][1], 0.0);
    assert!((table.rows[0][2] - 1.875).abs() < 1e-10);

    let reference = twdp(&["theory", "--kind", "rsq", "--model", "reference", "--config", &cfg]);
    let table = parse_csv(&String::from_utf8(reference.stdout).unwrap()).unwrap();
    assert!((table.rows[0][2] - 2.0).abs() < 1e-12);
}

#[test]
fn resolved_scenario_is_logged() {
    let out = twdp(&["theory", "--kind", "rxx", "--seed", "11"]);
    let log = String::from_utf8_lossy(&out.stderr);
    assert!(log.contains("resolved scenario"), "{log}");
    assert!(log.contains("\"seed\":11"), "{log}");
    assert!(log.contains("\"n_sinusoids\":8"), "{log}");
}

#[test]
fn json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rzz.csv");
    let json_path = dir.path().join("rzz.json");
    let cfg = write_config(dir.path(), "twdp.toml", "k = 10\ngamma = 0.5\n");
    for (fmt, path) in [("csv", &csv_path), ("json", &json_path)] {
        let out = twdp(&["theory", "--kind", "rzz", "--config", &cfg, "--format", fmt, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let csv = parse_csv(&fs::read_to_string(&csv_path).unwrap()).unwrap();
    let json: Table = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(csv, json);
    assert_eq!(csv.columns, ["lag_s", "fd_tau", "value", "value_im"]);
}

#[test]
fn acf_matches_oracle_on_figure_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fig.toml",
        "k = 10\ngamma = 1\naoa1_rad = 0.785398\naoa2_rad = 2.094395\n",
    );
    let out = twdp(&["acf", "--kind", "rxx", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let table = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(table.columns, ["lag_s", "fd_tau", "value", "oracle_value"]);
    let worst = table.rows.iter().map(|r| (r[2] - r[3]).abs()).fold(0.0, f64::max);
    assert!(worst <= 0.05, "max deviation {worst}");
}

#[test]
fn gen_writes_one_trace_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", "k = 10\ngamma = 1\nn_samples = 64\nseed = 3\n");
    let out_dir = dir.path().join("traces");
    let out = twdp(&["gen", "--config", &cfg, "--trials", "4", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for (i, name) in names.iter().enumerate() {
        let stored = read_trace(fs::File::open(out_dir.join(name)).unwrap()).unwrap();
        assert_eq!(stored.trace.trial_index, i);
        assert_eq!(stored.trace.seed, 3);
        assert_eq!(stored.trace.len(), 64);
    }
    // Same command, same bytes.
    let again = dir.path().join("again");
    twdp(&["gen", "--config", &cfg, "--trials", "4", "--out", again.to_str().unwrap()]);
    for name in &names {
        assert_eq!(fs::read(out_dir.join(name)).unwrap(), fs::read(again.join(name)).unwrap());
    }
    assert_eq!(twdp(&["gen", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn pdf_and_lcr_emit_oracle_columns() {
    let out = twdp(&["pdf", "--trials", "50", "--bins", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let h = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(h.columns, ["z", "density", "oracle_density"]);
    assert_eq!(h.rows.len(), 30);
    let width = h.rows[1][0] - h.rows[0][0];
    let mass: f64 = h.rows.iter().map(|r| r[1] * width).sum();
    assert!((mass - 1.0).abs() < 1e-9);

    let out = twdp(&["lcr", "--trials", "20", "--thresholds", "0.5,1"]);
    assert_eq!(out.status.code(), Some(0));
    let c = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(c.columns, ["rho", "rate", "std_err", "oracle_rate"]);
    assert_eq!(c.rows.len(), 2);
}

#[test]
fn validate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = twdp(&["validate", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["seed"], 7);
}

#[test]
fn validate_configured_scenario_failure_exits_1() {
    // Far too few trials for the 0.05 tolerance with pure diffuse power.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.toml", "k = 0\nn_trials = 1\n");
    let out = twdp(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
}
