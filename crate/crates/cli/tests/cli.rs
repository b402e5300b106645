use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use diqkd_cli::reproduce::Target;
use diqkd_cli::{exit, output_path, rows_to_csv, Outcome, Row, RunConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_diqkd"));
    for var in ["DIQKD_CONFIG", "DIQKD_SEED", "DIQKD_WORKERS", "DIQKD_OUT", "DIQKD_LEVEL", "DIQKD_TOL"] {
        c.env_remove(var);
    }
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn certify_tsirelson() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["certify", fixture("tsirelson.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS));
    let cert = json(&dir.path().join("certificate.json"));
    assert_eq!(cert["local"], false);
    assert!((cert["w_star"].as_f64().unwrap() - (1.0 - 0.5f64.sqrt())).abs() < 1e-6);
    assert!((cert["G"].as_f64().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn certify_deterministic_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["certify", fixture("deterministic.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS));
    let cert = json(&dir.path().join("certificate.json"));
    assert_eq!(cert["local"], true);
    assert!((cert["G"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn certify_lossy_csv_below_threshold_is_local() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["certify", fixture("lossy_0.7.csv").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&dir.path().join("certificate.json"))["local"], true);
}

#[test]
fn malformed_config_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ \"scheme\": ").unwrap();
    let out = dir.path().join("out");
    let o = bin().args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "simulate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, "{ \"seed\": 3 }").unwrap();
    let o = bin().args(["--config", cfg.to_str().unwrap(), "simulate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(exit::CONFIG));
}

#[test]
fn out_of_range_parameter_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.scheme.eta_t = 1.5;
    let path = dir.path().join("c.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let o = bin().args(["--config", path.to_str().unwrap(), "simulate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(exit::CONFIG));
}

#[test]
fn missing_behavior_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["certify", "/nonexistent/behavior.json"], dir.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG));
}

#[test]
fn simulate_with_blind_detectors() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.scheme.eta_d = 0.0;
    let path = dir.path().join("c.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("out");
    let o = bin().args(["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "simulate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(exit::PASS), "{}", String::from_utf8_lossy(&o.stderr));
    let b = diqkd::behavior::Behavior::read(&out.join("behavior.json")).unwrap();
    // Only the no-click pair survives.
    for x in 0..b.scenario.ma {
        for y in 0..b.scenario.mb {
            assert!((b.p(0, 0, x, y) - 1.0).abs() < 1e-12);
        }
    }
    let summary = json(&out.join("summary.json"));
    assert!(summary["p_herald"].as_f64().unwrap() > 0.0);
    assert!((summary["leading_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn vanishing_herald_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.scheme.eta_h = 0.0;
    let path = dir.path().join("c.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "simulate"], dir.path());
    assert_eq!(o.status.code(), Some(exit::NUMERICAL));
}

#[test]
fn env_overrides_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_env");
    let o = bin().env("DIQKD_OUT", &out).arg("simulate").output().unwrap();
    assert_eq!(o.status.code(), Some(exit::PASS));
    assert!(out.join("behavior.json").exists());
}

#[test]
fn reproduce_fast_targets_pass() {
    let dir = tempfile::tempdir().unwrap();
    for target in ["appendixC", "fig1", "amplifier"] {
        let o = run(&["reproduce", target], dir.path());
        assert_eq!(o.status.code(), Some(exit::PASS), "{target}: {}", String::from_utf8_lossy(&o.stdout));
        let rows = std::fs::read_to_string(dir.path().join(format!("{target}_acceptance.csv"))).unwrap();
        assert!(rows.starts_with("target,quantity,computed,paper,tolerance,pass"));
    }
    for f in ["fig1.csv", "fig1.gp", "amplifier.csv", "amplifier.gp", "appendixC.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn unknown_target_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "fig9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!("fig9".parse::<Target>().is_err());
    assert!("appendixC".parse::<Target>().is_ok());
}

#[test]
fn failed_row_fails_the_outcome() {
    let rows = vec![Row::within("t", "q", 1.0, 1.0, 0.1), Row::within("t", "r", 2.0, 1.0, 0.1)];
    assert!(rows[0].pass && !rows[1].pass);
    let outcome = Outcome { rows: rows.clone(), files: vec![] };
    assert!(!outcome.passed());
    assert_eq!(rows_to_csv(&rows).unwrap().lines().count(), 3);
}

#[test]
fn outputs_stay_inside_the_directory() {
    let d = Path::new("/tmp/x");
    assert!(output_path(d, "a.csv").is_ok());
    assert!(output_path(d, "../a.csv").is_err());
    assert!(output_path(d, "/etc/passwd").is_err());
}
