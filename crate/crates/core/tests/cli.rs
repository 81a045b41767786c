use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flower-auction"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn header(path: &Path) -> Value {
    let text = fs::read_to_string(path).unwrap();
    let first = text.lines().next().unwrap();
    let json = first.strip_prefix("# ").unwrap_or(first);
    let v: Value = serde_json::from_str(json).unwrap();
    v.get("header").cloned().unwrap_or(v)
}

#[test]
fn solve_writes_profile_curve_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--n", "2", "--cost", "linear:0.5", "--s", "0.462"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    let eu_a = metrics["metrics"]["flower"]["eu_a"].as_f64().unwrap();
    assert!((eu_a - 0.338).abs() < 0.003);
    let profile = fs::read_to_string(dir.path().join("profile.json")).unwrap();
    assert!(profile.starts_with("{\"header\":"));
    let curve = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert_eq!(curve.lines().nth(1), Some("v,b"));
    for f in ["profile.json", "curve.csv", "metrics.json"] {
        let h = header(&dir.path().join(f));
        assert_eq!(h["command"], "solve");
        assert_eq!(h["config"]["cost"], "linear:0.5");
        assert_eq!(h["version"], env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn costless_dutch_solve_hits_myerson() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--s", "1", "--cost", "none", "--n", "2"], dir.path());
    assert!(out.status.success());
    let metrics: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    let eu_a = metrics["metrics"]["flower"]["eu_a"].as_f64().unwrap();
    assert!((eu_a - 1.0 / 3.0).abs() < 1e-3);
}

#[test]
fn invalid_cost_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--cost", "linear:1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("must lie in [0, 1)"));
    let out = run(&["solve", "--s", "0.4", "--n", "two"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_strict_and_yields_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n": 3, "speed": 1}"#).unwrap();
    let out = run(&["optimize", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    fs::write(&cfg, r#"{"n": 3, "cost": "linear:0.5"}"#).unwrap();
    let out = run(&["optimize", "--config", cfg.to_str().unwrap(), "--n", "2"], dir.path());
    assert!(out.status.success());
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("optimize.json")).unwrap()).unwrap();
    assert_eq!(doc["header"]["config"]["n"], 2);
    let s_star = doc["results"][0]["s_star"].as_f64().unwrap();
    assert!((s_star - 0.462).abs() < 0.005);
}

#[test]
fn sweep_emits_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--mu", "0.1,0.7", "--n", "2,10"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# "));
    assert_eq!(
        lines[1],
        "mu,n,objective,s_star,p_star,s_tilde,eu_a_ratio,eu_b_ratio,eu_s_ratio,ed_ratio,flags"
    );
    assert_eq!(lines.len(), 6);
    let first: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(&first[..3], &["0.1", "2", "auctioneer"]);
    let ratio: f64 = first[6].parse().unwrap();
    assert!((ratio - 1.0575).abs() < 0.01);
    assert!(!text.contains('\r'));
}

#[test]
fn simulate_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--draws", "1000", "--seed", "7"];
    assert!(run(&args, a.path()).status.success());
    let mut args_b = args.to_vec();
    args_b.extend(["--threads", "1"]);
    assert!(run(&args_b, b.path()).status.success());
    for f in ["records.csv", "summary.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn header_config_regenerates_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(&["simulate", "--draws", "300", "--seed", "4", "--cost", "exp:0.3", "--n", "3"], a.path())
        .status
        .success());
    let h = header(&a.path().join("records.csv"));
    let cfg = b.path().join("cfg.json");
    fs::write(&cfg, h["config"].to_string()).unwrap();
    assert!(run(&["simulate", "--config", cfg.to_str().unwrap()], b.path()).status.success());
    assert_eq!(
        fs::read(a.path().join("records.csv")).unwrap(),
        fs::read(b.path().join("records.csv")).unwrap()
    );
}

#[test]
fn reproduce_fig1_passes_and_writes_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "fig1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = fs::read_to_string(dir.path().join("fig1.csv")).unwrap();
    assert_eq!(text.lines().nth(1), Some("x,y,series"));
    assert!(text.lines().any(|l| l.ends_with(",dutch")));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn reproduce_example_reports_each_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "example"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["s_star", "cutoff", "s_tilde", "eu_a", "eu_a_dutch", "eu_a_english", "ed"] {
        let line = stdout
            .lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .unwrap_or_else(|| panic!("no line for {name}"));
        assert!(line.ends_with("PASS"), "{line}");
    }
    // the exit code reflects the full report
    let failed = stdout.lines().filter(|l| l.ends_with("FAIL")).count();
    assert_eq!(out.status.code(), Some(if failed == 0 { 0 } else { 4 }));
}
