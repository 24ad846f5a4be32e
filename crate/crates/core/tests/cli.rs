use std::path::Path;
use std::process::{Command, Output};

fn tsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsl"))
        .args(args)
        .output()
        .expect("tsl binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn targets_are_byte_stable_and_match_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(tsl(&["targets", "--count", "100", "--out", path(&a)]).status.code(), Some(0));
    assert_eq!(tsl(&["targets", "--count", "100", "--out", path(&b)]).status.code(), Some(0));
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let fixture = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/targets_100.json")).unwrap();
    assert_eq!(first, fixture);
}

#[test]
fn missing_input_is_a_domain_error_naming_the_path() {
    let out = tsl(&["means", "--in", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("missing.json"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = tsl(&["construct", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8(out.stderr).unwrap().contains("Usage"));
    assert_eq!(tsl(&["--help"]).status.code(), Some(0));
}

#[test]
fn construct_means_fit_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    let ledger = dir.path().join("ledger.csv");
    let means = dir.path().join("means.csv");
    let fit = dir.path().join("fit.json");
    let out = tsl(&[
        "construct", "--alpha", "0", "--gamma", "0", "--max-degree", "65536",
        "--out", path(&f), "--ledger", path(&ledger),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ledger_text = std::fs::read_to_string(&ledger).unwrap();
    assert!(ledger_text.starts_with("n,k,gate,budget,lo,hi,skip_reason\n"));
    assert!(ledger_text.contains(",none\n"));

    let out = tsl(&["means", "--in", path(&f), "--p", "1,2,inf", "--grid", "dyadic:8", "--out", path(&means)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let means_text = std::fs::read_to_string(&means).unwrap();
    assert!(means_text.starts_with("p,r,value,quadrature_size\n"));
    assert_eq!(means_text.lines().count(), 1 + 3 * 8);

    let out = tsl(&["means", "--in", path(&f), "--out", path(&means)]);
    assert_eq!(out.status.code(), Some(0));
    let out = tsl(&["fit", "--in", path(&means), "--p", "2", "--gamma", "0", "--out", path(&fit)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&fit).unwrap()).unwrap();
    for key in ["slope", "intercept", "residual_rms", "predicted", "verdict"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    assert_eq!(v["predicted"], 0.5);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"count": 7}"#).unwrap();
    let out = tsl(&["targets", "--config", path(&config)]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 7);
    let out = tsl(&["targets", "--config", path(&config), "--count", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);

    std::fs::write(&config, r#"{"cuont": 7}"#).unwrap();
    assert_eq!(tsl(&["targets", "--config", path(&config)]).status.code(), Some(1));
}

#[test]
fn density_csv_columns() {
    let out = tsl(&["density", "--set", "powers", "--gamma", "1", "--horizon", "1024", "--from", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,gamma,ratio,log_numerator,log_denominator"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn verify_lemmas_report_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = tsl(&["verify", "--suite", "lemmas", "--seed", "11", "--instances", "200", "--report", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["passed"], true);
    assert_eq!(v["lemmas"][0]["master_seed"], 11);
}

#[test]
fn repro_by_name() {
    let out = tsl(&["repro", "--theorem", "parseval", "--theorem", "shift-telescoping"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("parseval") && text.contains("PASS"), "{text}");
    assert_eq!(tsl(&["repro", "--theorem", "no-such-criterion"]).status.code(), Some(1));
}

#[test]
fn repro_failure_exits_two_with_report_path() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = tsl(&["repro", "--theorem", "growth-gamma05-p2", "--report", path(&report)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains(path(&report)));
    assert!(report.exists());
}
