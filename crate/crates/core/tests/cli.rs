use std::process::{Command, Output};

use serde_json::Value;

fn powerweight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powerweight")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn check_satisfied_example() {
    let out = powerweight(&["check", "--thm", "1", "--s1", "-0.25", "--s2", "-0.25", "--kappa", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["satisfied"], true);
    assert_eq!(v["result"]["margin"].as_f64(), Some(0.5));
    assert_eq!(v["config"]["subcommand"], "check");
}

#[test]
fn check_inapplicable_exits_3() {
    let out = powerweight(&["check", "--thm", "1", "--s1", "0.5", "--s2", "0", "--kappa", "9"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["result"]["applicable"], false);
}

#[test]
fn oracle_majorant_example() {
    let out = powerweight(&["oracle", "majorant", "--x", "0", "--a", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["value"].as_f64(), Some(2.0));
}

#[test]
fn oracle_powerlaw_norm() {
    let out = powerweight(&["oracle", "powerlaw-norm", "--t", "1", "--space", "Hsp(-1,4)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out)["result"]["value"].as_f64().unwrap();
    assert!((v - (2.0f64 / 7.0).powf(0.25)).abs() < 1e-15);
}

#[test]
fn divergence_is_numerical_failure() {
    let out = powerweight(&["oracle", "majorant", "--x", "0", "--a", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error kind=divergence code=2"));
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["frobnicate"][..],
        &["check", "--thm", "4", "--s1", "-1", "--s2", "0", "--kappa", "2"],
        &["norm", "--space", "H(-1", "--function", "gauss(1)"],
        &["apply", "--kernel", "wiggle(2)"],
        &["opnorm", "--grid", "grid(10,0,1.3,8)"],
    ] {
        let out = powerweight(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error kind="), "{err}");
    }
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        &["check"][..],
        &["norm"],
        &["apply"],
        &["opnorm"],
        &["sweep"],
        &["corner"],
        &["oracle"],
        &["oracle", "majorant"],
        &["oracle", "powerlaw-norm"],
    ] {
        let mut args = sub.to_vec();
        args.push("--help");
        let out = powerweight(&args);
        assert_eq!(out.status.code(), Some(0), "{sub:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("Usage:"), "{sub:?}");
        if sub != ["oracle"] {
            assert!(text.contains("Exit codes"), "{sub:?}");
        }
    }
}

#[test]
fn norm_of_indicator() {
    let out = powerweight(&["norm", "--space", "H(0)", "--function", "indicator(0,1)", "--grid", "grid(4,4,1,8)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out)["result"]["norm"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-14, "{v}");
}

#[test]
fn apply_matches_closed_form() {
    let out = powerweight(&[
        "apply",
        "--kernel",
        "envelope(2)",
        "--function",
        "indicator(0,1)",
        "--grid",
        "grid(1,4,1,8)",
        "--x",
        "0,-1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let pts = v["result"].as_array().unwrap();
    assert!((pts[0]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(pts[1]["x"].as_f64(), Some(-1.0));
    assert!((pts[1]["value"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn opnorm_reports_certified_estimate() {
    let out = powerweight(&["opnorm", "--source", "Hsp(-0.5,3)", "--target", "Hsp(-0.5,2)", "--grid", "grid(20,8,1.3,6)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["certified"], true);
    assert!(v["result"]["norm"].as_f64().unwrap() > 0.0);
    assert!(v["result"]["tail_bound"].as_f64().is_some());
}

#[test]
fn corner_solves() {
    let out = powerweight(&["corner", "--grid", "grid(20,6,1.3,6)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["result"]["residual_1"].as_f64().unwrap() < 1e-10);
    assert!(v["result"]["residual_2"].as_f64().unwrap() < 1e-10);
}

#[test]
fn sweep_csv_layout_and_verdicts() {
    let out = powerweight(&[
        "sweep",
        "--query",
        "thm1(-0.25,-0.25,1.5)",
        "--query",
        "thm1(-1,0,0)",
        "--r-schedule",
        "10,40,160",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("row,query,theorem"));
    assert_eq!(rows.len(), 1 + 2 * (3 + 1));
    assert!(rows[4].starts_with("summary,0") && rows[4].ends_with(",saturating"));
    assert!(rows[8].starts_with("summary,1") && rows[8].ends_with(",growing"));
    assert!(text.starts_with("# powerweight "));
}

#[test]
fn sweep_with_inapplicable_query_exits_3() {
    let out = powerweight(&["sweep", "--query", "thm1(0.5,0,3)", "--r-schedule", "10,40"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stdout.is_empty());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"source": "H(-1)", "function": "powerlaw(1)", "grid": "grid(1000,30,1.3,8)"}"#).unwrap();
    let from_file = json(&powerweight(&["norm", "--config", cfg.to_str().unwrap()]));
    assert_eq!(from_file["config"]["source"], "H(-1)");
    let overridden = json(&powerweight(&["norm", "--config", cfg.to_str().unwrap(), "--space", "H(0)"]));
    assert_eq!(overridden["config"]["source"], "H(0)");
    assert_eq!(overridden["config"]["function"], "powerlaw(1)");
    assert_ne!(from_file["result"]["norm"], overridden["result"]["norm"]);

    std::fs::write(&cfg, r#"{"sorce": "H(-1)"}"#).unwrap();
    let bad = powerweight(&["norm", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = powerweight(&["oracle", "majorant", "--x", "1", "--a", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["value"].as_f64(), Some(0.25));
}

#[test]
fn same_argv_same_bytes() {
    let args = ["sweep", "--query", "thm2(-0.5,-0.5,3,2,1.75)", "--r-schedule", "10,40", "--seed", "9"];
    assert_eq!(powerweight(&args).stdout, powerweight(&args).stdout);
}
