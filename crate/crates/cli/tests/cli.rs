use std::process::{Command, Output};

use serde_json::Value;

fn riesz_tau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riesz-tau"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_example1_counts() {
    let tau = json(&riesz_tau(&[
        "solve",
        "--example",
        "1",
        "--alpha",
        "1.2",
        "--n",
        "63",
        "--precond",
        "tau",
    ]));
    assert_eq!(tau["iterations"], 5);
    assert!(tau["max_error"].as_f64().unwrap() < 1e-2);
    assert!(tau["lambda_min"].is_null());
    let none = json(&riesz_tau(&[
        "solve",
        "--example",
        "1",
        "--alpha",
        "1.2",
        "--n",
        "63",
        "--precond",
        "none",
    ]));
    assert_eq!(none["iterations"], 32);
}

#[test]
fn report_keys_are_stable() {
    let v = json(&riesz_tau(&["solve", "--example", "2", "--n", "15"]));
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in [
        "manifest",
        "iterations",
        "residual_history",
        "lambda_min",
        "lambda_max",
        "max_error",
        "wall_ms",
    ] {
        assert!(keys.contains(&k), "{k}");
    }
    let m = &v["manifest"];
    assert_eq!(m["command"], "solve");
    assert_eq!(m["problem"]["axes"].as_array().unwrap().len(), 2);
    assert_eq!(v["residual_history"][0], 1.0);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["solve", "--example", "1", "--precond", "tau", "--tol", "-1"][..],
        &["table", "--table", "9"],
        &["solve", "--example", "2", "--alpha", "1.1,1.2,1.3"],
        &["solve", "--example", "2", "--precond", "banded"],
        &["solve", "--dim", "1", "--alpha", "2.5", "--n", "7"],
        &["solve", "--alpha", "1.5", "--n", "7"],
        &["solve", "--example", "1", "--precond", "multigrid"],
        &["solve", "--example", "1", "--rhs", "ones"],
    ] {
        assert_eq!(riesz_tau(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn dense_spectrum_over_cap_exits_4() {
    let out = riesz_tau(&[
        "spectrum",
        "--example",
        "2",
        "--n",
        "127",
        "--method",
        "dense",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn spectrum_lanczos_matches_dense() {
    let args = [
        "spectrum",
        "--example",
        "1",
        "--alpha",
        "1.8",
        "--n",
        "64",
        "--size-convention",
        "intervals",
    ];
    let lz = json(&riesz_tau(&args));
    assert!((lz["lambda_min"].as_f64().unwrap() - 0.8721).abs() < 1e-3);
    assert!((lz["lambda_max"].as_f64().unwrap() - 1.0001).abs() < 1e-3);
    let dir = tempfile::tempdir().unwrap();
    let eig = dir.path().join("eig.csv");
    let mut dense_args = args.to_vec();
    dense_args.extend(["--method", "dense", "--eigenvalues", eig.to_str().unwrap()]);
    let dense = json(&riesz_tau(&dense_args));
    assert!(
        (dense["lambda_min"].as_f64().unwrap() - lz["lambda_min"].as_f64().unwrap()).abs() < 1e-8
    );
    assert!(dense["condition_number"].as_f64().unwrap() < 3.0);
    let rows = std::fs::read_to_string(eig).unwrap();
    assert_eq!(rows.lines().count(), 64);
}

#[test]
fn explicit_problem_on_general_domain() {
    let v = json(&riesz_tau(&[
        "solve", "--dim", "2", "--alpha", "1.3,1.7", "--d", "2,0.5", "--domain", "-1:1,0:2", "--n",
        "31",
    ]));
    assert_eq!(v["converged"], true);
    let axes = &v["manifest"]["problem"]["axes"];
    assert_eq!(axes[0]["a"], -1.0);
    assert_eq!(axes[1]["d"], 0.5);
}

#[test]
fn example4_solve_and_indefinite_flag() {
    let v = json(&riesz_tau(&["solve", "--example", "4", "--n", "32"]));
    assert_eq!(v["manifest"]["seed"], 0);
    assert!(v["max_error"].is_null());
    let ones = json(&riesz_tau(&[
        "solve",
        "--example",
        "4",
        "--n",
        "16",
        "--rhs",
        "ones",
        "--precond",
        "tau-natural",
        "--allow-indefinite",
    ]));
    assert_eq!(ones["converged"], true);
}

#[test]
fn table1_csv_layout() {
    let out = riesz_tau(&["table", "--table", "1", "--max-size", "128"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "alpha,size,tau,circulant,banded,none,tau_ms,circulant_ms,banded_ms,none_ms"
    );
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines[1].starts_with("1.2,64,5,5,9,32,"));
}

#[test]
fn replay_reproduces_solve() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = riesz_tau(&[
        "solve",
        "--example",
        "3",
        "--n",
        "15",
        "--precond",
        "circulant",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let manifest = dir.path().join("manifest.json");
    std::fs::write(&manifest, a["manifest"].to_string()).unwrap();
    let b = json(&riesz_tau(&["replay", manifest.to_str().unwrap()]));
    assert_eq!(a["iterations"], b["iterations"]);
    assert_eq!(a["residual_history"], b["residual_history"]);
    assert_eq!(a["manifest"]["problem"], b["manifest"]["problem"]);
}

#[test]
fn replay_of_missing_manifest_is_usage_error() {
    assert_eq!(
        riesz_tau(&["replay", "/nonexistent/m.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn thread_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_riesz-tau"))
        .args(["table", "--table", "1", "--max-size", "64"])
        .env("RIESZ_TAU_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_riesz-tau"))
        .args([
            "table",
            "--table",
            "1",
            "--max-size",
            "64",
            "--format",
            "json",
        ])
        .env("RIESZ_TAU_THREADS", "2")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["manifest"]["threads"], 2);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}
