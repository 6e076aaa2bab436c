use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn ftqc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftqc")).args(args).arg("--out").arg(out).env_remove("FTQC_OUT_DIR").output().expect("binary runs")
}

fn report(out: &Path, stem: &str) -> Value {
    let text = std::fs::read_to_string(out.join(format!("{stem}.json"))).expect("report written");
    serde_json::from_str(&text).expect("valid JSON")
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn threshold_analytic_reports_eta_c() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftqc(&["threshold", "analytic", "--A", "100", "--k", "1", "--eta", "1e-4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "threshold-analytic");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["seed"], 0);
    assert!((r["result"]["eta_c"].as_f64().unwrap() - 2.0202e-4).abs() < 1e-8);
    assert_eq!(r["result"]["eta_c_rational"], "1/4950");
    assert_eq!(r["config"]["threshold"]["analytic"]["a"], 100);
    let csv = std::fs::read_to_string(dir.path().join("threshold-analytic.csv")).unwrap();
    assert!(csv.starts_with("r,effective_rate,sparse_prob_bound,minimal_bad_bound\n"));
    assert_eq!(csv.lines().count(), 4);
    // stdout carries the same report
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(without_timings(printed), without_timings(r));
}

#[test]
fn code_check_poly_11_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftqc(&["code", "check", "--kind", "poly", "--p", "11", "--d", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "code-check");
    assert_eq!(r["result"]["t"], 1);
    assert_eq!(r["result"]["m"], 7);
    assert_eq!(r["pass"], true);
    assert_eq!(r["result"]["checks"]["errors_tested"], 2 * 7 * 120);
}

#[test]
fn code_build_writes_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftqc(&["code", "build", "--kind", "steane"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("code-build.code.txt")).unwrap();
    let o = ftqc(&["code", "check", "--code-file", dir.path().join("code-build.code.txt").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(report(dir.path(), "code-check")["result"]["checks"]["errors_tested"], 42);
}

#[test]
fn steane_ec_spread_is_at_most_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftqc(&["gadget", "spread", "--code", "steane", "--gadget", "ec", "--max-l", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "gadget-spread");
    let l = r["result"]["spread"]["l"].as_u64().unwrap();
    assert!((1..=4).contains(&l), "{l}");
    assert_eq!(r["result"]["spread"]["conservative"], 0);
}

#[test]
fn routed_cnot_spread_within_twice() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftqc(&["gadget", "spread", "--gadget", "cnot", "--routed"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "gadget-spread");
    assert_eq!(r["result"]["spread"]["l"], 1);
    assert!(r["result"]["routed"]["l"].as_u64().unwrap() <= 2);
}

#[test]
fn gadget_verify_poly_toffoli() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftqc(&["gadget", "verify", "--code", "poly", "--p", "5", "--d", "1", "--gadget", "toffoli"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "gadget-verify");
    assert_eq!(r["result"]["inputs_checked"], 126);
    assert!(r["result"]["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ftqc(&["threshold", "analytic", "--A", "1", "--k", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(ftqc(&["no-such-command"], dir.path()).status.code(), Some(2));
    assert_eq!(ftqc(&["gadget", "verify", "--gadget", "bogus"], dir.path()).status.code(), Some(2));
    // The check runs but fails: transversal CNOT has spread 1.
    let o = ftqc(&["gadget", "spread", "--gadget", "cnot", "--max-l", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(dir.path(), "gadget-spread")["pass"], false);
}

#[test]
fn same_seed_same_report() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["threshold", "mc", "--A", "20", "--eta", "0.01", "--trials", "20000", "--seed", "9"];
    ftqc(&args, a.path());
    ftqc(&args, b.path());
    let (ra, rb) = (report(a.path(), "threshold-mc"), report(b.path(), "threshold-mc"));
    let mut x = without_timings(ra.clone());
    let mut y = without_timings(rb);
    x["argv"] = Value::Null;
    y["argv"] = Value::Null;
    assert_eq!(x, y);
    assert_eq!(std::fs::read(a.path().join("threshold-mc.csv")).unwrap(), std::fs::read(b.path().join("threshold-mc.csv")).unwrap());
    assert_eq!(ra["result"]["mc"]["seed"], 9);
    let csv = std::fs::read_to_string(a.path().join("threshold-mc.csv")).unwrap();
    assert!(csv.starts_with("trial_block,sparse_fraction,stderr\n"));

    let c = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    other[9] = "10";
    ftqc(&other, c.path());
    assert_ne!(report(c.path(), "threshold-mc")["result"]["mc"]["estimate"], ra["result"]["mc"]["estimate"]);
}

#[test]
fn mc_matches_binomial() {
    let dir = tempfile::tempdir().unwrap();
    ftqc(&["threshold", "mc", "--A", "20", "--k", "1", "--r", "1", "--eta", "0.01", "--trials", "100000", "--seed", "1"], dir.path());
    let r = report(dir.path(), "threshold-mc");
    let est = r["result"]["mc"]["estimate"].as_f64().unwrap();
    let se = r["result"]["mc"]["stderr"].as_f64().unwrap();
    assert!(((1.0 - est) - 0.016859).abs() < 3.0 * se);
}

#[test]
fn rerun_reproduces_numbers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ftqc(&["threshold", "mc", "--A", "6", "--r", "2", "--eta", "0.02", "--trials", "5000", "--noise", "burst", "--seed", "4"], a.path());
    let o = ftqc(&["rerun", a.path().join("threshold-mc.json").to_str().unwrap()], b.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (x, y) = (report(a.path(), "threshold-mc"), report(b.path(), "threshold-mc"));
    for k in ["config", "seed", "result", "rows", "pass", "command"] {
        assert_eq!(x[k], y[k], "{k}");
    }
}

#[test]
fn env_var_sets_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ftqc")).args(["univcheck", "--p", "7", "--i", "3"]).env("FTQC_OUT_DIR", dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "univcheck");
    assert_eq!(r["result"]["det_one"], true);
    // Not tabular: valid JSON with empty rows and no CSV.
    assert_eq!(r["rows"], Value::Array(vec![]));
    assert!(!dir.path().join("univcheck.csv").exists());
}

#[test]
fn help_schema_lists_columns() {
    let o = Command::new(env!("CARGO_BIN_EXE_ftqc")).arg("--help-schema").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("trial_block, sparse_fraction, stderr"));
    assert!(s.contains("schema_version"));
}

#[test]
fn route_and_compile_files() {
    let dir = tempfile::tempdir().unwrap();
    let circ = dir.path().join("c.txt");
    std::fs::write(&circ, "p 2 inputs 4\n\n0 h - 0\n\n1 cnot - 0 3\n\n2 toffoli - 3 1 2\n").unwrap();
    let o = ftqc(&["route", "--circuit", circ.to_str().unwrap(), "--verify", "--layout", "0,1,2,3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "route");
    assert_eq!(r["result"]["adjacent"], true);
    assert_eq!(r["result"]["equivalent"], true);
    // The Toffoli operands already sit on consecutive positions.
    assert_eq!(r["result"]["swaps"], 4);
    assert!(dir.path().join("route.circuit.txt").exists());

    std::fs::write(&circ, "p 2 inputs 2\n\n0 h - 0\n\n1 cnot - 0 1\n").unwrap();
    let o = ftqc(&["compile", "--circuit", circ.to_str().unwrap(), "--ec", "ideal", "--no-boundary", "--verify-propagation"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "compile");
    assert_eq!(r["result"]["propagation"]["violations"], 0);
    assert_eq!(r["result"]["wires"], 14);
    let o = ftqc(&["compile", "--circuit", dir.path().join("missing.txt").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
