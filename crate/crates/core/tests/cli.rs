use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use coinrace::exact::dp_exact;
use coinrace::rational::half;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coinrace"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn golden(name: &str) -> Vec<u8> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn assert_golden(args: &[&str], name: &str) {
    let first = run(args);
    assert_eq!(first.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, golden(name), "{args:?} drifted from {name}");
    let second = run(args);
    assert_eq!(first.stdout, second.stdout, "{args:?} is not byte-stable");
}

#[test]
fn goldens_are_byte_stable() {
    assert_golden(&["diff", "--n", "3", "--method", "renewal"], "diff_n3_renewal.json");
    assert_golden(&["table", "--n-from", "10", "--n-to", "100", "--step", "10", "--format", "csv"], "table_10_100_10.csv");
    assert_golden(&["decompose", "HTHHHTTH"], "decompose_HTHHHTTH.json");
    assert_golden(&["exact", "--n", "4"], "exact_n4.json");
    assert_golden(&["dp", "--n", "6", "--p", "1/3"], "dp_n6_p1_3.json");
    assert_golden(&["--format", "csv", "renewal", "--m-to", "12"], "renewal_12.csv");
}

#[test]
fn diff_at_three_is_one_eighth() {
    for method in ["renewal", "dp", "enum"] {
        let out = run(&["diff", "--n", "3", "--method", method]);
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["diff"], "1/8", "{method}");
    }
}

#[test]
fn domain_error_exits_one() {
    let out = run(&["dp", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert_eq!(out.stderr, golden("dp_n0.stderr"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bogus"][..],
        &["dp", "--n", "3", "--bogus"],
        &["dp"],
        &["dp", "--n", "x"],
        &["exact", "--n", "3", "--format", "csv"],
        &[],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn table_rows_match_exact_dp() {
    let out = run(&["table", "--n-from", "10", "--n-to", "100", "--step", "10", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,pA,pB,pTie,diff,tie_asym,diff_asym"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        let n = 10 * (i + 1);
        assert_eq!(row[0], n as f64);
        let [a, b, t] = dp_exact(n, &half()).unwrap().to_float();
        assert_eq!(&row[1..4], &[a, b, t]);
        assert!((row[4] - (b - a)).abs() < 1e-15);
        let c = 0.5 / std::f64::consts::PI.sqrt();
        assert!((row[6] - c / (n as f64).sqrt()).abs() < 1e-15);
        assert!((row[5] - 2.0 * row[6]).abs() < 1e-15);
    }
}

#[test]
fn decompose_reads_stdin() {
    let mut child = bin()
        .arg("decompose")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"HTHHHTTH\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, golden("decompose_HTHHHTTH.json"));
}

#[test]
fn bad_sequence_names_position() {
    let out = run(&["decompose", "HTXH"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 3"));
}

#[test]
fn json_records_carry_method_tags() {
    for (args, method) in [
        (&["exact", "--n", "5"][..], "enum"),
        (&["dp", "--n", "5"], "dp-exact"),
        (&["dp", "--n", "5", "--mode", "float"], "dp-float"),
        (&["mc", "--n", "5", "--trials", "1000", "--seed", "1"], "mc"),
        (&["asym", "--n", "5"], "asym"),
        (&["renewal", "--m-to", "5"], "renewal"),
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["method"], method, "{args:?}");
        assert_eq!(v["command"], args[0]);
    }
}

#[test]
fn mc_is_reproducible_and_calibrated() {
    let args = ["mc", "--n", "50", "--trials", "200000", "--seed", "9"];
    let a = run(&args);
    assert_eq!(a.stdout, run(&args).stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let [_, b, _] = dp_exact(50, &half()).unwrap().to_float();
    let z = (v["p_b"].as_f64().unwrap() - b) / v["stderr_b"].as_f64().unwrap();
    assert!(z.abs() < 4.0, "z = {z}");
}

#[test]
fn verify_quick_passes_and_names_each_check() {
    let out = run(&["verify", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 20);
    let mut names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), checks.len());
}
