use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ridge_sketch::io::read_problem;
use ridge_sketch::report::REPORT_SCHEMA;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ridge-sketch"));
    c.env_remove(ridge_sketch::cli::SEED_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, m: usize, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    ok(&[
        "generate",
        "--m",
        &m.to_string(),
        "--n",
        &n.to_string(),
        "--sigma-max",
        "1",
        "--sigma-min",
        "1e-6",
        "--noise",
        "1e-3",
        "--seed",
        &seed.to_string(),
        "-o",
        s(&path),
    ]);
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "prob.rskm", 600, 40, 7);
    for f in ["prob.rskm", "prob.b", "prob.meta.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let meta = read_json(&dir.path().join("prob.meta.json"));
    assert_eq!(meta["rows"], 600);
    assert_eq!(meta["cols"], 40);
    let p = read_problem(&path, None).unwrap();
    assert_eq!((p.rows(), p.cols()), (600, 40));
}

#[test]
fn sweep_report_has_records_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "prob.rskm", 600, 40, 7);
    let report = dir.path().join("out.json");
    let csv = dir.path().join("out.csv");
    ok(&[
        "sweep",
        "--method",
        "lowrank",
        "--alpha",
        "2",
        "--lambdas",
        "10:1e-10:13log",
        "-i",
        s(&path),
        "--report",
        s(&report),
        "--csv",
        s(&csv),
        "--history",
    ]);
    let json = read_json(&report);
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), 13);
    assert_eq!(json["method"], "lowrank");
    assert_eq!(json["counters"]["svds"], 1);
    assert_eq!(json["counters"]["embeddings_drawn"], 1);
    assert!(records[0]["residual_history"].is_array());

    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&json).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,iters,resid,xnorm,s_i,sd_hat,factor_time_s,solve_time_s"
    );
    assert_eq!(lines.count(), 13);
}

#[test]
fn every_method_validates_against_schema() {
    let dir = tempfile::tempdir().unwrap();
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let tall = generate(dir.path(), "tall.rskm", 120, 10, 1);
    let wide = generate(dir.path(), "wide.rskm", 10, 120, 2);
    let cases = [
        (&tall, "chol"),
        (&tall, "qr-baseline"),
        (&tall, "qr_baseline"),
        (&tall, "unpreconditioned"),
        (&wide, "chol"),
        (&wide, "lowrank"),
    ];
    for (i, (input, method)) in cases.into_iter().enumerate() {
        let report = dir.path().join(format!("r{i}.json"));
        ok(&[
            "sweep",
            "-i",
            s(input),
            "--method",
            method,
            "--lambdas",
            "1,1e-3,1e-6",
            "--report",
            s(&report),
            "--include-solutions",
        ]);
        let json = read_json(&report);
        assert!(validator.is_valid(&json), "{method}");
        assert_eq!(json["records"][0]["solution"].as_array().unwrap().len(), json["cols"].as_u64().unwrap() as usize);
    }
}

#[test]
fn sweep_without_outputs_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "p.rskm", 80, 8, 3);
    let out = ok(&["sweep", "-i", s(&path), "--lambdas", "1:1e-2:3log"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("lambda,iters,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn lcurve_writes_points_and_corner() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "p.rskm", 200, 20, 4);
    let out_csv = dir.path().join("l.csv");
    let out = ok(&[
        "lcurve",
        "-i",
        s(&path),
        "--lambdas",
        "10:1e-10:13log",
        "-o",
        s(&out_csv),
    ]);
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "lambda,log10_residual,log10_solution_norm,corner");
    assert_eq!(rows.len(), 14);
    assert_eq!(rows[1..].iter().filter(|r| r.ends_with(",1")).count(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corner: lambda ="));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["sweep", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "p.rskm", 30, 5, 5);
    assert_eq!(
        run(&["sweep", "-i", s(&path), "--lambdas", "1:0:3log"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["sweep", "-i", s(&path), "--lambdas", "1", "--threads", "0"]).status.code(),
        Some(2)
    );
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("sweep"));
}

fn error_record(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let line = stderr.lines().last().unwrap();
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {stderr}"))
}

#[test]
fn runtime_errors_exit_one_with_json_record() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.rskm");
    let rec = error_record(&run(&["sweep", "-i", s(&missing), "--lambdas", "1"]));
    assert!(rec["error"]["kind"].is_string());
    assert!(rec["error"]["message"].as_str().unwrap().contains("nope.rskm"));

    let path = generate(dir.path(), "p.rskm", 30, 5, 6);
    let out = run(&["sweep", "-i", s(&path), "--lambdas", "1", "--sketch-size", "31"]);
    let rec = error_record(&out);
    assert!(rec["error"]["message"].as_str().unwrap().contains("sketch"));

    let wide = generate(dir.path(), "w.rskm", 5, 30, 6);
    let out = run(&["sweep", "-i", s(&wide), "--lambdas", "1", "--method", "qr-baseline"]);
    error_record(&out);
}

#[test]
fn breakdown_reports_lambda_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.mtx");
    std::fs::write(
        &path,
        "%%MatrixMarket matrix coordinate real general\n3 2 2\n1 1 1e200\n2 2 1\n",
    )
    .unwrap();
    let rhs = dir.path().join("bad_b.mtx");
    std::fs::write(&rhs, "%%MatrixMarket matrix array real general\n3 1\n1\n1\n1\n").unwrap();
    let out = run(&[
        "sweep",
        "-i",
        s(&path),
        "--rhs",
        s(&rhs),
        "--lambdas",
        "1,0.5",
        "--embedding",
        "srtt",
        "--sketch-size",
        "3",
    ]);
    let rec = error_record(&out);
    assert_eq!(rec["error"]["lambda_index"], 0);
    assert_eq!(rec["error"]["lambda"], 1.0);
}

#[test]
fn seed_environment_variable_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.rskm", 20, 4, 5);
    let b = dir.path().join("b.rskm");
    let out = bin()
        .env(ridge_sketch::cli::SEED_ENV, "5")
        .args(["generate", "--m", "20", "--n", "4", "--sigma-min", "1e-6", "--seed", "99", "-o", s(&b)])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = generate(dir.path(), "c.rskm", 20, 4, 99);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());

    let bad = bin()
        .env(ridge_sketch::cli::SEED_ENV, "minus-one")
        .args(["generate", "--m", "3", "--n", "2", "-o", s(&dir.path().join("x.rskm"))])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "p.rskm", 300, 30, 8);
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let report = dir.path().join(format!("t{threads}.json"));
        ok(&[
            "sweep",
            "-i",
            s(&path),
            "--method",
            "lowrank",
            "--lambdas",
            "10:1e-8:9log",
            "--threads",
            threads,
            "--include-solutions",
            "--report",
            s(&report),
        ]);
        reports.push(read_json(&report));
    }
    let strip = |v: &Value| -> Vec<(Value, Value, Value)> {
        v["records"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["lambda"].clone(), r["iterations"].clone(), r["solution"].clone()))
            .collect()
    };
    assert_eq!(strip(&reports[0]), strip(&reports[1]));
}

#[test]
fn bench_reports_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("bench.json");
    ok(&[
        "bench",
        "--m",
        "400",
        "--n",
        "20",
        "--methods",
        "chol,qr_baseline",
        "--oversampling",
        "4",
        "--lambdas",
        "1:1e-4:3log",
        "--runs",
        "2",
        "--report",
        s(&report),
    ]);
    let json = read_json(&report);
    let methods = json["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 2);
    assert_eq!(methods[0]["method"], "chol");
    assert_eq!(methods[1]["method"], "qr_baseline");
    for m in methods {
        assert_eq!(m["sketch_size"], 80);
        assert_eq!(m["per_lambda_s"].as_array().unwrap().len(), 2);
    }
}
