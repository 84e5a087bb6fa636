//! End-to-end checks of the config runner and the binary.

use std::fs;
use std::process::Command;

use greedy_opt::cli::{execute, parse_config, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_greedy-opt"))
}

fn config(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let out = dir.join(format!("{name}.csv"));
    let path = dir.join(format!("{name}.cfg"));
    fs::write(&path, format!("{body}\noutput = {}\n", out.display())).unwrap();
    path
}

#[test]
fn same_seed_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let body = "problem = asfw-triangle-biased(r=0.5)\nalgorithm = asfw\nT = 300\nseed = 5\n\
                eps = linked\nc = 0.5\noracle_mode = seeded-random";
    let a = config(dir.path(), "a", body);
    let b = config(dir.path(), "b", body);
    for cfg in [&a, &b] {
        let status = bin().arg("run").arg(cfg).status().unwrap();
        assert!(status.success());
    }
    let ca = fs::read(dir.path().join("a.csv")).unwrap();
    let cb = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[3], "1");
    assert_eq!(row[4], "");
    // 17 significant digits round-trip
    let f: f64 = row[5].parse().unwrap();
    assert_eq!(format!("{f:.16e}"), row[5]);
}

#[test]
fn asj_triangle_replicas_average_half() {
    let dir = tempfile::tempdir().unwrap();
    let body = "problem = asj-triangle\nalgorithm = asj\ninner_mode = exact_joint\nT = 100\n\
                seed = 0\nreplicas = 100";
    let text = fs::read_to_string(config(dir.path(), "asj", body)).unwrap();
    let summary = execute(&parse_config(&text).unwrap()).unwrap();
    assert_eq!(summary.replicas.len(), 100);
    let mean: f64 = summary.replicas.iter().map(|r| r.err.unwrap()).sum::<f64>() / 100.0;
    assert!((mean - 0.5).abs() < 1e-9);
    let seeds: Vec<u64> = summary.replicas.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, (0..100).collect::<Vec<_>>());
}

#[test]
fn jones_final_error_within_rate() {
    let dir = tempfile::tempdir().unwrap();
    let body = "problem = asj-triangle\nalgorithm = jones\neta = standard\nT = 2000\nseed = 1";
    let text = fs::read_to_string(config(dir.path(), "jones", body)).unwrap();
    let summary = execute(&parse_config(&text).unwrap()).unwrap();
    // M = 3 for this instance
    assert!(summary.replicas[0].err.unwrap() <= 2.0 * 3.0 / 2002.0);
    let csv = fs::read_to_string(dir.path().join("jones.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2001);
}

#[test]
fn arsfw_and_mixed_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("arsfw", "problem = asfw-two-point\nalgorithm = arsfw\nT = 200\nseed = 2\nsigma = fixed"),
        ("mixed", "problem = random(n=5,dim=3,seed=4)\nalgorithm = mixed\nmix = jones-every-3\nT = 50\nseed = 2\noracle_mode = adversarial\neps = linked\nc = 1"),
    ] {
        let out = bin().arg("run").arg(config(dir.path(), name, body)).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("replica 0"));
        assert!(stdout.contains("mean over 1 replicas"));
    }
}

#[test]
fn bad_config_reports_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = config(dir.path(), "bad", "problem = asj-triangle\nalgorithm = jones\nT = 10\nseed = 1\nstep = 3");
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 5") && err.contains("step"), "{err}");
}

#[test]
fn missing_output_directory_is_reported_with_path() {
    let body = "problem = asj-triangle\nalgorithm = fw\nT = 5\nseed = 1\noutput = /nonexistent-dir/x.csv";
    let err = execute(&parse_config(body).unwrap()).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
}

#[test]
fn verify_exit_status_follows_verdict() {
    let ok = bin()
        .args(["verify", "optimal", "--pairs", "5", "--T", "1000"])
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("PASS"));

    let fail = bin().args(["verify", "converge", "--T", "1000"]).output().unwrap();
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8(fail.stdout).unwrap().contains("FAIL"));

    let bad = bin().args(["verify", "rate", "--seeds", "3"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn list_problems_names_every_id() {
    let out = bin().arg("list-problems").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["asj-triangle", "asfw-two-point", "asfw-triangle-biased", "random("] {
        assert!(text.contains(id), "{id} missing");
    }
}
