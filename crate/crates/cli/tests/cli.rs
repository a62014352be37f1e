use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "[physics]\nnu = 0.05\ndatum = \"analytic\"\n[numerics]\nk = 2\nny = 64\ndt = 1e-3\nt_final = 0.01\n[norms]\nn_mu = 8\n[io]\nsnapshot_every = 5\ncheckpoint = true\n";

fn nshs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nshs")).args(args).env("NSHS_THREADS", "1").output().expect("spawn nshs")
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.toml");
    std::fs::write(&p, SMALL).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_manifest_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    let o = nshs(&["simulate", "--config", s(&cfg), "--out", s(&out), "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
    assert!(out.join("trajectory.nshs").exists());
    assert!(out.join("diagnostics.csv").exists());
    assert!(nshs_core::io::verify_manifest(&out).unwrap().is_empty());

    let ins = dir.path().join("inspect");
    let o = nshs(&["inspect", "--config", s(&cfg), "--out", s(&ins), "--checkpoint", s(&out.join("trajectory.nshs"))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(ins.join("inspect.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["checkpoint"]["snapshots"], 3);
    assert_eq!(v["grid"]["nodes"], 64);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(nshs(&["simulate", "--config", s(&cfg), "--out", s(d)]).status.code(), Some(0));
    }
    assert_eq!(std::fs::read(a.join("manifest.json")).unwrap(), std::fs::read(b.join("manifest.json")).unwrap());
}

#[test]
fn constraint_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    let o = nshs(&["simulate", "--config", s(&cfg), "--set", "mu0=0.2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius constraint"));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn bad_keys_and_files_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    assert_eq!(nshs(&["norms", "--config", s(&cfg), "--set", "numerics.bogus=1", "--out", s(&out)]).status.code(), Some(1));
    assert_eq!(nshs(&["norms", "--config", s(&cfg), "--set", "k", "--out", s(&out)]).status.code(), Some(1));
    let missing = dir.path().join("missing.toml");
    assert_eq!(nshs(&["norms", "--config", s(&missing), "--out", s(&out)]).status.code(), Some(1));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[physics]\nviscosity = 1\n").unwrap();
    assert_eq!(nshs(&["norms", "--config", s(&bad), "--out", s(&out)]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(nshs(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nshs(&["simulate"]).status.code(), Some(1));
    assert_eq!(nshs(&["simulate", "--config", "x.toml", "--out", "o", "--seed", "abc"]).status.code(), Some(1));
    let h = nshs(&["--help"]);
    assert_eq!(h.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&h.stdout).contains("verify-inequalities"));
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_nshs"))
        .args(["norms", "--config", s(&cfg), "--out", s(&out)])
        .env("NSHS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NSHS_THREADS"));
}

#[test]
fn norms_reports_finite_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("norms");
    let o = nshs(&["norms", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("triple"));
}
