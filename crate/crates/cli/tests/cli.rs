//! End-to-end tests of the binary: artifact layout, exit codes, byte-level
//! determinism of certificates and CSV output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> PathBuf {
    // target/debug/ehrenfest next to the test executable's directory.
    let mut path = std::env::current_exe().unwrap();
    path.pop();
    if path.ends_with("deps") {
        path.pop();
    }
    path.join(format!("ehrenfest{}", std::env::consts::EXE_SUFFIX))
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "ehrenfest-cli-{tag}-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn counterexample_mode_writes_certificate_and_manifest() {
    let dir = temp_dir("ce");
    let cfg = write_config(&dir, "n_bumps = 4\northogonality_samples = 10\n");
    let out = run(&[
        "counterexample",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "--quiet",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cert = std::fs::read_to_string(dir.join("out/certificate.json")).unwrap();
    assert!(cert.contains("\"gram_ok\": true"));
    assert!(cert.contains("\"hermitean_ok\": true"));
    assert!(cert.contains("\"witness_zero_t\""));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["passed"], serde_json::Value::Bool(true));
    assert_eq!(manifest["mode"], "counterexample");
    for output in manifest["outputs"].as_array().unwrap() {
        assert!(Path::new(output.as_str().unwrap()).exists());
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn certificates_are_byte_identical_for_equal_seeds() {
    let dir = temp_dir("det");
    let cfg = write_config(&dir, "n_bumps = 3\northogonality_samples = 5\nseed = 42\n");
    for sub in ["a", "b"] {
        let out = run(&[
            "counterexample",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join(sub).to_str().unwrap(),
            "--quiet",
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.join("a/certificate.json")).unwrap();
    let b = std::fs::read(dir.join("b/certificate.json")).unwrap();
    assert_eq!(a, b);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn evolve_mode_writes_csv_per_observable_and_is_deterministic() {
    let dir = temp_dir("evolve");
    let cfg = write_config(
        &dir,
        "t_final = 0.05\ndt = 1e-3\nsave_every = 5\nn = 128\nresidual_bound = 1e-2\n",
    );
    for sub in ["a", "b"] {
        let out = run(&[
            "evolve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join(sub).to_str().unwrap(),
            "--quiet",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for name in [
        "position.csv",
        "momentum.csv",
        "hamiltonian.csv",
        "summary.json",
    ] {
        let a = std::fs::read(dir.join("a").join(name)).unwrap();
        let b = std::fs::read(dir.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let csv = std::fs::read_to_string(dir.join("a/position.csv")).unwrap();
    assert!(csv.starts_with("t,expectation,lhs,rhs,residual,norm,energy,sup_A_norm_running\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn crosscheck_refuses_a_too_coarse_grid() {
    let dir = temp_dir("coarse");
    let cfg = write_config(&dir, "n_bumps = 3\ngrid_n = 1024\ngrid_length = 10\n");
    let out = run(&[
        "crosscheck",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "--quiet",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("grid too coarse"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn crosscheck_default_grid_passes_checks() {
    let dir = temp_dir("xc");
    let cfg = write_config(&dir, "n_bumps = 2\n");
    let out = run(&[
        "crosscheck",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "--quiet",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/crosscheck.json")).unwrap())
            .unwrap();
    assert!(summary["refined"]["gap_ratio"].as_f64().unwrap() >= 3.5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failed_checks_exit_with_code_one() {
    let dir = temp_dir("redcheck");
    // An impossible residual target: the run completes but the check fails.
    let cfg = write_config(
        &dir,
        "t_final = 0.05\ndt = 1e-3\nsave_every = 5\nn = 128\nresidual_bound = 1e-15\n",
    );
    let out = run(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("identity_residual"), "stderr: {stderr}");
    // The manifest records the failure.
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["passed"], serde_json::Value::Bool(false));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_errors_exit_nonzero_and_name_every_problem() {
    let dir = temp_dir("badcfg");
    let cfg = write_config(&dir, "n_bumps = 0\npotental = harmonic\n");
    let out = run(&[
        "counterexample",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("n_bumps"));
    assert!(stderr.contains("did you mean `potential`?"));
    std::fs::remove_dir_all(&dir).unwrap();
}
