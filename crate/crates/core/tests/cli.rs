use std::process::{Command, Output};

use serde_json::Value;

fn lipframe(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lipframe"));
    cmd.args(args).env_remove("LIPFRAME_SEED");
    if let Some(s) = seed_env {
        cmd.env("LIPFRAME_SEED", s);
    }
    cmd.output().unwrap()
}

fn report(args: &[&str], seed_env: Option<&str>) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let mut full = args.to_vec();
    full.extend(["--out", out.to_str().unwrap()]);
    let run = lipframe(&full, seed_env);
    let text = std::fs::read_to_string(&out).unwrap();
    (run.status.code().unwrap(), serde_json::from_str(&text).unwrap())
}

#[test]
fn certify_report_schema() {
    let (code, r) = report(&["certify", "--fixture", "disc:N=30", "--n-pairs", "1000"], None);
    assert_eq!(code, 0);
    let cert = &r["payload"]["report"];
    for key in ["a_hat", "b_hat", "c_hat", "d_hat", "n_pairs", "seed", "verdict", "notes"] {
        assert!(!cert[key].is_null(), "missing {key}");
    }
    assert_eq!(cert["verdict"], "certified-ASF");
    assert_eq!(cert["d_hat"], 1.0);
    assert!(cert["c_hat"].as_f64().unwrap() <= 9.0);
    assert_eq!(r["config"]["command"], "certify");
    assert!(r["wall_time"].is_number());
    assert!(r["version"].is_string());
}

#[test]
fn env_seed_overrides_flag() {
    let (_, r) = report(&["certify", "--fixture", "log:N=20,right=5", "--n-pairs", "100", "--seed", "3"], Some("11"));
    assert_eq!(r["config"]["seed"], 11);
    assert_eq!(r["payload"]["report"]["seed"], 11);
}

#[test]
fn frame_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frame.json");
    std::fs::write(
        &path,
        r#"{"p": 2, "N": 1, "ambient_dim": 1, "scalar_field": "real", "U_matrix": [[2]], "V_matrix": [[1]]}"#,
    )
    .unwrap();
    let (code, r) = report(
        &["certify", "--fixture", path.to_str().unwrap(), "--n-pairs", "500"],
        None,
    );
    assert_eq!(code, 0);
    assert!((r["payload"]["report"]["a_hat"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    std::fs::write(&path, r#"{"N": 1, "ambient_dim": 1}"#).unwrap();
    let run = lipframe(&["certify", "--fixture", path.to_str().unwrap()], None);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("`p`"));
}

#[test]
fn exit_codes() {
    assert_eq!(lipframe(&["certify", "--fixture", "linear:U=(1),V=(0)"], None).status.code(), Some(3));
    assert_eq!(lipframe(&["certify", "--fixture", "torus"], None).status.code(), Some(2));
    assert_eq!(lipframe(&["frobnicate", "--fixture", "disc"], None).status.code(), Some(2));
    assert_eq!(
        lipframe(&["dual", "--fixture", "linear:U=(2),V=(1)", "--max-iter", "30"], None).status.code(),
        Some(4)
    );
    assert_eq!(
        lipframe(&["similarity", "--fixture", "orthopair", "--n-pairs", "100"], None).status.code(),
        Some(1)
    );
    assert_eq!(lipframe(&["direct-sum", "--fixture", "disc:N=5"], None).status.code(), Some(3));
}

#[test]
fn orthopair_pipelines_pass() {
    for cmd in ["orthogonality", "interpolate", "direct-sum"] {
        let (code, r) = report(&[cmd, "--fixture", "orthopair", "--n-pairs", "1000"], None);
        assert_eq!(code, 0, "{cmd}");
        assert_eq!(r["passed"], true);
    }
}
