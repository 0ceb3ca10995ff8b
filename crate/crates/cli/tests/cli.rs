use std::process::{Command, Output};

use serde_json::Value;

fn mdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdlab"))
        .args(args)
        .env_remove("MDLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.push("--json");
    let out = mdlab(&full);
    let report = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    });
    (out.status.code().unwrap(), report)
}

#[test]
fn mdcheck_single_family() {
    let (code, r) = json_report(&[
        "mdcheck",
        "--family",
        "5_4_4",
        "--lambda",
        "0.5",
        "--samples",
        "10000",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["schema"], "mdlab/1");
    let hist = r["checks"][0]["metrics"]["report"]["rank_histogram"]
        .as_object()
        .unwrap();
    assert!(hist.keys().all(|k| k == "0" || k == "2"), "{hist:?}");
}

#[test]
fn sixterm_all_z_has_two_completions() {
    let (code, r) = json_report(&["sixterm", "--preset", "allZ"]);
    assert_eq!(code, 0);
    let comps = r["checks"][0]["metrics"]["completions"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    for c in comps {
        assert!(c["exact"].as_array().unwrap().iter().all(|e| e == true));
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"seed": 7, "samples": 50}"#).unwrap();
    let (code, r) = json_report(&[
        "sixterm",
        "--preset",
        "gamma3",
        "--bound",
        "2",
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["config"]["seed"], 9);
    assert_eq!(r["config"]["samples"], 50);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"grid3d": 8}"#).unwrap();
    let out = mdlab(&["reproduce", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid3d"));

    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(
        mdlab(&["reproduce", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(mdlab(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(
        mdlab(&["sixterm", "--preset", "allZ", "--bogus"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        mdlab(&["mdcheck", "--family", "5_4_4", "--lambda", "1"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        mdlab(&["mdcheck", "--family", "5_4_4"]).status.code(),
        Some(64)
    );
    assert_eq!(
        mdlab(&["foliation", "--action", "lambda14", "--stratum", "V1"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(mdlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_deterministic_apart_from_the_timestamp() {
    let run = || {
        let (_, mut r) = json_report(&["foliation", "--samples", "300", "--seed", "5"]);
        r.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&r).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn foliation_json_shape() {
    let (code, r) = json_report(&[
        "foliation",
        "--action",
        "lambda12",
        "--check",
        "leafspace",
        "--samples",
        "200",
    ]);
    assert_eq!(code, 0);
    for c in r["checks"].as_array().unwrap() {
        let m = &c["metrics"];
        for key in [
            "check",
            "stratum",
            "residual_max",
            "rank_histogram",
            "violations",
        ] {
            assert!(m.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn orbit_json_shape() {
    let (code, r) = json_report(&[
        "orbit",
        "--family",
        "5_4_12",
        "--lambda",
        "0.7",
        "--phi",
        "1.2",
        "--covector",
        "0.1,1,-2,0.5,0.3",
    ]);
    assert_eq!(code, 0);
    let m = &r["checks"][0]["metrics"];
    assert_eq!(m["stratum"], "two_dim");
    assert!(m["flow_deviation"].as_f64().unwrap() < 1e-9);
    assert!(!m["closed_form_samples"].as_array().unwrap().is_empty());
}

#[test]
fn invariants_f3() {
    let (code, r) = json_report(&["invariants", "--type", "F3", "--resolution", "64"]);
    assert_eq!(code, 0);
    let m = &r["checks"][0]["metrics"];
    assert_eq!(m["gamma_matrix"]["gamma3"], serde_json::json!([0, 1]));
    assert_eq!(m["rounded"], 1);
    for key in ["witness", "raw_integral", "residual", "grid"] {
        assert!(m.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn invariants_f2_small_grid() {
    let (code, r) = json_report(&["invariants", "--type", "F2", "--resolution", "32"]);
    assert_eq!(code, 0, "{r}");
    let g = &r["checks"][0]["metrics"]["gamma_matrix"];
    assert_eq!(g["gamma1"], serde_json::json!([[0, 1], [0, 1]]));
    assert_eq!(g["gamma2"], serde_json::json!([[1], [1]]));
}

#[test]
fn tight_residual_tolerance_is_inconclusive() {
    let out = mdlab(&[
        "invariants",
        "--type",
        "F3",
        "--resolution",
        "16",
        "--residual-tol",
        "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("INCONCLUSIVE"));
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_mdlab"))
        .args(["sixterm", "--preset", "gamma2", "--bound", "2"])
        .env("MDLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_mdlab"))
        .args(["sixterm", "--preset", "gamma2"])
        .env("MDLAB_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn reproduce_writes_the_full_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = mdlab(&[
        "reproduce",
        "--seed",
        "42",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["status"], "pass");
    let find = |name: &str| {
        r["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == name)
            .unwrap()
            .clone()
    };
    let f2 = find("invariants/F2");
    assert_eq!(
        f2["metrics"]["gamma_matrix"]["gamma1"],
        serde_json::json!([[0, 1], [0, 1]])
    );
    assert_eq!(
        f2["metrics"]["gamma_matrix"]["gamma2"],
        serde_json::json!([[1], [1]])
    );
    assert_eq!(
        find("invariants/F3")["metrics"]["gamma_matrix"]["gamma3"],
        serde_json::json!([0, 1])
    );
}
