use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    dir.join(name).to_string_lossy().into_owned()
}

fn glom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glom"))
        .args(args)
        .env_remove("GLOM_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn model1_fixture_has_one_invariant() {
    let out = glom(&["invariants", &fixture("model1.json"), "--quiet"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["raw_count"], 1);
}

#[test]
fn model2_is_hamiltonian_once_q2_is_zero() {
    let out = glom(&["jacobi", &fixture("model2.json"), "--zero", "q2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["is_hamiltonian"], true);
    let out = glom(&["jacobi", &fixture("model2.json")]);
    assert_eq!(json(&out)["is_hamiltonian"], false);
}

#[test]
fn energy_violation_exits_one_and_names_gyrostat() {
    let out = glom(&["check", &fixture("bad-energy.json")]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["offending_gyrostats"], serde_json::json!([1]));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gyrostat(s) [1]"));
    let out = glom(&["jacobi", &fixture("bad-energy.json")]);
    assert_eq!(code(&out), 1);
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"modes\": 3,\n  \"gyrostats\": [\n}").unwrap();
    let out = glom(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn unknown_keys_and_bad_modes_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"modes": 3, "gyrostats": [], "note": "x"}"#).unwrap();
    assert_eq!(code(&glom(&["check", path.to_str().unwrap()])), 1);
    std::fs::write(
        &path,
        r#"{"modes": 3, "gyrostats": [{"modes": [1, 2, 4]}]}"#,
    )
    .unwrap();
    assert_eq!(code(&glom(&["check", path.to_str().unwrap()])), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&glom(&["frobnicate"])), 2);
    assert_eq!(code(&glom(&["check"])), 2);
    assert_eq!(code(&glom(&["check", "no-such-model"])), 2);
    let bad_mask = glom(&[
        "invariants",
        "model1",
        "--vary",
        "b1,c1",
        "--subclass",
        "012",
    ]);
    assert_eq!(code(&bad_mask), 2);
    assert_eq!(
        code(&glom(&["hierarchy", "--family", "model4", "--k", "4"])),
        2
    );
    assert_eq!(code(&glom(&["simulate", "euler", "--assign", "p1"])), 2);
}

#[test]
fn reports_are_byte_stable_and_seeded() {
    let args = [
        "enumerate",
        "model2",
        "--vary",
        "c1,a2",
        "--seed",
        "7",
        "--quiet",
    ];
    let a = glom(&args);
    let b = glom(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 7);
    let env = Command::new(env!("CARGO_BIN_EXE_glom"))
        .args(["invariants", "model1", "--quiet"])
        .env("GLOM_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(json(&env)["seed"], 11);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = glom(&["check", "euler", "--out", path.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        serde_json::from_str::<Value>(&text).unwrap()["energy_ok"],
        true
    );
}

#[test]
fn echoed_model_reparses_to_the_same_model() {
    let out = glom(&["check", &fixture("model5-hamiltonian.json"), "--quiet"]);
    let echo = json(&out)["model"].clone();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("echo.json");
    std::fs::write(&path, echo.to_string()).unwrap();
    let again = glom(&["check", path.to_str().unwrap(), "--quiet"]);
    assert_eq!(json(&again)["model"], echo);
    assert_eq!(json(&again)["energy_rate"], json(&out)["energy_rate"]);
}

#[test]
fn fixtures_match_the_builtin_models() {
    let pairs = [
        ("euler", "euler.json"),
        ("model1", "model1.json"),
        ("model2", "model2.json"),
        ("model2-hamiltonian", "model2-hamiltonian.json"),
        ("model3", "model3.json"),
        ("model4-hamiltonian", "model4-hamiltonian.json"),
        ("model5-hamiltonian", "model5-hamiltonian.json"),
        ("sparse(3)", "sparse3.json"),
        ("dense(3)", "dense3.json"),
    ];
    for (name, file) in pairs {
        let exported = json(&glom(&["export", name]));
        let text = std::fs::read_to_string(fixture(file)).unwrap();
        assert_eq!(
            exported,
            serde_json::from_str::<Value>(&text).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn hierarchy_casimir_counts() {
    let out = glom(&["hierarchy", "--family", "sparse", "--k", "4", "--quiet"]);
    let r = json(&out);
    assert_eq!(r["casimir_counts"], serde_json::json!([1, 1, 1, 1]));
    assert_eq!(r["recurrence"], true);
    let out = glom(&["hierarchy", "--family", "model5", "--k", "5", "--quiet"]);
    assert_eq!(
        json(&out)["casimir_counts"],
        serde_json::json!([1, 1, 2, 0, 0])
    );
}

#[test]
fn casimirs_of_the_single_gyrostat() {
    let out = glom(&["casimirs", &fixture("gyrostat.json"), "--quiet"]);
    let r = json(&out);
    assert_eq!(r["count"], 1);
    assert_eq!(r["advisory"], false);
    assert_eq!(r["gradient_flags"], serde_json::json!([true]));
}

#[test]
fn simulate_conserves_energy_and_needs_assignments() {
    let out = glom(&[
        "simulate",
        "euler",
        "--assign",
        "p1=1,q1=1",
        "--state",
        "0.3,0.4,0.5",
        "--quiet",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["steps"], 50000);
    assert!(r["max_relative_drift"].as_f64().unwrap() <= 1e-8);
    let out = glom(&["simulate", "gyrostat", "--t", "1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("a1"));
}

#[test]
fn simulate_tracks_casimirs() {
    let out = glom(&[
        "simulate",
        &fixture("model2-hamiltonian.json"),
        "--assign",
        "a1=1,b1=2,c1=-1,p1=3/2,q1=-1,a2=1/2,b2=1,c2=2,p2=1",
        "--track",
        "casimirs",
        "--t",
        "10",
        "--seed",
        "3",
        "--quiet",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let names: Vec<&str> = r["drift"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["energy", "C1"]);
    assert!(r["max_relative_drift"].as_f64().unwrap() <= 1e-8);
}
