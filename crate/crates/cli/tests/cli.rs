use std::path::Path;
use std::process::{Command, Output};

use adiqp::{Circuit, Color, Gate, Role};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiqp"))
        .current_dir(dir)
        .env_remove("TOOL_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn poly(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn gap_of_zero_polynomial() {
    let d = tempfile::tempdir().unwrap();
    poly(d.path(), "f.txt", "n 3\n");
    let o = run(d.path(), &["gap", "--poly", "f.txt"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "8");
}

#[test]
fn gap_of_single_cubic() {
    let d = tempfile::tempdir().unwrap();
    poly(d.path(), "f.txt", "n 3\nC 1 2 3\n");
    let o = run(d.path(), &["gap", "--poly", "f.txt"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "6");
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(d.path(), &["gap"])), 2);
    poly(d.path(), "bad.txt", "n 3\nC 1 1 2\n");
    assert_eq!(code(&run(d.path(), &["gap", "--poly", "bad.txt"])), 2);
    assert_eq!(code(&run(d.path(), &["gap", "--poly", "missing.txt"])), 2);
    assert_eq!(code(&run(d.path(), &["metrics", "--p", "a.csv", "--q", "b.csv", "--report", "mult:x", "--out", "r.json"])), 2);
}

#[test]
fn validation_failure_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let mut c = Circuit::sandwich();
    let a = c.add_qubit(Color::White, 0, Role::InputOutput);
    let b = c.add_qubit(Color::White, 0, Role::InputOutput);
    c.push(Gate::cz(a, b));
    std::fs::write(d.path().join("c.json"), c.to_json()).unwrap();
    let o = run(d.path(), &["validate", "--circuit", "c.json", "--out", "r.json"]);
    assert_eq!(code(&o), 1);
    let report = std::fs::read_to_string(d.path().join("r.json")).unwrap();
    assert!(report.contains("CZ_MONOCHROME"), "{report}");
}

#[test]
fn compiled_circuits_validate() {
    let d = tempfile::tempdir().unwrap();
    poly(d.path(), "f.txt", "n 3\nL 2\nQ 1 3\nC 1 2 3\n");
    let o = run(d.path(), &["compile", "--poly", "f.txt", "--target", "adiqp", "--out", "c.json", "--trace", "t.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run(d.path(), &["validate", "--circuit", "c.json", "--out", "r.json"])), 0);
    let o = run(d.path(), &["compile", "--poly", "f.txt", "--target", "adiqp-star", "--out", "s.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(d.path(), &["validate", "--circuit", "s.json", "--star", "--out", "r.json"])), 0);
}

#[test]
fn oversized_dense_simulation_exits_three() {
    let d = tempfile::tempdir().unwrap();
    poly(d.path(), "f.txt", "n 3\nC 1 2 3\n");
    run(d.path(), &["compile", "--poly", "f.txt", "--target", "adiqp", "--out", "c.json"]);
    let o = run(d.path(), &["simulate", "--circuit", "c.json", "--out", "d.csv"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn identity_check_all_small() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["lemma2-check", "--n", "3", "--all", "--out", "r.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn env_seed_matches_flag() {
    let d = tempfile::tempdir().unwrap();
    run(d.path(), &["gen-poly", "--n", "6", "--seed", "42", "--out", "a.txt"]);
    let o = Command::new(env!("CARGO_BIN_EXE_adiqp"))
        .current_dir(d.path())
        .env("TOOL_SEED", "42")
        .args(["gen-poly", "--n", "6", "--out", "b.txt"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let a = std::fs::read(d.path().join("a.txt")).unwrap();
    let b = std::fs::read(d.path().join("b.txt")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn manifest_goes_to_stderr_without_flag() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["gen-poly", "--n", "4", "--seed", "1", "--out", "f.txt"]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"seed\": 1") && err.contains("sha256"), "{err}");
}

#[test]
fn replay_detects_changed_input() {
    let d = tempfile::tempdir().unwrap();
    poly(d.path(), "f.txt", "n 3\nQ 1 2\n");
    let o = run(d.path(), &["compile", "--poly", "f.txt", "--out", "c.json", "--manifest", "m.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(d.path(), &["replay", "--from", "m.json"])), 0);
    poly(d.path(), "f.txt", "n 3\nQ 1 3\n");
    assert_ne!(code(&run(d.path(), &["replay", "--from", "m.json"])), 0);
}

#[test]
fn strong_and_dense_sampling_agree_on_small_star() {
    let d = tempfile::tempdir().unwrap();
    let mut c = Circuit::sandwich();
    let w = c.add_qubit(Color::White, 1, Role::InputOutput);
    let b = c.add_qubit(Color::Black, 0, Role::Ancilla);
    c.push(Gate::cz(w, b));
    c.push(Gate::t(b, 1));
    c.postselect.insert(b, 0);
    std::fs::write(d.path().join("c.json"), c.to_json()).unwrap();
    assert_eq!(code(&run(d.path(), &["strongsim", "--circuit", "c.json", "--out", "s.csv"])), 0);
    assert_eq!(code(&run(d.path(), &["simulate", "--circuit", "c.json", "--out", "p.csv"])), 0);
    let o = run(d.path(), &["metrics", "--p", "s.csv", "--q", "p.csv", "--report", "l1", "--out", "m.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("m.json")).unwrap()).unwrap();
    assert!(m["l1"].as_f64().unwrap() < 1e-12, "{m}");
}

#[test]
fn gadgets_verify_and_dump() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(d.path(), &["gadgets", "verify", "--out", "g.json"])), 0);
    assert_eq!(code(&run(d.path(), &["gadgets", "dump", "--out", "lib"])), 0);
    assert_eq!(std::fs::read_dir(d.path().join("lib")).unwrap().count(), 7);
}
