//! End-to-end runs of the binary over the sample inputs: output shapes,
//! exit codes, and report files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guarded-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn check_loeb_passes_on_omega5() {
    let out = run(&["check-loeb", sample("omega5.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS loeb"));
}

#[test]
fn check_loeb_fails_on_loop_frame_with_exit_1() {
    let out = run(&["check-loeb", sample("loop.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL loeb"));
    assert!(text.contains("counterexample open bot"));
}

#[test]
fn check_wf_reports_all_axioms() {
    let out = run(&["check-wf", sample("diamond.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in ["subrelation", "transitivity", "left-compatibility", "right-compatibility", "well-foundedness"] {
        assert!(text.contains(line), "missing {line} in {text}");
    }
}

#[test]
fn malformed_input_exits_2_with_json_path() {
    let dir = std::env::temp_dir().join("guarded-lab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad-poset.json");
    std::fs::write(&bad, r#"{"elements": ["a"], "leq": [["a","zz"]]}"#).unwrap();
    let out = run(&["check-wf", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/leq/0/1"), "stderr: {err}");
}

#[test]
fn eval_stream_naturals() {
    let out = run(&["eval-stream", "naturals", "--take", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "[0, 1, 2, 3]");
}

#[test]
fn eval_stream_take_zero_is_empty() {
    let out = run(&["eval-stream", "zeros", "--take", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "[]");
}

#[test]
fn eval_stream_modulus() {
    let out = run(&["eval-stream", "naturals-mod-3", "--take", "7"]);
    assert_eq!(stdout(&out).trim(), "[0, 1, 2, 0, 1, 2, 0]");
    let bad = run(&["eval-stream", "fib", "--take", "3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn models_of_empty_theory() {
    let out = run(&["models", sample("empty-theory.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("1 model"));
}

#[test]
fn filters_of_diamond() {
    let out = run(&["filters", sample("diamond.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("4 filters"));
}

#[test]
fn fixpoint_unrolls_naturals() {
    let out = run(&["fixpoint", sample("naturals.json").to_str().unwrap(), "--stages", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("pick(3) = [0, 1, 2, 3]"));
}

#[test]
fn plump_emits_poset_consumable_by_check_loeb() {
    let out = run(&["plump", sample("chain-poly.json").to_str().unwrap(), "--depth", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let doc: serde_json::Value = serde_json::from_str(&text).expect("poset JSON");
    assert_eq!(doc["elements"].as_array().unwrap().len(), 4);

    let dir = std::env::temp_dir().join("guarded-lab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let poset = dir.join("plump-out.json");
    std::fs::write(&poset, &text).unwrap();
    let loeb = run(&["check-loeb", poset.to_str().unwrap()]);
    assert!(loeb.status.success(), "{}", stdout(&loeb));
}

#[test]
fn bag_counts_on_theory() {
    let out = run(&["bag", sample("chain2-theory.json").to_str().unwrap(), "--max-k", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("|K| = 2: 4 labeled, 3 up to index bijection"), "{text}");
    let inh = run(&["bag", sample("chain2-theory.json").to_str().unwrap(), "--max-k", "2", "--inhabited"]);
    assert!(!stdout(&inh).contains("|K| = 0"));
}

#[test]
fn check_multiclock_small_bound() {
    let out = run(&["check-multiclock", "--bound", "1", "--stages", "4"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS fp-op-iso"));
}

#[test]
fn report_file_is_written_and_deterministic() {
    let dir = std::env::temp_dir().join("guarded-lab-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let r1 = dir.join("r1.json");
    let r2 = dir.join("r2.json");
    let omega = sample("omega5.json");
    let a = run(&["check-loeb", omega.to_str().unwrap(), "--json", r1.to_str().unwrap()]);
    let b = run(&["check-loeb", omega.to_str().unwrap(), "--json", r2.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    let v1: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r1).unwrap()).unwrap();
    let v2: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r2).unwrap()).unwrap();
    assert_eq!(v1["results"], v2["results"]);
    assert_eq!(v1["inputs"], v2["inputs"], "input digests are stable");
    assert_eq!(v1["command"], "check-loeb");
}
