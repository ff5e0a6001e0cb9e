use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn stackplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackplan")).args(args).output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn plan_then_validate_overhang() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let inst = corpus_file("overhang4.json");
    let out = stackplan(&["plan", inst.to_str().unwrap(), "--out", plan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(plan.exists());
    let out = stackplan(&["validate", inst.to_str().unwrap(), plan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
}

#[test]
fn unsat_instance_exits_one() {
    let out = stackplan(&["plan", corpus_file("unsat_tiny.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("Unsat(2)"), "{}", text(&out.stderr));
}

#[test]
fn broken_plan_exits_one_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(&plan, r#"{"format":1,"steps":[[{"op":"pick","gripper":"left_arm","block":"L"},{"op":"pick","gripper":"right_arm","block":"B"}]]}"#).unwrap();
    let out = stackplan(&["validate", corpus_file("overhang4.json").to_str().unwrap(), plan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = text(&out.stderr);
    assert!(report.contains("step 1: concurrency"), "{report}");
    assert!(report.contains("goal"), "{report}");
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(stackplan(&[]).status.code(), Some(2));
    assert_eq!(stackplan(&["plan"]).status.code(), Some(2));
    assert_eq!(stackplan(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(stackplan(&["plan", "/nonexistent/instance.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"format":1,"surfaces":[],"blocks":[],"grippers":[],"oops":1}"#).unwrap();
    let out = stackplan(&["plan", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!text(&out.stderr).is_empty());
}

#[test]
fn help_exits_zero() {
    assert_eq!(stackplan(&["--help"]).status.code(), Some(0));
}

#[test]
fn check_stability_reports_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    std::fs::write(
        &state,
        r#"{"format":1,"surfaces":[{"id":"table","level":0,"span":[0,2]}],
            "blocks":[{"id":"plank","size":3}],"grippers":["g"],
            "initial":{"placements":[{"block":"plank","x":2,"level":0}]}}"#,
    )
    .unwrap();
    let out = stackplan(&["check-stability", state.to_str().unwrap(), "--dump-lp"]);
    assert_eq!(out.status.code(), Some(1));
    let all = text(&out.stdout) + &text(&out.stderr);
    assert!(all.contains("plank"), "{all}");
    assert!(all.contains("contacts"), "{all}");

    let ok = stackplan(&["check-stability", corpus_file("overhang4.json").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stderr));
}

#[test]
fn inspect_and_render() {
    let inst = corpus_file("fig2b_stacked_overhang.json");
    let out = stackplan(&["inspect", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("on"));

    let out = stackplan(&["render", inst.to_str().unwrap(), "--format", "svg"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).starts_with("<svg"));
}

#[test]
fn corpus_list_names_every_instance() {
    let out = stackplan(&["corpus", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let listing = text(&out.stdout);
    for name in ["overhang4", "fig5d_true_concurrency", "unsat_tiny"] {
        assert!(listing.contains(name), "{listing}");
    }
}

#[test]
fn corpus_run_subset_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = stackplan(&[
        "corpus",
        "run",
        "--only",
        "fig2a_subassembly",
        "--only",
        "unsat_tiny",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("2/2 passed"));
    assert!(dir.path().join("fig2a_subassembly.plan.json").exists());
    assert!(dir.path().join("fig2a_subassembly.txt").exists());
}
