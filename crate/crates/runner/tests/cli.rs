use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qsmodels"));
    c.current_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../.."));
    c.env_remove("QSM_SOLVER");
    c
}

#[test]
fn run_then_rebuild_from_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.jsonl");
    let report = dir.path().join("report.json");
    let out = bin()
        .args([
            "run",
            "--map",
            "maps/t1.map",
            "--seed",
            "42",
            "--enemy",
            "stationary",
            "--fast",
        ])
        .arg("--log")
        .arg(&log)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(written["outcome"], "bot_win");

    let out = bin().args(["report", "--log"]).arg(&log).output().unwrap();
    assert!(out.status.success());
    let rebuilt: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rebuilt, written);
}

#[test]
fn bad_input_exits_nonzero() {
    let out = bin()
        .args(["run", "--map", "maps/missing.map"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: cannot read map"));

    let out = bin()
        .args(["run", "--map", "maps/t1.map", "--enemy", "nobody"])
        .output()
        .unwrap();
    assert!(!out.status.success());

    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.jsonl");
    std::fs::write(&log, "{\"type\":\"plan_ready\"}\n").unwrap();
    let out = bin().args(["report", "--log"]).arg(&log).output().unwrap();
    assert!(!out.status.success());
}
