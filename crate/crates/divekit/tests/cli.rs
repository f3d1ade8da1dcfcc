use std::process::Command;

fn divekit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_divekit")).args(args).output().expect("binary runs")
}

#[test]
fn pipeline_from_generation_to_dive_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let out = divekit(&["gen", "--family", "set-cover", "--count", "4", "--seed", "3", "--out", &p("inst")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_dir(p("inst")).unwrap().count(), 4);

    let out = divekit(&["collect", &p("inst"), "--out", &p("corpus.json"), "--jobs", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out =
        divekit(&["train", &p("inst"), "--corpus", &p("corpus.json"), "--out", &p("model.json"), "--epochs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let args = [
        "eval-dive",
        &p("inst"),
        "--corpus",
        &p("corpus.json"),
        "--divers",
        "lower,upper,l2dive",
        "--model",
        &p("model.json"),
        "--d-max",
        "50",
        "--out",
        &p("dives.csv"),
    ];
    let out = divekit(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(p("dives.csv")).unwrap();
    assert!(csv.starts_with("# divekit "));
    assert!(csv.contains("config_hash="));
    assert!(csv.lines().any(|l| l.starts_with("instance,method,seed,status,primal_gap")));
    let again = divekit(&args);
    assert!(again.status.success());
    assert_eq!(std::fs::read_to_string(p("dives.csv")).unwrap(), csv);
}

#[test]
fn unknown_diver_fails_with_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    assert!(divekit(&["gen", "--family", "indep-set", "--count", "1", "--out", inst.to_str().unwrap()])
        .status
        .success());
    let corpus = dir.path().join("c.json");
    divekit(&["collect", inst.to_str().unwrap(), "--out", corpus.to_str().unwrap()]);
    let out = divekit(&["eval-dive", inst.to_str().unwrap(), "--corpus", corpus.to_str().unwrap(), "--divers", "nope"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("l2dive"));
}

#[test]
fn verify_reports_each_check() {
    let out = divekit(&["verify", "--count", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn missing_input_is_an_error() {
    let out = divekit(&["collect", "/nonexistent/dir", "--out", "/tmp/never.json"]);
    assert_eq!(out.status.code(), Some(2));
}
