#![cfg(feature = "cli")]

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_kineseq");
const DICTIONARY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/movements.json");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_dataset(dir: &Path) -> String {
    let path = dir.join("eval.csv");
    let p = path.to_str().unwrap();
    stdout(&run(&[
        "build-dataset",
        "--per-pose",
        "10",
        "--jitter",
        "0",
        "--output",
        p,
    ]));
    p.to_string()
}

fn simulate(dir: &Path, script: &str, format: &str) -> String {
    let path = dir.join(format!("stream.{format}"));
    let p = path.to_str().unwrap();
    stdout(&run(&[
        "simulate", "--script", script, "--format", format, "--output", p,
    ]));
    p.to_string()
}

#[test]
fn analyze_batch_report() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_dataset(dir.path());
    let stream = simulate(dir.path(), "A6 B6 C10 B6 A6 NULL7 A6 B6 C10 B6 A6", "json");
    let out = stdout(&run(&[
        "analyze",
        "--dataset",
        &ds,
        "--dictionary",
        DICTIONARY,
        "--input",
        &stream,
    ]));
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let ids = report["identified"].as_array().unwrap();
    assert_eq!(ids.len(), 2);
    assert_eq!(ids[0]["movement"], "sit-up-to-stand");
    assert_eq!(ids[0]["distance"], 0);
    assert_eq!(ids[0]["total_accuracy"], 1.0);
    assert_eq!(report["unmatched"].as_array().unwrap().len(), 0);

    // same stream twice gives the same bytes
    let again = stdout(&run(&[
        "analyze",
        "--dataset",
        &ds,
        "--dictionary",
        DICTIONARY,
        "--input",
        &stream,
    ]));
    assert_eq!(out, again);
}

#[test]
fn analyze_streaming_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_dataset(dir.path());
    let stream = simulate(dir.path(), "A8 B10 A8 NULL7 C30", "jsonl");
    let text = std::fs::read_to_string(stream).unwrap();
    let out = stdout(&run_with_stdin(
        &["analyze", "--stream", "--dataset", &ds, "--dictionary", DICTIONARY],
        &text,
    ));
    let events: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.len(), 2);
    assert_eq!(events[0]["event"], "identified");
    assert_eq!(events[0]["movement"], "half-sit-up");
    assert_eq!(events[1]["event"], "unmatched");
    assert_eq!(events[1]["performed"], "C30");
}

#[test]
fn flags_override_environment() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_dataset(dir.path());
    let stream = simulate(dir.path(), "A6 B6 C20 B6 A6", "json");
    let args = [
        "analyze",
        "--dataset",
        &ds,
        "--dictionary",
        DICTIONARY,
        "--input",
        &stream,
    ];
    let count = |o: Output| -> usize {
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["identified"].as_array().unwrap().len()
    };
    // C20 is 10 edits from the nearest variant
    assert_eq!(count(run(&args)), 1);
    let strict = Command::new(BIN)
        .args(args)
        .env("KINESEQ_EDIT_LIMIT", "9")
        .output()
        .unwrap();
    assert_eq!(count(strict), 0);
    let flagged = Command::new(BIN)
        .args(args)
        .args(["--edit-limit", "10"])
        .env("KINESEQ_EDIT_LIMIT", "9")
        .output()
        .unwrap();
    assert_eq!(count(flagged), 1);

    let cfg = dir.path().join("engine.toml");
    std::fs::write(&cfg, "edit_limit = 9\n").unwrap();
    let from_file = run(&[&args[..], &["--config", cfg.to_str().unwrap()]].concat());
    assert_eq!(count(from_file), 0);
}

#[test]
fn classify_single_frame() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_dataset(dir.path());
    let stream = simulate(dir.path(), "C1", "json");
    let frames: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stream).unwrap()).unwrap();
    let frame = dir.path().join("frame.json");
    std::fs::write(&frame, frames[0].to_string()).unwrap();
    let out = stdout(&run(&[
        "classify",
        "--dataset",
        &ds,
        "--k",
        "1",
        "--input",
        frame.to_str().unwrap(),
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["label"], "C");
    assert_eq!(v["accuracy"], 1.0);
    assert_eq!(v["accepted"], true);
}

#[test]
fn project_writes_plot_csv() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_dataset(dir.path());
    let out = stdout(&run(&["project", "--dataset", &ds]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,y,label"));
    assert_eq!(lines.count(), 30);
}

#[test]
fn gen_variants_lists_scaled_sequences() {
    let out = stdout(&run(&[
        "gen-variants",
        "--ideal",
        "A6 B6 C10 B6 A6",
        "--scales",
        "0.75,1.25",
    ]));
    let v: Vec<String> = serde_json::from_str(&out).unwrap();
    assert_eq!(v, ["A6 B6 C10 B6 A6", "A5 B5 C8 B5 A5", "A8 B8 C13 B8 A8"]);
}

#[test]
fn bench_reports_median() {
    let out = stdout(&run(&["bench", "--iterations", "5", "--variants", "50"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["variants"], 50);
    assert!(v["median_ms"].as_f64().unwrap() < 150.0);
}

#[test]
fn missing_file_is_a_data_error() {
    let o = run(&["analyze", "--dataset", "/no/such/eval.csv", "--dictionary", DICTIONARY]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/no/such/eval.csv"), "{err}");
}

#[test]
fn malformed_stream_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_dataset(dir.path());
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "\n{\"t\": 0, \"kp\": []}\n").unwrap();
    let o = run(&[
        "analyze",
        "--dataset",
        &ds,
        "--dictionary",
        DICTIONARY,
        "--input",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.jsonl") && err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn custom_angle_table_changes_features() {
    let dir = tempfile::tempdir().unwrap();
    let ds = write_dataset(dir.path());
    let stream = simulate(dir.path(), "B1", "json");
    let frames: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stream).unwrap()).unwrap();
    let frame = dir.path().join("frame.json");
    std::fs::write(&frame, frames[0].to_string()).unwrap();

    let bundled = concat!(env!("CARGO_MANIFEST_DIR"), "/data/angle_specs.json");
    let mut table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(bundled).unwrap()).unwrap();
    table[0]["end_b"] = "left_wrist".into();
    let custom = dir.path().join("angles.json");
    std::fs::write(&custom, table.to_string()).unwrap();

    let features = |extra: &[&str]| -> serde_json::Value {
        let args = [
            &["classify", "--dataset", &ds, "--input", frame.to_str().unwrap()][..],
            extra,
        ]
        .concat();
        let v: serde_json::Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
        v["features"]["angles"].clone()
    };
    let default = features(&[]);
    assert_eq!(default, features(&["--angles", bundled]));
    let changed = features(&["--angles", custom.to_str().unwrap()]);
    assert_ne!(default[0], changed[0]);
    assert_eq!(default[1], changed[1]);
}
