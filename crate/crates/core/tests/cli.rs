mod common;

use std::path::Path;
use std::process::{Command, Output};

use qmind::qsim::ShotHistogram;

use common::*;

fn qmind(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmind"))
        .args(args)
        .env_remove(qmind::pipeline::OUT_DIR_ENV)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qmind(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let quil = dir.path().join("c.quil");
    ok(&["compile", "(A|B)&(~B|~C)&(A|C)", "-o", s(&quil)]);
    let h: ShotHistogram = serde_json::from_str(&ok(&[
        "simulate",
        s(&quil),
        "--shots",
        "5000",
        "--seed",
        "3",
    ]))
    .unwrap();
    assert_eq!(h.shots, 5000);
    let marked = h.count(1) + h.count(3) + h.count(5);
    // 27/32 of the shots expected on the marked states.
    assert!((marked as f64 / 5000.0 - 27.0 / 32.0).abs() < 0.03, "{h:?}");

    for emit in ["qasm", "json"] {
        let path = dir.path().join(format!("c.{emit}"));
        ok(&[
            "compile",
            "(A|B)&(~B|~C)&(A|C)",
            "--emit",
            emit,
            "-o",
            s(&path),
        ]);
        let again: ShotHistogram = serde_json::from_str(&ok(&[
            "simulate",
            s(&path),
            "--shots",
            "5000",
            "--seed",
            "3",
        ]))
        .unwrap();
        assert_eq!(again, h, "{emit}");
    }
}

#[test]
fn transpiled_output_is_native_quil() {
    let text = ok(&["compile", "(A|B)&(B|C)&(~A|C)", "--transpile"]);
    for line in text.lines() {
        let op = line.split([' ', '(']).next().unwrap();
        assert!(
            ["DECLARE", "RX", "RZ", "CZ", "MEASURE"].contains(&op),
            "{line}"
        );
    }
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    ok(&[
        "simulate",
        s(&data_path("or_into_q2.quil")),
        "--shots",
        "100",
        "--csv",
        s(&csv),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("outcome,count\n"));
}

#[test]
fn analyze_prints_the_expression() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eeg.csv");
    lapse_recording_1().write_csv(&csv).unwrap();
    let out = ok(&["analyze", s(&csv), "--expression-only"]);
    assert_eq!(out.trim(), "(~C | B) & (C | A) & (~C | B)");
    let report: serde_json::Value = serde_json::from_str(&ok(&["analyze", s(&csv)])).unwrap();
    assert_eq!(report["clauses"].as_array().unwrap().len(), 3);
}

#[test]
fn sonify_writes_wav() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("h.json");
    let wav = dir.path().join("out.wav");
    let h = ok(&[
        "simulate",
        s(&data_path("or_into_q2.quil")),
        "--shots",
        "400",
    ]);
    std::fs::write(&hist, h).unwrap();
    ok(&[
        "sonify",
        s(&hist),
        "--duration",
        "0.5",
        "--rate",
        "8000",
        "-o",
        s(&wav),
    ]);
    let reader = hound::WavReader::open(&wav).unwrap();
    assert_eq!(reader.spec().sample_rate, 8000);
    assert_eq!(reader.len(), 4000);
}

#[test]
fn run_uses_output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eeg.csv");
    session_recording(2).write_csv(&csv).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sound_duration_s": 0.2, "seed": 9}"#).unwrap();
    let out = dir.path().join("session");
    let status = Command::new(env!("CARGO_BIN_EXE_qmind"))
        .args(["run", s(&csv), "--config", s(&cfg)])
        .env(qmind::pipeline::OUT_DIR_ENV, &out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&status.stdout).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
    assert!(out.join("lapse_001/sound.wav").is_file());
    assert!(out.join("session.json").is_file());
}

#[test]
fn synth_then_parse_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let channels: Vec<_> = qmind::eeg::CLAUSE_ELECTRODES
        .iter()
        .flatten()
        .map(|l| serde_json::json!({"label": l, "components": [[10.0, 5.0]]}))
        .collect();
    let doc = serde_json::json!({
        "channels": channels, "noise_uv": 0.0, "seed": 1, "duration_s": 1.0, "sample_rate": 128.0
    });
    std::fs::write(&spec, doc.to_string()).unwrap();
    let csv = dir.path().join("x.csv");
    ok(&["synth", s(&spec), "-o", s(&csv)]);
    let rec = qmind::eeg::read_csv(&csv).unwrap();
    assert_eq!(rec.len(), 128);

    let parsed: qmind::qsim::Circuit =
        serde_json::from_str(&ok(&["parse", s(&data_path("or_into_q2.qasm"))])).unwrap();
    assert_eq!(parsed, quil("or_into_q2.quil"));
}

#[test]
fn errors_are_json_on_stderr() {
    let cases: [(&[&str], &str); 3] = [
        (&["compile", "(A|B)&(C"], "expression"),
        (&["compile", "(A|B)&(B|C)&(A|C)", "--k", "0"], "compile"),
        (&["simulate", "/nonexistent/c.quil"], "io"),
    ];
    for (args, kind) in cases {
        let out = qmind(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"], kind, "{args:?}");
        assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.quil");
    std::fs::write(&bad, "H 0\nFROB 1\n").unwrap();
    let err: serde_json::Value =
        serde_json::from_slice(&qmind(&["simulate", s(&bad)]).stderr).unwrap();
    assert_eq!(err["error"], "parse");
}
