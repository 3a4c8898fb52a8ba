//! End-to-end runs of the installed binary.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn prsg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prsg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn generate_serial_reference() {
    let out = prsg(&[
        "generate", "--poly", "4:1", "--seed", "1010", "--n", "17", "--mode", "serial",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "10101111000100110\n");
}

#[test]
fn generate_zero_length() {
    let out = prsg(&["generate", "--poly", "4:1", "--seed", "1010", "--n", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "");
}

#[test]
fn generate_hex_output() {
    let out = prsg(&[
        "generate", "--poly", "4:1", "--seed", "1010", "--n", "17", "--hex",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "af1300\n");
}

#[test]
fn streams_agree_across_modes() {
    let reference = stdout(&prsg(&[
        "generate", "--poly", "6:1,5", "--seed", "110100", "--n", "48",
    ]));
    for mode in ["serial", "block", "parity"] {
        let out = prsg(&[
            "generate", "--poly", "6:1,5", "--seed", "110100", "--n", "48", "--mode", mode,
        ]);
        assert!(out.status.success());
        assert_eq!(stdout(&out), reference, "{mode} stream differs");
    }
    let out = prsg(&[
        "generate", "--poly", "6:1,5", "--seed", "110100", "--n", "48", "--mode", "rns",
        "--moduli", "auto:2",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), reference, "rns stream differs");
}

#[test]
fn protect_reference_blocks() {
    let out = prsg(&[
        "protect",
        "--poly",
        "4:1",
        "--seed",
        "1010",
        "--moduli",
        "13,17,19:23,29",
        "--blocks",
        "3",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1 1111 ok\n2 1000 ok\n3 1100 ok\n");
}

#[test]
fn matrix_rows_with_guard() {
    let out = prsg(&["matrix", "--poly", "4:1", "--guard"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1100\n0110\n0011\n1101\n0100\n");
}

#[test]
fn config_round_trip() {
    let path = tmp("round_trip.ini");
    let first = prsg(&[
        "generate",
        "--poly",
        "4:1",
        "--seed",
        "1010",
        "--n",
        "17",
        "--mode",
        "rns",
        "--moduli",
        "13,17,19:23,29",
        "--hex",
        "--dump-config",
        path.to_str().unwrap(),
    ]);
    assert!(first.status.success());
    let second = prsg(&["generate", "--config", path.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(stdout(&first), stdout(&second));

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("[generator]"));
    assert!(text.contains("moduli = 13,17,19:23,29"));

    let overridden = prsg(&["generate", "--config", path.to_str().unwrap(), "--n", "8"]);
    assert!(overridden.status.success());
    assert_eq!(stdout(&overridden), "af\n");
}

#[test]
fn corrected_fault_keeps_the_stream() {
    let out = prsg(&[
        "generate",
        "--poly",
        "4:1",
        "--seed",
        "1010",
        "--n",
        "17",
        "--mode",
        "rns",
        "--moduli",
        "13,17,19:23,29",
        "--fault",
        "channel:2@2:add:5",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "10101111000100110\n");
}

#[test]
fn detect_only_set_halts_with_exit_1() {
    let out = prsg(&[
        "generate",
        "--poly",
        "4:1",
        "--seed",
        "1010",
        "--n",
        "17",
        "--mode",
        "rns",
        "--moduli",
        "13,17,19:23",
        "--fault",
        "channel:2@2:add:5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "10101111\n");
    assert!(stderr(&out).contains("halted after 8 bits: detected"));
}

#[test]
fn permanent_fault_reconfigures() {
    let out = prsg(&[
        "protect",
        "--poly",
        "4:1",
        "--seed",
        "1010",
        "--moduli",
        "13,17,19:23,29",
        "--blocks",
        "6",
        "--fault",
        "channel:2@1:add:5:permanent",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches("corrected(channel 2)").count(), 3);
    assert_eq!(text.matches(" ok\n").count(), 3);
    assert!(stderr(&out).contains("modulus 17 excluded"));
}

#[test]
fn inject_report_pipeline() {
    let path = tmp("parity_sweep.json");
    let inject = prsg(&[
        "inject",
        "--poly",
        "4:1",
        "--seed",
        "1010",
        "--n",
        "16",
        "--mode",
        "parity",
        "--plan",
        "sweep",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(inject.status.success());

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["trials"], 15);
    assert_eq!(report["detected"], 15);
    assert_eq!(report["missed"], 0);
    assert!(report["per_trial"][0]["status"].is_string());

    let render = prsg(&["report", "--input", path.to_str().unwrap()]);
    assert!(render.status.success());
    let text = stdout(&render);
    assert!(text.contains("trials     15"));
    assert!(text.contains("detected      15  100.0%"));
}

#[test]
fn report_reads_stdin() {
    let inject = prsg(&[
        "inject",
        "--poly",
        "4:1",
        "--seed",
        "1010",
        "--n",
        "16",
        "--mode",
        "serial",
        "--plan",
        "random",
        "--trials",
        "20",
        "--rng-seed",
        "7",
    ]);
    assert!(inject.status.success());

    let mut child = Command::new(env!("CARGO_BIN_EXE_prsg"))
        .arg("report")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(&inject.stdout)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("trials     20"));
}

#[test]
fn campaigns_are_reproducible() {
    let args = [
        "inject",
        "--poly",
        "5:2",
        "--seed",
        "10011",
        "--n",
        "40",
        "--mode",
        "block",
        "--plan",
        "random",
        "--trials",
        "32",
        "--rng-seed",
        "99",
    ];
    assert_eq!(stdout(&prsg(&args)), stdout(&prsg(&args)));
}

#[test]
fn config_errors_exit_2() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["generate", "--poly", "4:x", "--seed", "1010", "--n", "4"],
        vec!["generate", "--poly", "4:1", "--seed", "1012", "--n", "4"],
        vec![
            "generate", "--poly", "4:1", "--seed", "1010", "--n", "4", "--mode", "rns",
        ],
        vec![
            "generate", "--poly", "4:1", "--seed", "1010", "--n", "4", "--moduli", "3:5",
        ],
        vec![
            "generate",
            "--poly",
            "4:1",
            "--seed",
            "1010",
            "--n",
            "4",
            "--mode",
            "rns",
            "--moduli",
            "13,17:19,23",
        ],
        vec![
            "generate",
            "--poly",
            "4:1",
            "--seed",
            "1010",
            "--n",
            "4",
            "--fault",
            "laser@1:invert",
        ],
        vec![
            "protect",
            "--poly",
            "4:1",
            "--seed",
            "1010",
            "--moduli",
            "13,17,19:23,29",
            "--blocks",
            "2",
            "--fault",
            "feedback@1:invert",
        ],
        vec![
            "inject", "--poly", "4:1", "--seed", "1010", "--n", "16", "--plan", "fixed",
        ],
    ];
    for args in cases {
        let out = prsg(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?}: {}",
            stderr(&out)
        );
    }

    let path = tmp("bad_config.ini");
    std::fs::write(&path, "[generator]\nwavelength = 5\n").unwrap();
    let out = prsg(&["generate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
