//! End-to-end runs of the compiled binary: the documented output contract,
//! the exit-code scheme, and byte-level determinism of the file emitters.

use std::path::Path;
use std::process::{Command, Output};

fn fif(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fif"));
    cmd.args(args);
    cmd
}

fn run(args: &[&str]) -> Output {
    fif(args).output().expect("binary should run")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "`fif {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout should be UTF-8")
}

fn single_number(args: &[&str]) -> f64 {
    stdout_ok(args).trim().parse().expect("one number expected")
}

#[test]
fn eval_matches_the_parabola() {
    let v = single_number(&["eval", "--example", "parabola", "--x", "0.5"]);
    assert!((v - 0.25).abs() <= 1e-12, "got {v}");
}

#[test]
fn continue_reaches_the_closed_form_left_of_the_domain() {
    let v = single_number(&[
        "continue",
        "--example",
        "tent-family:p=0.25",
        "--address",
        "(2)",
        "--x",
        "-1",
    ]);
    assert!((v + 3.0).abs() <= 1e-6, "got {v}");
}

#[test]
fn dimension_equation_solves_the_two_branch_case() {
    let v = single_number(&[
        "analyze",
        "dimension",
        "--method",
        "eq",
        "--a",
        "0.5",
        "--d1",
        "0.8",
        "--d2",
        "0.8",
    ]);
    let expected = 2.0 - (1.25f64).ln() / 2.0f64.ln();
    assert!((v - expected).abs() <= 1e-10, "got {v}, want {expected}");
}

#[test]
fn usage_errors_exit_3_and_report_on_stderr() {
    for args in [
        &["eval", "--x", "0.5"] as &[&str],
        &["eval", "--example", "no-such-system", "--x", "0.5"],
        &[
            "continue",
            "--example",
            "parabola",
            "--address",
            "(3)",
            "--x",
            "0.5",
        ],
        &["continue", "--example", "parabola", "--address", "1"],
        &["attract", "--example", "parabola", "--method", "sideways"],
        &[
            "render",
            "--example",
            "parabola",
            "--out",
            "x.ppm",
            "--size",
            "wide",
        ],
    ] {
        let out = run(args);
        assert_eq!(
            out.status.code(),
            Some(3),
            "`fif {}` should be a usage error",
            args.join(" ")
        );
        assert!(
            !out.stderr.is_empty(),
            "usage errors must explain themselves"
        );
    }
}

#[test]
fn invalid_systems_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"kind": "affine_interpolation", "nodes": [[0, 0], [1, 1], [2, 0]], "vertical_scaling": [1.5, 0.5]}"#,
    )
    .unwrap();
    let out = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn validate_prints_the_certificate_numbers() {
    let text = stdout_ok(&["validate", "--example", "parabola"]);
    assert!(text.contains("conditions pass:       true"), "{text}");
    assert!(
        text.contains("sup |dF/dy|:           2.5000000000000000e-1"),
        "{text}"
    );
}

#[test]
fn config_file_and_selector_agree() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tent.json");
    std::fs::write(
        &config,
        r#"{"kind": "builtin", "name": "tent-family", "params": {"p": 0.25}}"#,
    )
    .unwrap();
    let from_config = stdout_ok(&["eval", "--config", config.to_str().unwrap(), "--x", "0.75"]);
    let from_selector = stdout_ok(&["eval", "--example", "tent-family:p=0.25", "--x", "0.75"]);
    assert_eq!(from_config, from_selector);
}

#[test]
fn list_examples_names_every_builtin() {
    let text = stdout_ok(&["list-examples"]);
    for id in [
        "parabola",
        "length-arc",
        "once-diff",
        "c1-general-affine",
        "weierstrass",
        "exp",
        "tent-family",
        "four-node",
        "four-node-asym",
    ] {
        assert!(text.lines().any(|l| l.starts_with(id)), "missing {id}");
    }
}

#[test]
fn refined_polyline_passes_through_the_nodes() {
    let text = stdout_ok(&[
        "attract",
        "--example",
        "tent-family",
        "--method",
        "wop",
        "--depth",
        "3",
    ]);
    for node_row in [
        "0.0000000000000000e0,0.0000000000000000e0,1",
        "1.0000000000000000e0,1.0000000000000000e0,1",
        "2.0000000000000000e0,0.0000000000000000e0,2",
    ] {
        assert!(
            text.lines().any(|l| l == node_row),
            "missing row {node_row}"
        );
    }
}

#[test]
fn ensemble_writes_every_prefix_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ens");
    stdout_ok(&[
        "ensemble",
        "--example",
        "tent-family:p=0.25",
        "--k",
        "2",
        "--count",
        "500",
        "--window",
        "-20,20,-20,20",
        "--out",
        out.to_str().unwrap(),
    ]);
    for name in [
        "prefix-11.csv",
        "prefix-12.csv",
        "prefix-21.csv",
        "prefix-22.csv",
    ] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(text.starts_with("x,y,branch\n"), "{name} lacks the header");
        for line in text.lines().skip(1) {
            let x: f64 = line.split(',').next().unwrap().parse().unwrap();
            assert!((-20.0..=20.0).contains(&x), "{name} leaked x = {x}");
        }
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 4);
    assert_eq!(manifest[0]["prefix"], "11");
    assert!(manifest[0]["file"].as_str().unwrap().ends_with(".csv"));
}

fn bytes_of(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn outputs_are_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for out in [&csv_a, &csv_b] {
        stdout_ok(&[
            "attract",
            "--example",
            "four-node",
            "--count",
            "2000",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(bytes_of(&csv_a), bytes_of(&csv_b));

    let ppm_a = dir.path().join("a.ppm");
    let ppm_b = dir.path().join("b.ppm");
    for out in [&ppm_a, &ppm_b] {
        stdout_ok(&[
            "render",
            "--example",
            "tent-family",
            "--k",
            "2",
            "--count",
            "5000",
            "--seed",
            "4",
            "--window",
            "-8,10,-8,4",
            "--size",
            "160x120",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let image = bytes_of(&ppm_a);
    assert_eq!(image, bytes_of(&ppm_b));
    assert!(image.starts_with(b"P6\n160 120\n255\n"));

    // Worker count must not leak into the bytes.
    let ens_one = dir.path().join("one");
    let ens_many = dir.path().join("many");
    for (threads, out) in [("1", &ens_one), ("3", &ens_many)] {
        let status = fif(&[
            "ensemble",
            "--example",
            "tent-family",
            "--k",
            "2",
            "--count",
            "1000",
            "--out",
            out.to_str().unwrap(),
        ])
        .env("FIF_THREADS", threads)
        .status()
        .unwrap();
        assert!(status.success());
    }
    for name in ["prefix-11.csv", "prefix-22.csv", "manifest.json"] {
        assert_eq!(
            bytes_of(&ens_one.join(name)),
            bytes_of(&ens_many.join(name)),
            "{name} differs with the worker count"
        );
    }
}
