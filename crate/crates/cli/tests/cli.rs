//! End-to-end tests of the `ensconv` binary: exit codes, report contents,
//! and byte-level reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ensconv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap();
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// A small valid hold-out setup: 4 identical classifier rows, all correct.
fn identical_rows_fixture(dir: &Path) -> (String, String) {
    let preds = dir.join("preds.txt");
    let truth = dir.join("truth.txt");
    write(&preds, "4 3 2\n0 1 0\n0 1 0\n0 1 0\n0 1 0\n");
    write(&truth, "0\n1\n0\n");
    (
        preds.to_str().unwrap().to_string(),
        truth.to_str().unwrap().to_string(),
    )
}

fn uniform_model(dir: &Path) -> String {
    let path = dir.join("model.json");
    write(
        &path,
        r#"{"k":2,"pi":[0.5,0.5],"mu":[{"family":"beta","params":[1.0,1.0]},{"family":"beta","params":[1.0,1.0]}]}"#,
    );
    path.to_str().unwrap().to_string()
}

fn small_dataset(dir: &Path) -> String {
    let path = dir.join("data.csv");
    let mut csv = String::from("f1,f2,label\n");
    for i in 0..30 {
        csv.push_str(&format!("{}.0,{}.5,0\n", i, i));
    }
    for i in 0..30 {
        csv.push_str(&format!("{}.0,{}.5,1\n", i + 100, i + 100));
    }
    write(&path, &csv);
    path.to_str().unwrap().to_string()
}

#[test]
fn version_prints_semver_plus_build_hash() {
    let out = run(&["--version"]);
    assert_exit(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.1.0+"), "got {text}");
}

#[test]
fn estimate_identical_rows_reports_zero_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let (preds, truth) = identical_rows_fixture(dir.path());
    let report = dir.path().join("report.json");
    let out = run(&[
        "estimate",
        "--predictions",
        &preds,
        "--truth",
        &truth,
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let json = read_json(&report);
    assert_eq!(json["sigma_hat"].as_f64().unwrap(), 0.0);
    assert_eq!(json["err_hat"].as_f64().unwrap(), 0.0);
    assert_eq!(json["B"].as_u64().unwrap(), 50);
    assert_eq!(json["t"].as_u64().unwrap(), 4);
    assert_eq!(json["mode"].as_str().unwrap(), "holdout");
    assert_eq!(json["replicates"].as_array().unwrap().len(), 50);
    assert_eq!(json["extrapolation"]["t0"].as_u64().unwrap(), 4);
    // the manifest sits next to the report
    assert!(dir.path().join("report.manifest.json").exists());
}

#[test]
fn estimate_same_inputs_and_seed_give_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("preds.txt");
    let truth = dir.path().join("truth.txt");
    write(&preds, "5 4 3\n0 1 2 0\n1 1 2 0\n0 2 2 1\n0 1 0 0\n2 1 2 0\n");
    write(&truth, "0 1 2 0\n");
    let report = dir.path().join("report.json");
    let args = [
        "estimate",
        "--predictions",
        preds.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--B",
        "25",
        "--seed",
        "99",
        "--out",
        report.to_str().unwrap(),
    ];
    assert_exit(&run(&args), 0);
    let first = fs::read(&report).unwrap();
    let first_manifest = fs::read(dir.path().join("report.manifest.json")).unwrap();
    assert_exit(&run(&args), 0);
    assert_eq!(fs::read(&report).unwrap(), first);
    assert_eq!(
        fs::read(dir.path().join("report.manifest.json")).unwrap(),
        first_manifest
    );
}

#[test]
fn estimate_is_invariant_to_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (preds, truth) = identical_rows_fixture(dir.path());
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let report = dir.path().join(format!("report{threads}.json"));
        let out = bin()
            .env("ENSCONV_THREADS", threads)
            .args([
                "estimate",
                "--predictions",
                &preds,
                "--truth",
                &truth,
                "--seed",
                "5",
                "--out",
                report.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_exit(&out, 0);
        reports.push(fs::read(&report).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn estimate_b_one_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (preds, truth) = identical_rows_fixture(dir.path());
    let out = run(&[
        "estimate",
        "--predictions",
        &preds,
        "--truth",
        &truth,
        "--B",
        "1",
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
}

#[test]
fn estimate_oob_without_mask_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (preds, truth) = identical_rows_fixture(dir.path());
    let out = run(&[
        "estimate",
        "--predictions",
        &preds,
        "--truth",
        &truth,
        "--mode",
        "oob",
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
}

#[test]
fn estimate_malformed_file_names_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("preds.txt");
    let truth = dir.path().join("truth.txt");
    write(&preds, "2 2 2\n0 1\n0 x\n");
    write(&truth, "0 1\n");
    let out = run(&[
        "estimate",
        "--predictions",
        preds.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_exit(&out, 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    assert!(stderr.contains("column 3"), "stderr: {stderr}");
}

#[test]
fn estimate_empty_class_is_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let (preds, truth) = identical_rows_fixture(dir.path());
    // truth contains only classes 0 and 1; class 1 exists but a class with
    // no columns must be rejected
    let out = run(&[
        "estimate",
        "--predictions",
        &preds,
        "--truth",
        &truth,
        "--class",
        "7",
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_exit(&out, 4);
}

#[test]
fn extrapolate_examples() {
    let out = run(&["extrapolate", "--sigma0", "0.02", "--t0", "200", "--t", "800"]);
    assert_exit(&out, 0);
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    assert_eq!(json["sigma"].as_f64().unwrap(), 0.01);

    let out = run(&["extrapolate", "--sigma0", "0.02", "--t0", "200", "--eps", "0.03"]);
    assert_exit(&out, 0);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["min_trees"].as_u64().unwrap(), 800);
}

#[test]
fn extrapolate_usage_errors() {
    assert_exit(&run(&["extrapolate", "--sigma0", "0.02", "--t0", "200"]), 2);
    assert_exit(
        &run(&["extrapolate", "--sigma0", "0.02", "--t0", "200", "--eps", "0"]),
        2,
    );
    assert_exit(
        &run(&[
            "extrapolate", "--sigma0", "0.02", "--t0", "200", "--t", "800", "--eps", "0.1",
        ]),
        2,
    );
}

#[test]
fn extrapolate_writes_report_and_manifest_with_out() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("extrap.json");
    let out = run(&[
        "extrapolate",
        "--sigma0",
        "0.02",
        "--t0",
        "200",
        "--t",
        "800",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert_eq!(read_json(&out_path)["sigma"].as_f64().unwrap(), 0.01);
    assert!(dir.path().join("extrap.manifest.json").exists());
}

#[test]
fn train_emits_arrays_and_estimate_consumes_them() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let out_dir = dir.path().join("trained");
    let out = run(&[
        "train",
        "--data",
        &data,
        "--trees",
        "10",
        "--seed",
        "3",
        "--holdout-frac",
        "0.25",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    for name in [
        "oob_predictions.txt",
        "oob_mask.txt",
        "oob_truth.txt",
        "holdout_predictions.txt",
        "holdout_truth.txt",
        "metadata.json",
        "manifest.json",
    ] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let meta = read_json(&out_dir.join("metadata.json"));
    assert_eq!(meta["trees"].as_u64().unwrap(), 10);
    assert_eq!(meta["n_holdout"].as_u64().unwrap(), 15);
    assert_eq!(meta["bag_sha256"].as_array().unwrap().len(), 10);

    // the emitted OOB files feed straight back into `estimate`
    let report = dir.path().join("report.json");
    let out = run(&[
        "estimate",
        "--predictions",
        out_dir.join("oob_predictions.txt").to_str().unwrap(),
        "--truth",
        out_dir.join("oob_truth.txt").to_str().unwrap(),
        "--mode",
        "oob",
        "--mask",
        out_dir.join("oob_mask.txt").to_str().unwrap(),
        "--B",
        "20",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let json = read_json(&report);
    assert!(json["sigma_hat"].as_f64().unwrap() >= 0.0);
    assert_eq!(json["mode"].as_str().unwrap(), "oob");
}

#[test]
fn train_single_tree_gives_one_row_arrays() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let out_dir = dir.path().join("trained");
    let out = run(&[
        "train",
        "--data",
        &data,
        "--trees",
        "1",
        "--holdout-frac",
        "0.25",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let preds = fs::read_to_string(out_dir.join("holdout_predictions.txt")).unwrap();
    assert!(preds.starts_with("1 15 2\n"), "header: {}", preds.lines().next().unwrap());
}

#[test]
fn train_without_holdout_emits_only_oob_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let out_dir = dir.path().join("trained");
    let out = run(&[
        "train",
        "--data",
        &data,
        "--trees",
        "3",
        "--holdout-frac",
        "0",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert!(out_dir.join("oob_predictions.txt").exists());
    assert!(!out_dir.join("holdout_predictions.txt").exists());
    assert!(!out_dir.join("holdout_truth.txt").exists());
}

#[test]
fn train_is_reproducible_under_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset(dir.path());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = run(&[
            "train",
            "--data",
            &data,
            "--trees",
            "8",
            "--seed",
            "11",
            "--holdout-frac",
            "0.2",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
        outputs.push((
            fs::read(out_dir.join("oob_predictions.txt")).unwrap(),
            fs::read(out_dir.join("oob_mask.txt")).unwrap(),
            fs::read(out_dir.join("metadata.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn train_non_integer_label_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    write(&data, "f1,label\n1.0,0.5\n");
    let out = run(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--out-dir",
        dir.path().join("t").to_str().unwrap(),
    ]);
    assert_exit(&out, 3);
}

#[test]
fn simulate_sigma_with_equal_run_seeds_is_all_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let model = uniform_model(dir.path());
    let out_dir = dir.path().join("sim");
    let out = run(&[
        "simulate",
        "--model",
        &model,
        "--seed",
        "4",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "sigma",
        "--t",
        "50",
        "--n-runs",
        "2",
        "--equal-run-seeds",
    ]);
    assert_exit(&out, 0);
    let summary = read_json(&out_dir.join("summary.json"));
    let curve = summary["sigma_curve"].as_array().unwrap();
    assert_eq!(curve.len(), 50);
    assert!(curve.iter().all(|v| v.as_f64().unwrap() == 0.0));
}

#[test]
fn simulate_clt_on_symmetric_uniform_model_reports_half_err_infinity() {
    let dir = tempfile::tempdir().unwrap();
    let model = uniform_model(dir.path());
    let out_dir = dir.path().join("sim");
    let out = run(&[
        "simulate",
        "--model",
        &model,
        "--out-dir",
        out_dir.to_str().unwrap(),
        "clt",
        "--t",
        "100",
        "--n-runs",
        "20",
    ]);
    assert_exit(&out, 0);
    let summary = read_json(&out_dir.join("summary.json"));
    assert_eq!(summary["err_infinity"].as_f64().unwrap(), 0.5);
    assert!(out_dir.join("clt_values.csv").exists());
}

#[test]
fn simulate_is_deterministic_under_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let model = uniform_model(dir.path());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = run(&[
            "simulate",
            "--model",
            &model,
            "--seed",
            "12",
            "--out-dir",
            out_dir.to_str().unwrap(),
            "paths",
            "--t",
            "40",
            "--n-runs",
            "5",
        ]);
        assert_exit(&out, 0);
        outputs.push((
            fs::read(out_dir.join("paths.csv")).unwrap(),
            fs::read(out_dir.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulate_invalid_model_spec_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    // pi does not sum to 1
    write(
        &model,
        r#"{"k":2,"pi":[0.6,0.6],"mu":[{"family":"beta","params":[1.0,1.0]},{"family":"beta","params":[1.0,1.0]}]}"#,
    );
    let out = run(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--out-dir",
        dir.path().join("sim").to_str().unwrap(),
        "sigma",
        "--t",
        "10",
        "--n-runs",
        "2",
    ]);
    assert_exit(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("sum to 1"), "stderr: {stderr}");
}

#[test]
fn simulate_bootstrap_check_reports_both_sigmas() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    write(
        &model,
        r#"{"k":2,"pi":[0.3,0.7],"mu":[{"family":"beta","params":[2.0,5.0]},{"family":"beta","params":[5.0,2.0]}]}"#,
    );
    let out_dir = dir.path().join("sim");
    let out = run(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--seed",
        "8",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "bootstrap-check",
        "--t",
        "200",
        "--n-runs",
        "20",
        "--B",
        "20",
    ]);
    assert_exit(&out, 0);
    let summary = read_json(&out_dir.join("summary.json"));
    let mean = summary["mean_bootstrap_sigma"].as_f64().unwrap();
    let truth = summary["ground_truth_sigma"].as_f64().unwrap();
    assert!(mean > 0.0 && truth > 0.0);
    // tiny run: only a loose agreement check
    assert!(summary["relative_error"].as_f64().unwrap() < 1.0);
}
