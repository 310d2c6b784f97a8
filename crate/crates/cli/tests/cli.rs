//! End-to-end tests of the `eigenrank` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eigenrank"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn gen_dataset(dir: &Path, n: usize, seed: u64) -> PathBuf {
    run_ok(&[
        "synth-gen",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    dir.join("manifest.toml")
}

#[test]
fn synth_gen_writes_complete_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_dataset(tmp.path(), 5, 3);
    assert!(manifest.exists());
    for i in 0..5 {
        assert!(tmp.path().join(format!("masks/case-{i:05}.emsk")).exists());
        assert!(tmp.path().join(format!("images/case-{i:05}.pgm")).exists());
    }
    // regeneration is byte-identical
    let first = std::fs::read(&manifest).unwrap();
    let tmp2 = tempfile::tempdir().unwrap();
    let manifest2 = gen_dataset(tmp2.path(), 5, 3);
    assert_eq!(first, std::fs::read(&manifest2).unwrap());
}

#[test]
fn dice_command_prints_score() {
    let tmp = tempfile::tempdir().unwrap();
    gen_dataset(tmp.path(), 2, 9);
    let mask = tmp.path().join("masks/case-00000.emsk");
    let out = run_ok(&["dice", mask.to_str().unwrap(), mask.to_str().unwrap()]);
    let score: f64 = out.trim().parse().unwrap();
    assert_eq!(score, 1.0);
}

#[test]
fn matrix_command_reports_spectrum() {
    let tmp = tempfile::tempdir().unwrap();
    gen_dataset(tmp.path(), 3, 9);
    let a = tmp.path().join("masks/case-00000.emsk");
    let b = tmp.path().join("masks/case-00001.emsk");
    let out = run_ok(&[
        "matrix",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        a.to_str().unwrap(),
    ]);
    assert!(out.contains("order = 3"));
    assert!(out.contains("lambda-max = "));
    assert!(out.contains("entropy-normalized = "));
    assert!(out.contains("psd = true"));
}

#[test]
fn select_is_deterministic_and_counts_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_dataset(tmp.path(), 30, 21);
    let out_a = tmp.path().join("a.txt");
    let out_b = tmp.path().join("b.txt");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "select",
            "--manifest",
            manifest.to_str().unwrap(),
            "--k",
            "3",
            "--iterations",
            "4",
            "--backend",
            "synthetic",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "identical flags must give byte-identical reports");
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("selected-count = 12"));
    assert!(text.contains("[subset 5] origin=spectral counted=no"));
}

#[test]
fn rank_fixed_and_iterative_work() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_dataset(tmp.path(), 20, 5);
    let fixed_out = tmp.path().join("fixed.txt");
    run_ok(&[
        "rank",
        "--manifest",
        manifest.to_str().unwrap(),
        "--backend",
        "synthetic",
        "--mode",
        "fixed",
        "--models",
        "0.2,0.8:7",
        "--out",
        fixed_out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&fixed_out).unwrap();
    assert!(text.contains("mode = fixed"));
    assert!(text.contains("cases = 20"));

    let iter_out = tmp.path().join("iter.txt");
    run_ok(&[
        "rank",
        "--manifest",
        manifest.to_str().unwrap(),
        "--backend",
        "synthetic",
        "--mode",
        "iterative",
        "--k",
        "2",
        "--iterations",
        "3",
        "--seed",
        "4",
        "--probe",
        "0.5",
        "--out",
        iter_out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&iter_out).unwrap();
    assert!(text.contains("mode = iterative"));
    assert!(text.contains("[iteration 3]"));
    assert!(text.contains("eliminated-mean = "));
}

#[test]
fn eval_reports_per_case_scores() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_dataset(tmp.path(), 8, 2);
    let out = tmp.path().join("eval.txt");
    run_ok(&[
        "eval",
        "--manifest",
        manifest.to_str().unwrap(),
        "--backend",
        "synthetic",
        "--model",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("cases = 8"));
    assert!(text.contains("case-00007"));
}

#[test]
fn simulate_zero_epsilon_gives_unit_ratios() {
    let out = run_ok(&[
        "simulate",
        "--t",
        "5",
        "--epsilon",
        "0",
        "--trials",
        "10",
        "--seed",
        "1",
    ]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,epsilon,mean_ratio,stdev_ratio,undefined_count"
    );
    let row = lines.next().unwrap();
    assert_eq!(row, "5,0.00000000000e0,1.00000000000e0,0.00000000000e0,0");
}

#[test]
fn simulate_writes_deterministic_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a.csv");
    let out_b = tmp.path().join("b.csv");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "simulate",
            "--t",
            "3,5",
            "--epsilon",
            "0.1",
            "--trials",
            "20",
            "--seed",
            "2",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["select", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one_with_reason_prefix() {
    let out = run(&["dice", "/nonexistent/a.emsk", "/nonexistent/b.emsk"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: mask-io:"), "got: {stderr}");

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.emsk");
    std::fs::write(&bad, b"XXXX1\n2 2\n\x00\x00\x00\x00").unwrap();
    let out = run(&["dice", bad.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: bad-magic:"));
}

#[test]
fn select_rejects_undersized_pools() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_dataset(tmp.path(), 5, 2);
    let out = run(&[
        "select",
        "--manifest",
        manifest.to_str().unwrap(),
        "--k",
        "3",
        "--iterations",
        "4",
        "--backend",
        "synthetic",
        "--seed",
        "1",
        "--out",
        tmp.path().join("r.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: pool-too-small:"));
}

#[test]
fn metric_and_score_switches_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = gen_dataset(tmp.path(), 24, 13);
    let out_a = tmp.path().join("a.txt");
    let out_b = tmp.path().join("b.txt");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "select",
            "--manifest",
            manifest.to_str().unwrap(),
            "--k",
            "2",
            "--iterations",
            "4",
            "--backend",
            "synthetic",
            "--seed",
            "3",
            "--metric",
            "jaccard",
            "--score",
            "entropy",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
    let text = std::fs::read_to_string(&out_a).unwrap();
    assert!(text.contains("metric = jaccard"));
    assert!(text.contains("score = entropy"));
    assert!(text.contains("selected-count = 8"));
}
