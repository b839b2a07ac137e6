//! End-to-end checks of the command-line binary: exit codes, file outputs,
//! and flag-over-config precedence.

use std::path::Path;
use std::process::{Command, Output};

fn seqtrans(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqtrans"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_code(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn write_config(dir: &Path, name: &str, master_seed: u64, out: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(
        &path,
        format!(
            r#"{{
  "suite": {{"config": {{"task_count": 3, "classes_per_task": 2, "dim": 4,
             "samples_per_class": 15, "similarity": 0.5, "difficulty_spread": 1.0,
             "eval_fraction": 0.2, "seed": 11}}}},
  "strategies": ["naive"],
  "buffer_capacities": [0],
  "metric": "gbc",
  "random_order_count": 3,
  "hyper": {{"learning_rate": 0.03, "epochs": 2, "minibatch": 32,
            "replay_minibatch": 0, "strategy": "naive", "seed": 0}},
  "hidden": 6,
  "master_seed": {master_seed},
  "output_dir": "{out}"
}}
"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"][..], &["run", "--help"][..]] {
        assert_code(&seqtrans(dir.path(), args), 0);
    }
}

#[test]
fn usage_errors_exit_one_without_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(&seqtrans(dir.path(), &["no-such-command"]), 1);
    assert_code(
        &seqtrans(dir.path(), &["generate", "--bogus-flag", "--out", "x/"]),
        1,
    );
    assert_code(&seqtrans(dir.path(), &[]), 1);
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn validation_failure_exits_one_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let output = seqtrans(
        dir.path(),
        &["generate", "--tasks", "0", "--out", "suite/"],
    );
    assert_code(&output, 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("task_count"));
    assert!(!dir.path().join("suite").exists());
}

#[test]
fn missing_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(&seqtrans(dir.path(), &["run", "--config", "gone.json"]), 2);
}

#[test]
fn generate_then_select_order_produces_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &seqtrans(
            dir.path(),
            &[
                "generate", "--tasks", "3", "--classes", "2", "--dim", "4", "--samples", "16",
                "--out", "suite",
            ],
        ),
        0,
    );
    assert!(dir.path().join("suite/manifest.json").exists());
    assert!(dir.path().join("suite/b0_t0000.csv").exists());

    let output = seqtrans(
        dir.path(),
        &[
            "select-order",
            "--manifest",
            "suite/manifest.json",
            "--metric",
            "gbc",
            "--samples-per-class",
            "5",
            "--probe-epochs",
            "2",
            "--out",
            "sel",
        ],
    );
    assert_code(&output, 0);
    assert!(dir.path().join("sel/order.json").exists());
    let scores = std::fs::read_to_string(dir.path().join("sel/scores_b0.csv")).unwrap();
    assert!(scores.starts_with("t,i,score\n"));
    // 3 tasks: header + 6 off-diagonal rows.
    assert_eq!(scores.lines().count(), 7);
    assert!(String::from_utf8_lossy(&output.stdout).contains("order"));
}

#[test]
fn run_writes_reports_and_correlate_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "exp.json", 5, "out");
    assert_code(&seqtrans(dir.path(), &["run", "--config", "exp.json"]), 0);
    for name in ["reports.csv", "acc_matrix.csv", "correlations.csv", "summary.json"] {
        assert!(dir.path().join("out").join(name).exists(), "{name}");
    }
    let reports = std::fs::read_to_string(dir.path().join("out/reports.csv")).unwrap();
    assert_eq!(reports.lines().count(), 4); // header + 3 runs

    let output = seqtrans(dir.path(), &["correlate", "--reports", "out"]);
    assert_code(&output, 0);
    let table = String::from_utf8_lossy(&output.stdout);
    assert!(table.contains("naive,0,"), "{table}");
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "exp.json", 5, "out");
    assert_code(
        &seqtrans(
            dir.path(),
            &[
                "run", "--config", "exp.json", "--out", "other", "--orders", "2", "--metric",
                "leep",
            ],
        ),
        0,
    );
    assert!(!dir.path().join("out").exists());
    let reports = std::fs::read_to_string(dir.path().join("other/reports.csv")).unwrap();
    assert_eq!(reports.lines().count(), 3); // header + 2 runs
    assert!(reports.contains(",leep,"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "exp.json", 5, "a");
    assert_code(&seqtrans(dir.path(), &["run", "--config", "exp.json"]), 0);
    assert_code(
        &seqtrans(dir.path(), &["run", "--config", "exp.json", "--out", "b"]),
        0,
    );
    for name in ["reports.csv", "acc_matrix.csv", "correlations.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(name)).unwrap(),
            std::fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn compare_writes_comparison_record() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "exp.json", 9, "cmp");
    let output = seqtrans(dir.path(), &["compare", "--config", "exp.json"]);
    assert_code(&output, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cmp/comparison.json")).unwrap())
            .unwrap();
    assert_eq!(report["random"].as_array().unwrap().len(), 3);
    assert!(report["hctos"]["aa"].is_number());
    // 3-task single batch carries the factorial enumeration.
    assert_eq!(report["brute_force"]["order_count"], 6);
}
