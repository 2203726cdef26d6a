use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FASHION_06: [[f64; 3]; 3] = [[0.4, 0.3, 0.3], [0.3, 0.4, 0.3], [0.3, 0.3, 0.4]];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_labelnoise"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.cfg");
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

const TINY: &str = "dataset = synthetic
synthetic.classes = 3
synthetic.per_class = 12
synthetic.test_per_class = 6
synthetic.size = 12
synthetic.separation = 3.0
noise = fashion0.6
epochs = 1
repetitions = 2
batch_size = 16
";

fn parse_matrix(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn estimate_recovers_oracle_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let posteriors = fixture("oracle_posteriors.txt");
    let o = run(&[
        "estimate",
        "--posteriors",
        posteriors.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed = parse_matrix(&String::from_utf8_lossy(&o.stdout));
    let saved = parse_matrix(&std::fs::read_to_string(dir.path().join("matrix.txt")).unwrap());
    assert_eq!(printed, saved);
    for (row, want) in saved.iter().zip(FASHION_06) {
        for (v, w) in row.iter().zip(want) {
            assert!((v - w).abs() <= 1e-9, "{saved:?}");
        }
    }
}

#[test]
fn missing_dataset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dataset = idx\ntrain_images = missing-images.idx\ntrain_labels = missing-labels.idx\ntest_images = t\ntest_labels = l\n",
    );
    let o = run(&["train", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("missing-images.idx"), "{err}");
}

#[test]
fn unreadable_config_and_bad_flags_are_config_errors() {
    assert_eq!(
        run(&["train", "--config", "/nonexistent/exp.cfg"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["train", "--correction", "forward"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn malformed_half_matrix_is_rejected_with_row_sum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let o = run(&[
        "train",
        "--config",
        &cfg,
        "--matrix",
        "fashion0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("not row-stochastic") && err.contains("1.1"), "{err}");
}

#[test]
fn corrupt_posterior_dump_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    std::fs::write(&p, "C=3\n0,0.5,0.5,0.5\n").unwrap();
    let o = run(&[
        "estimate",
        "--posteriors",
        p.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn inject_writes_one_label_per_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("inj");
    let o = run(&[
        "inject",
        "--config",
        &cfg,
        "--matrix",
        "fashion0.6",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let labels = labelnoise::data::read_label_csv(out.join("noisy_labels.csv")).unwrap();
    assert_eq!(labels.len(), 36);
    assert!(labels.iter().all(|&l| l < 3));
}

#[test]
fn train_then_eval_reproduces_reported_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{TINY}arch = tiny-cnn\n"));
    let out = dir.path().join("train");
    let o = run(&["train", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    assert!(out.join("report.txt").is_file());

    let ckpt = out.join("model-1.bin");
    let o = run(&[
        "eval",
        "--config",
        &cfg,
        "--arch",
        "tiny-cnn",
        "--checkpoint",
        ckpt.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let top1: f64 = stdout.trim().strip_prefix("top1 ").unwrap().parse().unwrap();
    let reported = report["runs"][1]["top1"].as_f64().unwrap();
    assert!((top1 - reported).abs() < 1e-3, "{top1} vs {reported}");
}

#[test]
fn bench_has_four_rows_and_rows_reproduce_individually() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("bench");
    let o = run(&["bench", "--config", &cfg, "--seed", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("bench.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let names: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r["model"].as_str().unwrap(), r["correction"].as_str().unwrap()))
        .collect();
    assert_eq!(
        names,
        [
            ("lenet5", "none"),
            ("lenet5", "backward"),
            ("alexnet-mini", "none"),
            ("alexnet-mini", "backward")
        ]
    );
    let table = std::fs::read_to_string(out.join("bench.txt")).unwrap();
    assert!(table.contains("lenet5-Backward"), "{table}");

    // Second run of the backward lenet5 row, replayed alone from its seed.
    let run_row = &rows[1]["runs"][1];
    let seed = run_row["seed"].as_u64().unwrap().to_string();
    let single = dir.path().join("single");
    let o = run(&[
        "train",
        "--config",
        &cfg,
        "--arch",
        "lenet5",
        "--correction",
        "backward",
        "--run-seed",
        &seed,
        "--out",
        single.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let replay: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(single.join("report.json")).unwrap()).unwrap();
    assert_eq!(replay["runs"][0]["top1"], run_row["top1"]);
    assert_eq!(
        replay["runs"][0]["final_train_objective"],
        run_row["final_train_objective"]
    );
}
