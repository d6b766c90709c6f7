use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rayclass_core::io::{read_json, write_json};
use rayclass_core::phantom::{ClassLabel, Manifest};

fn rayclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rayclass"))
        .args(args)
        .env("RAYCLASS_THREADS", "2")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every file under `dir` with its bytes, sorted by relative path.
fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((
                    path.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn generate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--seed", "3", "--out", s(dir)];
    args.extend_from_slice(extra);
    let out = rayclass(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn generate_counts_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("nested/missing/a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        generate(dir, &["--n-hc", "40", "--n-pd", "60", "--paired-y4"]);
    }
    let manifest: Manifest = read_json(&a.join("manifest.json")).unwrap();
    assert_eq!(manifest.scans.len(), 40 + 60 + 60);
    assert_eq!(tree(&a), tree(&b));
}

#[test]
fn unwritable_output_is_an_io_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("cohort");
    let out = rayclass(&[
        "generate",
        "--seed",
        "1",
        "--n-hc",
        "2",
        "--n-pd",
        "2",
        "--out",
        s(&target),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains(s(&blocker)), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    for args in [
        vec!["generate", "--out", s(&out_dir)],
        vec![
            "run",
            "--seed",
            "1",
            "--cohort",
            "/definitely/not/here",
            "--out",
            s(&out_dir),
        ],
        vec!["run", "--seed", "1", "--strategies", "XYZ"],
        vec!["frobnicate"],
    ] {
        let out = rayclass(&args);
        assert_eq!(code(&out), 1, "{args:?}: {}", stderr(&out));
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_rayclass"))
        .args(["verify", "--seed", "1"])
        .env("RAYCLASS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn masks_recover_ground_truth_and_need_controls() {
    let tmp = tempfile::tempdir().unwrap();
    let cohort = tmp.path().join("cohort");
    generate(&cohort, &["--n-hc", "40", "--n-pd", "60"]);
    let masks = tmp.path().join("masks");
    let out = rayclass(&["masks", "--seed", "3", "--cohort", s(&cohort), "--out", s(&masks)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = read_json(&masks.join("masks.json")).unwrap();
    assert!(summary["dice"].as_f64().unwrap() >= 0.95);
    assert!(masks.join("striatum.json").exists() && masks.join("right_putamen.json").exists());

    // drop the controls from the manifest
    let mut manifest: Manifest = read_json(&cohort.join("manifest.json")).unwrap();
    manifest.scans.retain(|e| e.label != ClassLabel::Hc);
    manifest.label_counts.remove(&ClassLabel::Hc);
    write_json(&cohort.join("manifest.json"), &manifest).unwrap();
    let out = rayclass(&[
        "masks",
        "--seed",
        "3",
        "--cohort",
        s(&cohort),
        "--out",
        s(&tmp.path().join("m2")),
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn noiseless_masks_are_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("quiet.toml");
    std::fs::write(
        &config,
        "seed = 5\n[phantom]\nnoise = 0.0\nsubject_variability = 0.0\nstriatal_variability = 0.0\n[cohort]\nn_hc = 6\nn_pd = 6\n",
    )
    .unwrap();
    let cohort = tmp.path().join("cohort");
    let masks = tmp.path().join("masks");
    assert_eq!(
        code(&rayclass(&["generate", "--config", s(&config), "--out", s(&cohort)])),
        0
    );
    let out = rayclass(&[
        "masks",
        "--config",
        s(&config),
        "--cohort",
        s(&cohort),
        "--out",
        s(&masks),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = read_json(&masks.join("masks.json")).unwrap();
    assert_eq!(summary["dice"].as_f64(), Some(1.0));
}

#[test]
fn smoke_run_resumes_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cohort = tmp.path().join("cohort");
    generate(&cohort, &["--n-hc", "40", "--n-pd", "60", "--paired-y4"]);
    let run = tmp.path().join("run");
    let args = [
        "run",
        "--seed",
        "3",
        "--cohort",
        s(&cohort),
        "--runs",
        "5",
        "--out",
        s(&run),
    ];

    let started = Instant::now();
    let first = rayclass(&args);
    assert!(started.elapsed() < Duration::from_secs(60));
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert!(!stderr(&first).contains("resumed"));
    let before = tree(&run);
    let index: serde_json::Value = read_json(&run.join("index.json")).unwrap();
    assert_eq!(index["cells"].as_array().unwrap().len(), 6);
    for cell in index["cells"].as_array().unwrap() {
        for key in ["runs", "model", "weights_volume", "weights_csv", "contributions"] {
            assert!(run.join(cell[key].as_str().unwrap()).exists(), "{key}");
        }
    }

    // a lost shard is recomputed, the others are reused
    std::fs::remove_file(run.join("runs/s_svm.csv")).unwrap();
    let second = rayclass(&args);
    assert_eq!(code(&second), 0, "{}", stderr(&second));
    assert_eq!(stderr(&second).matches("resumed").count(), 5);
    assert_eq!(tree(&run), before);

    // a different protocol invalidates every shard
    let third = rayclass(&[
        "run",
        "--seed",
        "3",
        "--cohort",
        s(&cohort),
        "--runs",
        "3",
        "--out",
        s(&run),
    ]);
    assert_eq!(code(&third), 0);
    assert!(!stderr(&third).contains("resumed"));

    let report = rayclass(&["report", "--out", s(&run), "--paired"]);
    assert_eq!(code(&report), 0, "{}", stderr(&report));
    assert!(run.join("table_paired.csv").exists());

    let y4 = tmp.path().join("y4");
    let out = rayclass(&[
        "run",
        "--seed",
        "3",
        "--cohort",
        s(&cohort),
        "--runs",
        "2",
        "--task",
        "bl-vs-y4",
        "--strategies",
        "S",
        "--classifiers",
        "LR",
        "--out",
        s(&y4),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let index: serde_json::Value = read_json(&y4.join("index.json")).unwrap();
    assert_eq!(index["task"], "bl-vs-y4");
    assert_eq!(index["images"], 120);
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cohort = tmp.path().join("cohort");
    generate(&cohort, &["--n-hc", "10", "--n-pd", "10"]);
    let config = tmp.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "seed = 8\nstrategies = [\"SBR\", \"S\"]\nclassifiers = [\"LR\"]\n[protocol]\nn_runs = 4\ncv_folds = 3\n[paths]\ncohort = {:?}\n",
            s(&cohort)
        ),
    )
    .unwrap();
    let run = tmp.path().join("run");
    let out = rayclass(&[
        "run",
        "--config",
        s(&config),
        "--runs",
        "2",
        "--seed",
        "9",
        "--out",
        s(&run),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let index: serde_json::Value = read_json(&run.join("index.json")).unwrap();
    assert_eq!(index["n_runs"], 2);
    assert_eq!(index["seed"], 9);
    assert_eq!(index["cells"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_passes_and_detects_a_broken_normal() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rayclass(&["verify", "--seed", "0", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(tmp.path().join("verify_report.txt")).unwrap();
    assert!(report.contains("excluded"));
    assert!(!report.contains("FAIL"));

    let out = rayclass(&["verify", "--seed", "0", "--perturb-normal", "1e-3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL  claim2"));
}
