//! Black-box tests of the `qalign` binary: exit codes, reproducibility,
//! and the documented command behaviors.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qalign"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "command failed: {}\n{}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Small synthetic workspace: images + manifest + prompt bank.
fn workspace(dir: &Path, count: usize, seed: u64) -> (PathBuf, PathBuf) {
    let imgs = dir.join("imgs");
    let bank = dir.join("bank.qemb");
    assert_success(&run(&[
        "synth",
        "--count",
        &count.to_string(),
        "--size",
        "96",
        "--seed",
        &seed.to_string(),
        "--out",
        imgs.to_str().unwrap(),
    ]));
    assert_success(&run(&[
        "prompts",
        "--pairs",
        "3",
        "--dim",
        "16",
        "--seed",
        &seed.to_string(),
        "--out",
        bank.to_str().unwrap(),
    ]));
    (imgs.join("manifest.csv"), bank)
}

#[test]
fn unknown_kind_exits_2_listing_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = workspace(dir.path(), 1, 1);
    let input = manifest.parent().unwrap().join("synth00000.png");
    let out = dir.path().join("out.png");
    let output = run(&[
        "degrade",
        "--input",
        input.to_str().unwrap(),
        "--kind",
        "vignette",
        "--level",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    for name in ["gaussian-blur", "jpeg2000", "color-saturation-2", "mean-shift"] {
        assert!(stderr.contains(name), "stderr should list `{name}`: {stderr}");
    }
    assert_eq!(stderr.matches(',').count() >= 23, true, "lists all 24 kinds");
}

#[test]
fn out_of_range_level_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = workspace(dir.path(), 1, 2);
    let input = manifest.parent().unwrap().join("synth00000.png");
    let out = dir.path().join("out.png");
    for level in ["0", "6"] {
        let output = run(&[
            "degrade",
            "--input",
            input.to_str().unwrap(),
            "--kind",
            "jitter",
            "--level",
            level,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(output.status.code(), Some(2), "level {level}");
    }
}

#[test]
fn missing_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.png");
    let output = run(&[
        "degrade",
        "--input",
        "/nonexistent/img.png",
        "--kind",
        "jitter",
        "--level",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn degrade_is_reproducible_and_prints_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, _) = workspace(dir.path(), 1, 3);
    let input = manifest.parent().unwrap().join("synth00000.png");
    let (out1, out2) = (dir.path().join("a.png"), dir.path().join("b.png"));
    let run1 = run(&[
        "degrade",
        "--input",
        input.to_str().unwrap(),
        "--kind",
        "white-noise",
        "--level",
        "3",
        "--seed",
        "9",
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert_success(&run1);
    let psnr: f64 = stdout(&run1).trim().parse().expect("psnr on stdout");
    assert!(psnr > 5.0 && psnr < 60.0, "psnr {psnr}");
    assert_success(&run(&[
        "degrade",
        "--input",
        input.to_str().unwrap(),
        "--kind",
        "white-noise",
        "--level",
        "3",
        "--seed",
        "9",
        "--out",
        out2.to_str().unwrap(),
    ]));
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn list_kinds_prints_24_rows() {
    let output = run(&["list-kinds"]);
    assert_success(&output);
    assert_eq!(stdout(&output).lines().count(), 24);
}

#[test]
fn eval_on_perfect_predictions_reports_unit_srcc() {
    let dir = tempfile::tempdir().unwrap();
    // Manifest with mos and a scores file whose q equals the mos exactly.
    let manifest = dir.path().join("manifest.csv");
    let scores = dir.path().join("scores.csv");
    let mut manifest_text = String::from("path,id,mos\n");
    let mut scores_text = String::from("id,s_p,s_n,q\n");
    for i in 0..8 {
        let mos = 0.1 + 0.1 * i as f64;
        manifest_text.push_str(&format!("img{i}.png,img{i},{mos}\n"));
        scores_text.push_str(&format!("img{i},0,0,{mos}\n"));
    }
    std::fs::write(&manifest, manifest_text).unwrap();
    std::fs::write(&scores, scores_text).unwrap();
    let out = dir.path().join("report.json");
    let output = run(&[
        "eval",
        "--scores",
        scores.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_success(&output);
    assert!(stdout(&output).contains("srcc=1"), "{}", stdout(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["n"], 8);
    assert_eq!(report["srcc"], 1.0);
}

#[test]
fn train_zero_epochs_writes_initialized_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, bank) = workspace(dir.path(), 2, 5);
    let corpus = dir.path().join("corpus");
    assert_success(&run(&[
        "corpus",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        corpus.to_str().unwrap(),
        "--patch-size",
        "64",
        "--seed",
        "5",
    ]));
    let model = dir.path().join("model.qemb");
    assert_success(&run(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--prompts",
        bank.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--epochs",
        "0",
        "--seed",
        "41",
    ]));
    let loaded = qalign_core::alignment::ToyEncoderParams::<f32>::load(&model).unwrap();
    let expected = qalign_core::alignment::ToyEncoderParams::<f32>::init(16, 41).unwrap();
    // Written storage is f32; compare after the same round trip.
    let round_trip =
        qalign_core::alignment::ToyEncoderParams::<f32>::from_store(&expected.to_store()).unwrap();
    assert_eq!(loaded, round_trip);
}

#[test]
fn pipeline_runs_end_to_end_and_artifacts_parse() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, bank) = workspace(dir.path(), 6, 8);
    let corpus = dir.path().join("corpus");
    let model = dir.path().join("model.qemb");
    let scores = dir.path().join("scores.csv");
    let report = dir.path().join("report.json");
    let sweep = dir.path().join("sweep.csv");

    assert_success(&run(&[
        "corpus",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        corpus.to_str().unwrap(),
        "--patch-size",
        "64",
        "--seed",
        "8",
    ]));
    assert_success(&run(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--prompts",
        bank.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--epochs",
        "2",
        "--batch",
        "2",
        "--seed",
        "8",
    ]));
    assert_success(&run(&[
        "score",
        "--model",
        model.to_str().unwrap(),
        "--prompts",
        bank.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        scores.to_str().unwrap(),
    ]));
    assert_success(&run(&[
        "eval",
        "--scores",
        scores.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]));
    assert_success(&run(&[
        "sweep",
        "--model",
        model.to_str().unwrap(),
        "--prompts",
        bank.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--kinds",
        "mean-shift,jpeg",
        "--out",
        sweep.to_str().unwrap(),
        "--seed",
        "8",
    ]));

    // Artifacts exist and parse.
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed["plcc"].is_number());
    let scores = qalign_core::scoring::read_scores_csv(&scores).unwrap();
    assert_eq!(scores.len(), 6);
    let sweep_text = std::fs::read_to_string(&sweep).unwrap();
    assert_eq!(sweep_text.lines().count(), 1 + 2 * 5, "two kinds, five levels each");
    let history = std::fs::read_to_string(dir.path().join("model.qemb.history.csv")).unwrap();
    assert!(history.starts_with("epoch,batch,l_cons,l_pos,l_neg,total\n"));
    for meta in ["model.qemb.meta.json", "scores.csv.meta.json", "report.json.meta.json"] {
        let meta_json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(meta)).unwrap()).unwrap();
        assert!(meta_json["wall_time_seconds"].is_number());
        assert!(meta_json["config"]["tau"].is_number(), "config snapshot present");
    }
    let train_meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("model.qemb.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(train_meta["seed"], 8);
}

#[test]
fn config_file_is_used_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "dim = 8\nseed = 33\n").unwrap();
    let bank = dir.path().join("bank.qemb");
    assert_success(&run(&[
        "prompts",
        "--pairs",
        "2",
        "--config",
        config.to_str().unwrap(),
        "--out",
        bank.to_str().unwrap(),
    ]));
    let store = qalign_core::store::store_read(&bank).unwrap();
    assert_eq!(store.dim, 8, "dim comes from the config file");

    let bank2 = dir.path().join("bank2.qemb");
    assert_success(&run(&[
        "prompts",
        "--pairs",
        "2",
        "--config",
        config.to_str().unwrap(),
        "--dim",
        "12",
        "--out",
        bank2.to_str().unwrap(),
    ]));
    let store2 = qalign_core::store::store_read(&bank2).unwrap();
    assert_eq!(store2.dim, 12, "flag overrides the config file");

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    let output = run(&[
        "prompts",
        "--pairs",
        "2",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("x.qemb").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "unknown config keys fail loudly");
}
