//! Acceptance suite: every release gate in one target, one pass/fail line
//! per criterion (run with `--nocapture` to see them).
//!
//! The heavyweight gate (criterion 3) trains the toy encoder on a
//! 150-ladder procedural corpus and sweeps all 24 distortions over 50
//! held-out images; expect a few minutes of wall time on one CPU core.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, UnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qalign_core::alignment::{
    grad_check, load_corpus, loss_consistency, loss_negative, loss_positive, ranking_term_count,
    total_loss, train, CropData, LoadedLadder, LossConfig, LossVariant, PromptBank,
    SimilarityGrid, ToyEncoderParams, TrainConfig,
};
use qalign_core::degradations::{apply_distortion, DistortionKind, IntensityLevel};
use qalign_core::evaluation::{fit_logistic, gmad_select, intensity_sweep, plcc, srcc, GmadPair, LogisticParams};
use qalign_core::imaging::psnr;
use qalign_core::procedural::{reference_images, synth_image};
use qalign_core::sampling::{generate_corpus, DatasetManifest, LadderConfig, ManifestRow};
use qalign_core::scoring::{quality_score, score_image};

fn criterion(number: u8, name: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("ACCEPTANCE {number} ({name}): PASS"),
        Err(payload) => {
            println!("ACCEPTANCE {number} ({name}): FAIL");
            std::panic::resume_unwind(payload);
        }
    }
}

/// In-memory ladder from one synthetic image, used by the gradient checks.
fn toy_ladder(seed: u64, size: usize) -> LoadedLadder {
    let base = synth_image::<f32>(size + 16, size + 16, seed);
    let a = base.crop(0, 0, size, size).unwrap();
    let b = base.crop(16, 16, size, size).unwrap();
    let kind = DistortionKind::ALL[(seed as usize) % DistortionKind::ALL.len()];
    let levels = IntensityLevel::all()
        .map(|level| {
            let to_crop = |img: &qalign_core::ImageF32| CropData {
                width: img.width(),
                height: img.height(),
                rgb: img.to_u8_rgb(),
            };
            [
                to_crop(&apply_distortion(&a, kind, level, seed).unwrap()),
                to_crop(&apply_distortion(&b, kind, level, seed).unwrap()),
            ]
        })
        .collect();
    LoadedLadder { id: format!("acc-{seed}"), levels }
}

#[test]
fn criterion_1_loss_arithmetic() {
    criterion(1, "loss arithmetic", || {
        // Consistency: one level, positive gap 0.01, margin 2.5e-3.
        let g = SimilarityGrid::new(vec![[0.30, 0.29]], vec![[0.10, 0.10]]).unwrap();
        assert!((loss_consistency(&g, 2.5e-3).value - 0.0075f64).abs() < 1e-9);

        // Positive ranking violated by 0.05 at every one of 4 terms.
        let g = SimilarityGrid::new(
            vec![[0.45, 0.45], [0.50, 0.50]],
            vec![[0.0, 0.0], [0.0, 0.0]],
        )
        .unwrap();
        assert!((loss_positive(&g, 0.0675).value - 0.47f64).abs() < 1e-9);

        // Constant negative similarities: all 40 hinges active at the margin.
        let g = SimilarityGrid::new(vec![[0.0, 0.0]; 5], vec![[0.25, 0.25]; 5]).unwrap();
        assert!((loss_negative(&g, 0.0675).value - 2.7f64).abs() < 1e-9);

        // Term count for five levels.
        assert_eq!(ranking_term_count(5), 40);
        assert_eq!(loss_positive(&g, 0.0675).hinge_args.len(), 40);
    });
}

#[test]
fn criterion_2_gradient_correctness() {
    criterion(2, "gradient correctness", || {
        let mut worst = 0.0f64;
        for draw in 0..20u64 {
            let params = ToyEncoderParams::<f64>::init(16, 1000 + draw).unwrap();
            let ladder = toy_ladder(2000 + draw, 56);
            let bank = PromptBank::<f64>::toy(3, 16, 3000 + draw).unwrap();
            let cfg = LossConfig::default();
            let report =
                grad_check(&params, &ladder, &bank, &cfg, 1e-4, 200, 4000 + draw).unwrap();
            assert!(report.checked >= 150, "draw {draw}: only {} checked", report.checked);
            worst = worst.max(report.max_rel_error);
        }
        assert!(worst < 1e-3, "max relative error {worst}");
    });
}

#[test]
fn criterion_3_trained_scores_track_severity() {
    criterion(3, "trained encoder tracks severity", || {
        let dir = tempfile::tempdir().unwrap();
        let image_dir = dir.path().join("imgs");
        std::fs::create_dir_all(&image_dir).unwrap();

        // 200 procedural pristine images; 150 train, 50 held out.
        let mut rows = Vec::new();
        let mut heldout = Vec::new();
        for i in 0..200u64 {
            let id = format!("img{i:03}");
            let img = synth_image::<f32>(256, 256, 0xF16_0000 + i);
            if i < 150 {
                let path = image_dir.join(format!("{id}.png"));
                qalign_core::imaging::encode_image(&path, &img).unwrap();
                rows.push(ManifestRow { path, id, mos: None });
            } else {
                heldout.push((id, img));
            }
        }
        let ladder_cfg = LadderConfig { seed: 11, ..LadderConfig::default() };
        let corpus_dir = dir.path().join("corpus");
        let summary =
            generate_corpus::<f32>(&DatasetManifest { rows }, &ladder_cfg, &corpus_dir).unwrap();
        assert_eq!((summary.processed, summary.failed), (150, 0));

        // Margins, weights, temperature, and batch size at their defaults;
        // learning rate is the toy-scale knob.
        let bank = PromptBank::<f32>::toy(7, 32, 21).unwrap();
        let loss_cfg = LossConfig::default();
        let train_cfg = TrainConfig {
            epochs: 10,
            batch_size: 16,
            dim: 32,
            seed: 31,
            learning_rate: 1e-2,
            weight_decay: 1e-2,
        };
        let corpus = load_corpus(&corpus_dir).unwrap();
        let outcome = train(&corpus, &bank, &loss_cfg, &train_cfg).unwrap();
        drop(corpus);

        let params = outcome.params;
        let report = intensity_sweep(
            |degraded: &qalign_core::ImageF32, _pristine: &qalign_core::ImageF32| {
                Ok(score_image(&params, degraded, &bank, loss_cfg.tau, "cell")?.q)
            },
            &heldout,
            &DistortionKind::ALL,
            0xACC3,
        )
        .unwrap();

        let mut mean = 0.0;
        for k in &report.per_kind {
            assert!(!k.degenerate, "{} produced constant scores", k.kind.name());
            assert!(
                k.srcc <= -0.6,
                "{}: SRCC(level, mean q) = {} exceeds -0.6",
                k.kind.name(),
                k.srcc
            );
            mean += k.srcc;
        }
        mean /= report.per_kind.len() as f64;
        assert!(mean <= -0.9, "mean per-kind SRCC {mean} exceeds -0.9");
    });
}

#[test]
fn criterion_4_degradation_severity() {
    criterion(4, "monotone degradation severity", || {
        let references = reference_images::<f32>();
        for kind in DistortionKind::ALL {
            for (idx, img) in references.iter().enumerate() {
                let seed = 1000 + idx as u64;
                let mut previous = f64::INFINITY;
                for level in IntensityLevel::all() {
                    let degraded = apply_distortion(img, kind, level, seed).unwrap();
                    let db = psnr(img, &degraded).unwrap() as f64;
                    assert!(
                        db <= previous + 0.1,
                        "{} level {} on image {idx}: {db:.3} dB after {previous:.3} dB",
                        kind.name(),
                        level.get()
                    );
                    previous = db;
                }
            }
        }
    });
}

#[test]
fn criterion_5_metric_oracles() {
    criterion(5, "metric oracles", || {
        // SRCC against the rank-distance formula on tie-free vectors.
        use rand::Rng;
        let mut rng = qalign_core::rng::derive_stream(5, &["acceptance-srcc"]);
        for _ in 0..100 {
            let n = rng.gen_range(3..50);
            let pred: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let mos: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let rank = |v: &[f64]| -> Vec<f64> {
                let mut idx: Vec<usize> = (0..v.len()).collect();
                idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
                let mut out = vec![0.0; v.len()];
                for (r, &i) in idx.iter().enumerate() {
                    out[i] = (r + 1) as f64;
                }
                out
            };
            let (rp, rm) = (rank(&pred), rank(&mos));
            let d2: f64 = rp.iter().zip(&rm).map(|(a, b)| (a - b) * (a - b)).sum();
            let nf = n as f64;
            let oracle = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
            assert!((srcc(&pred, &mos).unwrap() - oracle).abs() < 1e-12);
        }

        // Logistic fit recovers planted parameters.
        let truth = LogisticParams { beta1: 5.0, beta2: 1.0, beta3: 0.5, beta4: 0.1 };
        let pred: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
        let mos: Vec<f64> = pred.iter().map(|&x| truth.apply(x)).collect();
        let fit = fit_logistic(&pred, &mos).unwrap();
        for (got, want) in [
            (fit.params.beta1, truth.beta1),
            (fit.params.beta2, truth.beta2),
            (fit.params.beta3, truth.beta3),
            (fit.params.beta4.abs(), truth.beta4),
        ] {
            assert!((got - want).abs() / want.abs() < 1e-3, "{got} vs {want}");
        }

        // PLCC on noiseless logistic data.
        let rho = plcc(&pred, &mos).unwrap();
        assert!((rho - 1.0).abs() < 1e-6, "plcc {rho}");
    });
}

#[test]
fn criterion_6_quality_score_properties() {
    criterion(6, "quality score properties", || {
        for tau in [0.5, 1.0, 2.0, 17.0] {
            assert_eq!(quality_score(0.3, 0.3, tau).unwrap(), 0.5);
        }
        assert!((quality_score(1.0, 0.0, 2.0).unwrap() - 0.62246).abs() < 1e-5);
        use rand::Rng;
        let mut rng = qalign_core::rng::derive_stream(6, &["acceptance-q"]);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            let q = quality_score(a, b, 2.0).unwrap();
            let swapped = quality_score(b, a, 2.0).unwrap();
            assert!((q - (1.0 - swapped)).abs() < 1e-12);
        }
    });
}

#[test]
fn criterion_7_gmad_matches_brute_force() {
    criterion(7, "gmad brute-force parity", || {
        use rand::Rng;
        for seed in 0..20u64 {
            let mut rng = qalign_core::rng::derive_stream(seed, &["acceptance-gmad"]);
            let defender: Vec<(String, f64)> =
                (0..1000).map(|i| (format!("it{i:04}"), rng.gen::<f64>())).collect();
            let attacker: Vec<(String, f64)> =
                (0..1000).map(|i| (format!("it{i:04}"), rng.gen::<f64>())).collect();
            let fast = gmad_select(&defender, &attacker, 2, 0.05).unwrap();
            let slow = gmad_brute_force(&defender, &attacker, 2, 0.05);
            for (band, expected) in fast.bands.iter().zip(slow) {
                assert_eq!(band.pair, expected, "seed {seed}");
            }
        }
    });
}

/// Exhaustive O(n^2) pair maximization with the shipped tie-break rule.
fn gmad_brute_force(
    defender: &[(String, f64)],
    attacker: &[(String, f64)],
    levels: usize,
    band_width: f64,
) -> Vec<Option<GmadPair>> {
    let attacker_by_id: BTreeMap<&str, f64> =
        attacker.iter().map(|(id, q)| (id.as_str(), *q)).collect();
    let mut order: Vec<usize> = (0..defender.len()).collect();
    order.sort_by(|&i, &j| {
        defender[i].1.partial_cmp(&defender[j].1).unwrap().then_with(|| defender[i].0.cmp(&defender[j].0))
    });
    let n = defender.len() as f64;
    let mut out = Vec::new();
    for k in 0..levels {
        let anchor = (k as f64 + 0.5) / levels as f64;
        let members: Vec<&String> = order
            .iter()
            .enumerate()
            .filter(|(rank, _)| {
                let q = (*rank as f64 + 0.5) / n;
                q >= anchor - band_width / 2.0 && q <= anchor + band_width / 2.0
            })
            .map(|(_, &idx)| &defender[idx].0)
            .collect();
        if members.len() < 2 {
            out.push(None);
            continue;
        }
        let mut best: Option<GmadPair> = None;
        for a in &members {
            for b in &members {
                let (low, high) = if attacker_by_id[a.as_str()] <= attacker_by_id[b.as_str()] {
                    (a, b)
                } else {
                    (b, a)
                };
                let gap = attacker_by_id[high.as_str()] - attacker_by_id[low.as_str()];
                let candidate = GmadPair {
                    image_id_low: (*low).clone(),
                    image_id_high: (*high).clone(),
                    attacker_gap: gap,
                };
                let better = match &best {
                    None => true,
                    Some(b0) => {
                        gap > b0.attacker_gap
                            || (gap == b0.attacker_gap
                                && (candidate.image_id_low.as_str(), candidate.image_id_high.as_str())
                                    < (b0.image_id_low.as_str(), b0.image_id_high.as_str()))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }
        out.push(best);
    }
    out
}

// ---------------------------------------------------------------------------
// Criteria 8 and 9 exercise the shipped binary.

fn bin(args: &[&str]) -> Output {
    let output =
        Command::new(env!("CARGO_BIN_EXE_qalign")).args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "qalign {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

/// Runs corpus -> train -> score -> eval into `root`, returning the bytes
/// of every primary artifact (metadata sidecars excluded), keyed by
/// relative path.
fn pipeline(root: &Path, manifest: &Path, bank: &Path, jobs: &str) -> BTreeMap<PathBuf, Vec<u8>> {
    let corpus = root.join("corpus");
    let model = root.join("model.qemb");
    let scores = root.join("scores.csv");
    let report = root.join("report.json");
    bin(&[
        "corpus", "--manifest", manifest.to_str().unwrap(), "--out", corpus.to_str().unwrap(),
        "--patch-size", "64", "--seed", "17", "--jobs", jobs,
    ]);
    bin(&[
        "train", "--corpus", corpus.to_str().unwrap(), "--prompts", bank.to_str().unwrap(),
        "--out", model.to_str().unwrap(), "--epochs", "2", "--batch", "4", "--seed", "17",
        "--jobs", jobs,
    ]);
    bin(&[
        "score", "--model", model.to_str().unwrap(), "--prompts", bank.to_str().unwrap(),
        "--manifest", manifest.to_str().unwrap(), "--out", scores.to_str().unwrap(),
        "--jobs", jobs,
    ]);
    bin(&[
        "eval", "--scores", scores.to_str().unwrap(), "--manifest", manifest.to_str().unwrap(),
        "--out", report.to_str().unwrap(),
    ]);

    let mut artifacts = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if !path.to_string_lossy().ends_with(".meta.json") {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                artifacts.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    artifacts
}

#[test]
fn criterion_8_pipeline_determinism() {
    criterion(8, "pipeline determinism", || {
        let dir = tempfile::tempdir().unwrap();
        let imgs = dir.path().join("imgs");
        let bank = dir.path().join("bank.qemb");
        bin(&["synth", "--count", "6", "--size", "96", "--seed", "17", "--out", imgs.to_str().unwrap()]);
        bin(&["prompts", "--pairs", "3", "--dim", "16", "--seed", "17", "--out", bank.to_str().unwrap()]);
        let manifest = imgs.join("manifest.csv");

        let run1 = dir.path().join("run1");
        let run2 = dir.path().join("run2");
        let run3 = dir.path().join("run3");
        std::fs::create_dir_all(&run1).unwrap();
        std::fs::create_dir_all(&run2).unwrap();
        std::fs::create_dir_all(&run3).unwrap();
        let a = pipeline(&run1, &manifest, &bank, "1");
        let b = pipeline(&run2, &manifest, &bank, "1");
        let c = pipeline(&run3, &manifest, &bank, "8");

        assert_eq!(a.len(), b.len());
        assert!(a.keys().any(|k| k.to_string_lossy().ends_with("report.json")));
        for (rel, bytes) in &a {
            assert_eq!(Some(bytes), b.get(rel).as_deref(), "{rel:?} differs between identical runs");
            assert_eq!(Some(bytes), c.get(rel).as_deref(), "{rel:?} differs between --jobs 1 and 8");
        }
    });
}

#[test]
fn criterion_9_ablation_configs_run_and_differ() {
    criterion(9, "ablation plumbing", || {
        let dir = tempfile::tempdir().unwrap();
        let imgs = dir.path().join("imgs");
        let bank = dir.path().join("bank.qemb");
        bin(&["synth", "--count", "8", "--size", "96", "--seed", "23", "--out", imgs.to_str().unwrap()]);
        bin(&["prompts", "--pairs", "3", "--dim", "16", "--seed", "23", "--out", bank.to_str().unwrap()]);
        let manifest = imgs.join("manifest.csv");

        let mut histories = Vec::new();
        let variants: [(&str, &[&str], &[&str]); 4] = [
            ("default", &[], &[]),
            ("d2", &["--distortions", "2"], &[]),
            ("l3", &["--levels", "3"], &[]),
            ("quality", &[], &["--variant", "quality-ranking"]),
        ];
        for (name, corpus_extra, train_extra) in variants {
            let corpus = dir.path().join(format!("corpus-{name}"));
            let model = dir.path().join(format!("model-{name}.qemb"));
            let mut corpus_args = vec![
                "corpus", "--manifest", manifest.to_str().unwrap(), "--out",
                corpus.to_str().unwrap(), "--patch-size", "64", "--seed", "23",
            ];
            corpus_args.extend_from_slice(corpus_extra);
            bin(&corpus_args);
            let mut train_args = vec![
                "train", "--corpus", corpus.to_str().unwrap(), "--prompts", bank.to_str().unwrap(),
                "--out", model.to_str().unwrap(), "--epochs", "2", "--batch", "4", "--seed", "23",
            ];
            train_args.extend_from_slice(train_extra);
            bin(&train_args);
            let history_path = dir.path().join(format!("model-{name}.qemb.history.csv"));
            histories.push((name, std::fs::read_to_string(history_path).unwrap()));
        }
        let (baseline_name, baseline) = &histories[0];
        assert_eq!(*baseline_name, "default");
        for (name, history) in &histories[1..] {
            assert_ne!(history, baseline, "{name} history should differ from the default run");
            assert!(history.lines().count() > 1, "{name} produced an empty history");
        }
    });
}
