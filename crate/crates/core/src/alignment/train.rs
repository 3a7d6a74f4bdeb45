//! Mini-batch training over degradation ladders, plus the finite-difference
//! gradient checker.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encoder::{backward, forward, ParamGrad, ToyEncoderParams};
use super::loss::{total_loss, LossBreakdown, LossTerm};
use super::{PromptAnchors, PromptBank, SimilarityGrid};
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::rng::derive_stream;
use crate::scalar::{cast, Scalar};

/// Optimizer and schedule settings for the toy encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Embedding dimension of the encoder (must match the prompt bank).
    pub dim: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            weight_decay: 1e-2,
            epochs: 10,
            batch_size: 16,
            dim: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::invalid("weight decay must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        if self.dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(())
    }
}

/// One stored crop, kept 8-bit to bound corpus memory.
#[derive(Debug, Clone)]
pub struct CropData {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl CropData {
    pub fn to_image<S: Scalar>(&self) -> ImageBuffer<S> {
        ImageBuffer::from_u8_rgb(self.width, self.height, &self.rgb)
            .expect("stored crop dimensions are consistent")
    }
}

/// One ladder loaded from a corpus directory: `levels[i]` holds the two
/// crops degraded at level `i + 1`.
#[derive(Debug, Clone)]
pub struct LoadedLadder {
    pub id: String,
    pub levels: Vec<[CropData; 2]>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub ladders: Vec<LoadedLadder>,
}

/// Loads every ladder directory under `dir` (sorted by id, so iteration
/// order never depends on filesystem enumeration).
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<LoadedCorpus> {
    let dir = dir.as_ref();
    let mut ids: Vec<String> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.path().is_dir() && entry.path().join("ladder.json").exists() {
            ids.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    ids.sort();
    let ladders = ids
        .par_iter()
        .map(|id| -> Result<LoadedLadder> {
            let ladder_dir = dir.join(id);
            let record: crate::sampling::LadderRecord = serde_json::from_str(
                &std::fs::read_to_string(ladder_dir.join("ladder.json"))
                    .map_err(|e| Error::io(ladder_dir.join("ladder.json"), e))?,
            )
            .map_err(|e| Error::format(ladder_dir.join("ladder.json"), e.to_string()))?;
            let mut levels = Vec::with_capacity(record.levels as usize);
            for level in 1..=record.levels {
                let load = |suffix: &str| -> Result<CropData> {
                    let path = ladder_dir.join(format!("level{level}_{suffix}.png"));
                    let img: ImageBuffer<f32> = crate::imaging::decode_image(&path)?;
                    Ok(CropData { width: img.width(), height: img.height(), rgb: img.to_u8_rgb() })
                };
                levels.push([load("a")?, load("b")?]);
            }
            Ok(LoadedLadder { id: id.clone(), levels })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedCorpus { ladders })
}

/// One history row per processed batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub batch: usize,
    pub l_cons: f64,
    pub l_pos: f64,
    pub l_neg: f64,
    pub total: f64,
}

/// Writes the loss history as CSV (`epoch,batch,l_cons,l_pos,l_neg,total`).
pub fn write_history_csv(path: impl AsRef<Path>, history: &[HistoryRow]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epoch,batch,l_cons,l_pos,l_neg,total\n");
    for row in history {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.epoch, row.batch, row.l_cons, row.l_pos, row.l_neg, row.total
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<S> {
    pub params: ToyEncoderParams<S>,
    pub history: Vec<HistoryRow>,
}

/// Forward + loss for one ladder. Returns the loss term and, when
/// `with_grad` is set, the parameter gradient.
fn ladder_loss<S: Scalar>(
    params: &ToyEncoderParams<S>,
    ladder: &LoadedLadder,
    anchors: &PromptAnchors<S>,
    loss_cfg: &super::LossConfig,
    with_grad: bool,
) -> Result<(LossTerm<S>, LossBreakdown<S>, Option<ParamGrad<S>>)> {
    let mut acts = Vec::with_capacity(ladder.levels.len());
    let mut embeddings = Vec::with_capacity(ladder.levels.len());
    for [a, b] in &ladder.levels {
        let fa = forward(params, &a.to_image::<S>())?;
        let fb = forward(params, &b.to_image::<S>())?;
        embeddings.push([fa.embedding(), fb.embedding()]);
        acts.push([fa, fb]);
    }
    let grid = SimilarityGrid::from_embeddings(&embeddings, anchors)?;
    let (term, breakdown) = total_loss(&grid, loss_cfg)?;
    if !term.value.is_finite() {
        return Err(Error::NonFiniteLoss { ladder_id: ladder.id.clone() });
    }
    let grad = if with_grad {
        let mut grads = ParamGrad::zeros(params.dim);
        for (i, [fa, fb]) in acts.iter().enumerate() {
            for (k, f) in [fa, fb].into_iter().enumerate() {
                // dL/dy = gp * anchor_p + gn * anchor_n
                let gp = term.grad.s_p[i][k];
                let gn = term.grad.s_n[i][k];
                let g_y: Vec<S> = anchors
                    .positive
                    .iter()
                    .zip(&anchors.negative)
                    .map(|(&p, &n)| gp * p + gn * n)
                    .collect();
                backward(params, f, &g_y, &mut grads);
            }
        }
        Some(grads)
    } else {
        None
    };
    Ok((term, breakdown, grad))
}

/// Trains the toy encoder with decoupled-weight-decay adaptive moments.
///
/// Each batch item is one ladder; the batch loss is the arithmetic mean of
/// per-ladder totals. Ladders are processed in parallel but accumulated in
/// index order, so results are identical for any worker count. A
/// non-finite loss aborts with the offending ladder id.
pub fn train<S: Scalar>(
    corpus: &LoadedCorpus,
    bank: &PromptBank<S>,
    loss_cfg: &super::LossConfig,
    train_cfg: &TrainConfig,
) -> Result<TrainOutcome<S>> {
    loss_cfg.validate()?;
    train_cfg.validate()?;
    if corpus.ladders.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    if bank.dim() != train_cfg.dim {
        return Err(Error::invalid(format!(
            "prompt bank dimension {} does not match encoder dimension {}",
            bank.dim(),
            train_cfg.dim
        )));
    }
    let anchors = bank.anchors();
    let mut params = ToyEncoderParams::<S>::init(train_cfg.dim, train_cfg.seed)?;

    // Adam moments over the flattened parameter vector.
    let n_params = params.param_count();
    let mut m = vec![S::zero(); n_params];
    let mut v = vec![S::zero(); n_params];
    let (beta1, beta2) = (cast::<S>(0.9), cast::<S>(0.999));
    let adam_eps = cast::<S>(1e-8);
    let lr = cast::<S>(train_cfg.learning_rate);
    let wd = cast::<S>(train_cfg.weight_decay);
    let mut step = 0u32;

    let mut history = Vec::new();
    for epoch in 0..train_cfg.epochs {
        let mut order: Vec<usize> = (0..corpus.ladders.len()).collect();
        let mut shuffle_rng = derive_stream(train_cfg.seed, &["train-shuffle", &epoch.to_string()]);
        order.shuffle(&mut shuffle_rng);

        for (batch_idx, chunk) in order.chunks(train_cfg.batch_size).enumerate() {
            let results: Vec<(LossBreakdown<S>, ParamGrad<S>)> = chunk
                .par_iter()
                .map(|&ladder_idx| {
                    let (_, breakdown, grad) =
                        ladder_loss(&params, &corpus.ladders[ladder_idx], &anchors, loss_cfg, true)?;
                    Ok((breakdown, grad.expect("gradients requested")))
                })
                .collect::<Result<Vec<_>>>()?;

            let batch_len = cast::<S>(chunk.len() as f64);
            let mut grad_sum = ParamGrad::zeros(train_cfg.dim);
            let (mut c, mut p, mut n, mut t) = (0.0f64, 0.0, 0.0, 0.0);
            for (breakdown, grad) in &results {
                grad_sum.add_assign(grad);
                c += breakdown.cons.to_f64().unwrap();
                p += breakdown.pos.to_f64().unwrap();
                n += breakdown.neg.to_f64().unwrap();
                t += breakdown.total.to_f64().unwrap();
            }
            grad_sum.scale(S::one() / batch_len);
            let denom = chunk.len() as f64;
            history.push(HistoryRow {
                epoch,
                batch: batch_idx,
                l_cons: c / denom,
                l_pos: p / denom,
                l_neg: n / denom,
                total: t / denom,
            });

            // AdamW step with decoupled weight decay.
            step += 1;
            let flat_grad = grad_sum.to_flat();
            let bias1 = S::one() - beta1.powi(step as i32);
            let bias2 = S::one() - beta2.powi(step as i32);
            for (i, &g) in flat_grad.iter().enumerate() {
                m[i] = beta1 * m[i] + (S::one() - beta1) * g;
                v[i] = beta2 * v[i] + (S::one() - beta2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                let theta = params.get_flat(i);
                params.set_flat(i, theta - lr * (m_hat / (v_hat.sqrt() + adam_eps) + wd * theta));
            }
        }
    }
    Ok(TrainOutcome { params, history })
}

/// Outcome of a finite-difference gradient check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub skipped_kinks: usize,
    pub warning: Option<String>,
}

/// Compares analytic parameter gradients against central finite
/// differences on `samples` randomly chosen parameters.
///
/// Relative error is `|a - n| / max(|a|, |n|, 1e-8)`. A parameter is
/// excluded when perturbing it moves any hinge argument across or within
/// `10 * epsilon` of its kink, where the loss is not differentiable.
pub fn grad_check<S: Scalar>(
    params: &ToyEncoderParams<S>,
    ladder: &LoadedLadder,
    bank: &PromptBank<S>,
    loss_cfg: &super::LossConfig,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    if !(1e-6..=1e-3).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must be in [1e-6, 1e-3], got {epsilon}")));
    }
    if samples == 0 {
        return Ok(GradCheckReport {
            max_rel_error: 0.0,
            checked: 0,
            skipped_kinks: 0,
            warning: Some("zero parameters requested; nothing was checked".into()),
        });
    }
    let anchors = bank.anchors();
    let (base_term, _, analytic) = ladder_loss(params, ladder, &anchors, loss_cfg, true)?;
    let analytic = analytic.expect("gradients requested").to_flat();
    let base_args: Vec<f64> =
        base_term.hinge_args.iter().map(|v| v.to_f64().unwrap()).collect();

    let eps = cast::<S>(epsilon);
    let mut rng = derive_stream(seed, &["grad-check"]);
    let n_params = params.param_count();
    let mut report =
        GradCheckReport { max_rel_error: 0.0, checked: 0, skipped_kinks: 0, warning: None };
    let mut work = params.clone();
    for _ in 0..samples {
        let idx = rng.gen_range(0..n_params);
        let original = work.get_flat(idx);

        work.set_flat(idx, original + eps);
        let (plus_term, _, _) = ladder_loss(&work, ladder, &anchors, loss_cfg, false)?;
        work.set_flat(idx, original - eps);
        let (minus_term, _, _) = ladder_loss(&work, ladder, &anchors, loss_cfg, false)?;
        work.set_flat(idx, original);

        let near_kink = base_args
            .iter()
            .zip(plus_term.hinge_args.iter().zip(&minus_term.hinge_args))
            .any(|(&h0, (&hp, &hn))| {
                let (hp, hn) = (hp.to_f64().unwrap(), hn.to_f64().unwrap());
                let influenced = (hp - hn).abs() > 0.0;
                let near = h0.abs() < 10.0 * epsilon || (hp > 0.0) != (hn > 0.0);
                influenced && near
            });
        if near_kink {
            report.skipped_kinks += 1;
            continue;
        }

        let numeric =
            (plus_term.value.to_f64().unwrap() - minus_term.value.to_f64().unwrap()) / (2.0 * epsilon);
        let a = analytic[idx].to_f64().unwrap();
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    }
    Ok(report)
}
