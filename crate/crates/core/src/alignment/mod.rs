//! Quality-aware alignment: similarity grids over prompt anchors, the
//! three margin ranking losses, a small differentiable encoder, training,
//! and gradient checking.
//!
//! The objective reads a degradation ladder as implicit supervision. For a
//! ladder with levels `1..=L`, crops `k in {1, 2}`:
//!
//! - consistency: the two crops of a level have similar content and equal
//!   damage, so their prompt similarities may differ by at most `m_cons`;
//! - positive ranking: similarity to the positive anchors must *decrease*
//!   with the level by a margin `m_rank`;
//! - negative ranking: similarity to the negative anchors must *increase*
//!   with the level by the same margin.
//!
//! All three are hinge sums; subgradients at hinge kinks are defined as 0.

mod encoder;
mod loss;
mod train;

pub use encoder::{encode, Activations, ParamGrad, ToyEncoderParams};
pub use loss::{
    cosine_similarity, loss_consistency, loss_negative, loss_positive,
    loss_quality_ranking_variant, prompt_similarities, ranking_term_count, total_loss, GridGrad,
    LossBreakdown, LossTerm,
};
pub use train::{
    grad_check, load_corpus, train, write_history_csv, GradCheckReport, HistoryRow, LoadedCorpus,
    LoadedLadder, TrainConfig, TrainOutcome,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::store::EmbeddingStore;

/// Unit-norm feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<S> {
    values: Vec<S>,
}

impl<S: Scalar> Embedding<S> {
    /// Accepts a vector that is already unit-norm within 1e-6.
    pub fn from_unit(values: Vec<S>) -> Result<Self> {
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("embedding contains non-finite values"));
        }
        let norm = values.iter().map(|&v| v * v).sum::<S>().sqrt();
        if (norm.to_f64().unwrap() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("embedding norm {norm} is not 1 within 1e-6")));
        }
        Ok(Self { values })
    }

    /// Normalizes to unit length. A zero vector is perturbed by 1e-8 on the
    /// first coordinate before normalizing.
    pub fn normalized(mut values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("embedding must have at least one dimension"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("embedding contains non-finite values"));
        }
        let norm = values.iter().map(|&v| v * v).sum::<S>().sqrt();
        let norm = if norm == S::zero() {
            values[0] = cast(1e-8);
            cast(1e-8)
        } else {
            norm
        };
        // Idempotent: already-unit vectors pass through bit-exactly.
        if (norm.to_f64().unwrap() - 1.0).abs() > 1e-6 {
            for v in &mut values {
                *v = *v / norm;
            }
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    pub fn dot(&self, other: &[S]) -> S {
        self.values.iter().zip(other).map(|(&a, &b)| a * b).sum()
    }
}

/// One positive/negative prompt pair with its human-readable label.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptPair<S> {
    pub positive: Embedding<S>,
    pub negative: Embedding<S>,
    pub label: String,
}

/// The seven antonym prompt pairs used by default.
pub const DEFAULT_PROMPT_LABELS: [(&str, &str); 7] = [
    ("Good photo", "Bad photo"),
    ("Good picture", "Bad picture"),
    ("High-resolution image", "Low-resolution image"),
    ("High-quality image", "Low-quality image"),
    ("Sharp image", "Blurry image"),
    ("Sharp edges", "Blurry edges"),
    ("Noise-free image", "Noisy image"),
];

/// Bank of antonym prompt embeddings. Prompt features are inputs here
/// (computed offline or generated as seeded random unit vectors); this
/// crate never runs a text encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBank<S> {
    pub pairs: Vec<PromptPair<S>>,
}

impl<S: Scalar> PromptBank<S> {
    pub fn new(pairs: Vec<PromptPair<S>>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("prompt bank must contain at least one pair"));
        }
        let dim = pairs[0].positive.dim();
        for p in &pairs {
            if p.positive.dim() != dim || p.negative.dim() != dim {
                return Err(Error::invalid("prompt vectors must share one dimension"));
            }
        }
        Ok(Self { pairs })
    }

    /// Seeded random unit vectors standing in for text features.
    pub fn toy(pair_count: usize, dim: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        if pair_count == 0 {
            return Err(Error::invalid("prompt bank must contain at least one pair"));
        }
        let mut rng = crate::rng::derive_stream(seed, &["toy-prompt-bank"]);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<Embedding<S>> {
            let v: Vec<S> = (0..dim).map(|_| cast::<S>(rng.gen::<f64>() * 2.0 - 1.0)).collect();
            Embedding::normalized(v)
        };
        let mut pairs = Vec::with_capacity(pair_count);
        for i in 0..pair_count {
            let (pos_label, neg_label) = DEFAULT_PROMPT_LABELS[i % DEFAULT_PROMPT_LABELS.len()];
            let suffix =
                if i >= DEFAULT_PROMPT_LABELS.len() { format!(" #{}", i / DEFAULT_PROMPT_LABELS.len() + 1) } else { String::new() };
            pairs.push(PromptPair {
                positive: draw(&mut rng)?,
                negative: draw(&mut rng)?,
                label: format!("{pos_label} / {neg_label}{suffix}"),
            });
        }
        Self::new(pairs)
    }

    pub fn dim(&self) -> usize {
        self.pairs[0].positive.dim()
    }

    /// Mean positive and negative vectors. Means of unit vectors are not
    /// renormalized: the average similarity to the pairs equals the dot
    /// product with these anchors.
    pub fn anchors(&self) -> PromptAnchors<S> {
        let dim = self.dim();
        let mut positive = vec![S::zero(); dim];
        let mut negative = vec![S::zero(); dim];
        for pair in &self.pairs {
            for (acc, &v) in positive.iter_mut().zip(pair.positive.as_slice()) {
                *acc += v;
            }
            for (acc, &v) in negative.iter_mut().zip(pair.negative.as_slice()) {
                *acc += v;
            }
        }
        let n = cast::<S>(self.pairs.len() as f64);
        for v in positive.iter_mut().chain(negative.iter_mut()) {
            *v = *v / n;
        }
        PromptAnchors { positive, negative }
    }

    /// Serializes as alternating `pos|label` / `neg|label` rows.
    pub fn to_store(&self) -> EmbeddingStore {
        let dim = self.dim();
        let mut ids = Vec::with_capacity(self.pairs.len() * 2);
        let mut vectors = Vec::with_capacity(self.pairs.len() * 2 * dim);
        for (i, pair) in self.pairs.iter().enumerate() {
            ids.push(format!("pos|{i}|{}", pair.label));
            vectors.extend(pair.positive.as_slice().iter().map(|v| v.to_f64().unwrap() as f32));
            ids.push(format!("neg|{i}|{}", pair.label));
            vectors.extend(pair.negative.as_slice().iter().map(|v| v.to_f64().unwrap() as f32));
        }
        EmbeddingStore::new(ids, dim, vectors).expect("bank rows are consistent")
    }

    pub fn from_store(store: &EmbeddingStore) -> Result<Self> {
        if store.len() % 2 != 0 || store.is_empty() {
            return Err(Error::invalid(format!(
                "prompt bank store must hold alternating pos/neg rows, got {} rows",
                store.len()
            )));
        }
        let mut pairs = Vec::with_capacity(store.len() / 2);
        for i in 0..store.len() / 2 {
            let pos_id = &store.ids[2 * i];
            let neg_id = &store.ids[2 * i + 1];
            let label = pos_id
                .strip_prefix(&format!("pos|{i}|"))
                .ok_or_else(|| Error::invalid(format!("row {} should be `pos|{i}|<label>`, got `{pos_id}`", 2 * i)))?;
            if neg_id.strip_prefix(&format!("neg|{i}|")) != Some(label) {
                return Err(Error::invalid(format!(
                    "row {} should be `neg|{i}|{label}`, got `{neg_id}`",
                    2 * i + 1
                )));
            }
            let to_embedding = |row: &[f32]| {
                Embedding::normalized(row.iter().map(|&v| cast::<S>(v as f64)).collect())
            };
            pairs.push(PromptPair {
                positive: to_embedding(store.vector(2 * i))?,
                negative: to_embedding(store.vector(2 * i + 1))?,
                label: label.to_string(),
            });
        }
        Self::new(pairs)
    }
}

/// Averaged positive/negative prompt vectors (not unit-norm).
#[derive(Debug, Clone, PartialEq)]
pub struct PromptAnchors<S> {
    pub positive: Vec<S>,
    pub negative: Vec<S>,
}

/// Which operands feed the ranking hinges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossVariant {
    /// Rank raw prompt similarities (the standard objective).
    SimilarityRanking,
    /// Rank softmax quality scores derived from the similarities.
    QualityRanking,
}

/// Margins, loss weights, and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub m_cons: f64,
    pub m_rank: f64,
    pub lambda_cons: f64,
    pub lambda_pos: f64,
    pub lambda_neg: f64,
    pub tau: f64,
    pub variant: LossVariant,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            m_cons: 2.5e-3,
            m_rank: 6.75e-2,
            lambda_cons: 1.0,
            lambda_pos: 1.0,
            lambda_neg: 1.0,
            tau: 2.0,
            variant: LossVariant::SimilarityRanking,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_cons < 0.0 || self.m_rank < 0.0 {
            return Err(Error::invalid("margins must be non-negative"));
        }
        if self.lambda_cons < 0.0 || self.lambda_pos < 0.0 || self.lambda_neg < 0.0 {
            return Err(Error::invalid("loss weights must be non-negative"));
        }
        if !(self.tau > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        Ok(())
    }
}

/// Cosine similarities of each ladder crop to the prompt anchors:
/// `s_p[i][k]` and `s_n[i][k]` for level index `i` and crop `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGrid<S> {
    pub s_p: Vec<[S; 2]>,
    pub s_n: Vec<[S; 2]>,
}

impl<S: Scalar> SimilarityGrid<S> {
    pub fn new(s_p: Vec<[S; 2]>, s_n: Vec<[S; 2]>) -> Result<Self> {
        if s_p.len() != s_n.len() || s_p.is_empty() {
            return Err(Error::invalid("similarity grid needs equal, non-empty level lists"));
        }
        let ok = |v: S| v.is_finite() && v >= -S::one() && v <= S::one();
        if !s_p.iter().chain(&s_n).all(|row| ok(row[0]) && ok(row[1])) {
            return Err(Error::invalid("similarities must be finite and in [-1, 1]"));
        }
        Ok(Self { s_p, s_n })
    }

    /// Builds the grid from per-level crop embeddings and the bank anchors.
    pub fn from_embeddings(
        embeddings: &[[Embedding<S>; 2]],
        anchors: &PromptAnchors<S>,
    ) -> Result<Self> {
        let clamp = |v: S| v.min(S::one()).max(-S::one());
        let s_p = embeddings
            .iter()
            .map(|[a, b]| [clamp(a.dot(&anchors.positive)), clamp(b.dot(&anchors.positive))])
            .collect();
        let s_n = embeddings
            .iter()
            .map(|[a, b]| [clamp(a.dot(&anchors.negative)), clamp(b.dot(&anchors.negative))])
            .collect();
        Self::new(s_p, s_n)
    }

    pub fn levels(&self) -> usize {
        self.s_p.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_normalization_and_zero_guard() {
        let e = Embedding::<f64>::normalized(vec![3.0, 4.0]).unwrap();
        assert!((e.as_slice()[0] - 0.6).abs() < 1e-12);
        let z = Embedding::<f64>::normalized(vec![0.0, 0.0]).unwrap();
        assert_eq!(z.as_slice(), &[1.0, 0.0]);
        assert!(Embedding::<f64>::from_unit(vec![0.5, 0.5]).is_err());
        assert!(Embedding::<f64>::normalized(vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn toy_bank_has_unit_pairs_and_labels() {
        let bank = PromptBank::<f64>::toy(7, 32, 3).unwrap();
        assert_eq!(bank.pairs.len(), 7);
        assert_eq!(bank.dim(), 32);
        assert_eq!(bank.pairs[0].label, "Good photo / Bad photo");
        for p in &bank.pairs {
            let norm: f64 = p.positive.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bank_store_round_trip() {
        let bank = PromptBank::<f32>::toy(3, 16, 9).unwrap();
        let store = bank.to_store();
        let back = PromptBank::<f32>::from_store(&store).unwrap();
        assert_eq!(back, bank);
    }

    #[test]
    fn anchors_average_the_pairs() {
        let pos1 = Embedding::<f64>::from_unit(vec![1.0, 0.0]).unwrap();
        let pos2 = Embedding::<f64>::from_unit(vec![0.0, 1.0]).unwrap();
        let neg = Embedding::<f64>::from_unit(vec![-1.0, 0.0]).unwrap();
        let bank = PromptBank::new(vec![
            PromptPair { positive: pos1, negative: neg.clone(), label: "a".into() },
            PromptPair { positive: pos2, negative: neg, label: "b".into() },
        ])
        .unwrap();
        let anchors = bank.anchors();
        assert_eq!(anchors.positive, vec![0.5, 0.5]);
        assert_eq!(anchors.negative, vec![-1.0, 0.0]);
    }

    #[test]
    fn loss_config_validation() {
        assert!(LossConfig::default().validate().is_ok());
        assert!(LossConfig { tau: 0.0, ..Default::default() }.validate().is_err());
        assert!(LossConfig { m_cons: -1.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn grid_rejects_out_of_range_values() {
        assert!(SimilarityGrid::new(vec![[1.5, 0.0]], vec![[0.0, 0.0]]).is_err());
        assert!(SimilarityGrid::<f64>::new(vec![], vec![]).is_err());
    }
}
