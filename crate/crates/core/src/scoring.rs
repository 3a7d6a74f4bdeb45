//! Inference-time quality scoring: a softmax over the mean positive and
//! negative prompt similarities.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alignment::{encode, prompt_similarities, Embedding, PromptBank, ToyEncoderParams};
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::scalar::Scalar;
use crate::store::EmbeddingStore;

/// Score of one image: `q = sigmoid((s_p - s_n) / tau)` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub image_id: String,
    pub s_p: f64,
    pub s_n: f64,
    pub q: f64,
}

/// Softmax of the two similarities with temperature `tau`:
/// `e^{s_p/tau} / (e^{s_p/tau} + e^{s_n/tau})`, evaluated in the
/// numerically stable logistic form `sigmoid((s_p - s_n) / tau)`.
pub fn quality_score(s_p: f64, s_n: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("temperature must be positive, got {tau}")));
    }
    let z = (s_p - s_n) / tau;
    Ok(if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    })
}

/// Scores a whole image (no cropping at inference): encode, average the
/// prompt similarities, apply the softmax.
pub fn score_image<S: Scalar>(
    params: &ToyEncoderParams<S>,
    img: &ImageBuffer<S>,
    bank: &PromptBank<S>,
    tau: f64,
    image_id: &str,
) -> Result<QualityScore> {
    let embedding = encode(params, img)?;
    score_embedding(&embedding, bank, tau, image_id)
}

/// Scores a precomputed embedding.
pub fn score_embedding<S: Scalar>(
    embedding: &Embedding<S>,
    bank: &PromptBank<S>,
    tau: f64,
    image_id: &str,
) -> Result<QualityScore> {
    let (s_p, s_n) = prompt_similarities(embedding, bank)?;
    let (s_p, s_n) = (s_p.to_f64().unwrap(), s_n.to_f64().unwrap());
    Ok(QualityScore { image_id: image_id.to_string(), s_p, s_n, q: quality_score(s_p, s_n, tau)? })
}

/// Scores every embedding in a store by id (or a subset). Returns a
/// not-found error if `only` names an id missing from the store.
pub fn score_store<S: Scalar>(
    store: &EmbeddingStore,
    bank: &PromptBank<S>,
    tau: f64,
    only: Option<&[String]>,
) -> Result<Vec<QualityScore>> {
    let ids: Vec<String> = match only {
        Some(subset) => {
            for id in subset {
                if store.find(id).is_none() {
                    return Err(Error::NotFound(format!("embedding id `{id}`")));
                }
            }
            subset.to_vec()
        }
        None => store.ids.clone(),
    };
    ids.iter()
        .map(|id| {
            let row =
                store.find(id).ok_or_else(|| Error::NotFound(format!("embedding id `{id}`")))?;
            let values: Vec<S> = row.iter().map(|&v| crate::scalar::cast::<S>(v as f64)).collect();
            let embedding = Embedding::normalized(values)?;
            score_embedding(&embedding, bank, tau, id)
        })
        .collect()
}

/// Writes scores as CSV (`id,s_p,s_n,q`, shortest round-trip decimal).
/// Returns the number of rows written.
pub fn write_scores_csv(path: impl AsRef<Path>, scores: &[QualityScore]) -> Result<usize> {
    let path = path.as_ref();
    let mut out = String::from("id,s_p,s_n,q\n");
    for s in scores {
        out.push_str(&format!("{},{},{},{}\n", s.image_id, s.s_p, s.s_n, s.q));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
    Ok(scores.len())
}

/// Reads a scores CSV produced by [`write_scores_csv`].
pub fn read_scores_csv(path: impl AsRef<Path>) -> Result<Vec<QualityScore>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::format(path, format!("short row {record:?}")))
        };
        let parse = |raw: &str| -> Result<f64> {
            raw.parse().map_err(|_| Error::format(path, format!("bad number `{raw}`")))
        };
        out.push(QualityScore {
            image_id: field(0)?.to_string(),
            s_p: parse(field(1)?)?,
            s_n: parse(field(2)?)?,
            q: parse(field(3)?)?,
        });
    }
    Ok(out)
}
