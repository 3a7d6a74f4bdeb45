//! Score images or precomputed embeddings against a prompt bank.

use std::path::Path;

use qalign_core::alignment::{PromptBank, ToyEncoderParams};
use qalign_core::error::{Error, Result};
use qalign_core::imaging::decode_image;
use qalign_core::scoring::{score_image, score_store, write_scores_csv, QualityScore};
use qalign_core::store::store_read;
use qalign_core::ImageF32;
use rayon::prelude::*;

use crate::commands::{ensure_parent_dir, load_manifest};
use crate::config::RunConfig;
use crate::meta::MetaWriter;

#[allow(clippy::too_many_arguments)]
pub fn run(
    cfg: &RunConfig,
    model: Option<&Path>,
    prompts: &Path,
    manifest: Option<&Path>,
    inputs: &[std::path::PathBuf],
    store: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let meta = MetaWriter::start("score");
    let bank = PromptBank::<f32>::from_store(&store_read(prompts)?)?;

    let scores: Vec<QualityScore> = if let Some(store_path) = store {
        // Precomputed embeddings: no model needed.
        score_store(&store_read(store_path)?, &bank, cfg.tau, None)?
    } else {
        let model_path = model.ok_or_else(|| {
            Error::invalid("--model is required when scoring images (omit it only with --store)")
        })?;
        let params = ToyEncoderParams::<f32>::load(model_path)?;
        if params.dim != bank.dim() {
            return Err(Error::invalid(format!(
                "model dim {} does not match prompt bank dim {}",
                params.dim,
                bank.dim()
            )));
        }
        let items: Vec<(String, std::path::PathBuf)> = if let Some(manifest_path) = manifest {
            load_manifest(manifest_path)?
                .rows
                .into_iter()
                .map(|row| (row.id, row.path))
                .collect()
        } else if !inputs.is_empty() {
            inputs
                .iter()
                .map(|p| {
                    let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    (id, p.clone())
                })
                .collect()
        } else {
            return Err(Error::invalid("provide --manifest, --input, or --store to name what to score"));
        };
        items
            .par_iter()
            .map(|(id, path)| {
                let img: ImageF32 = decode_image(path)?;
                score_image(&params, &img, &bank, cfg.tau, id)
            })
            .collect::<Result<Vec<_>>>()?
    };

    ensure_parent_dir(out)?;
    let written = write_scores_csv(out, &scores)?;
    println!("scored={written}");
    meta.finish(out, cfg)
}
