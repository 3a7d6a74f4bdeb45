//! Intensity sweep: degrade manifest images at every (kind, level) and
//! report how scores track severity.

use std::path::Path;

use qalign_core::alignment::{PromptBank, ToyEncoderParams};
use qalign_core::degradations::DistortionKind;
use qalign_core::error::{Error, Result};
use qalign_core::evaluation::{intensity_sweep, write_sweep_csv};
use qalign_core::imaging::decode_image;
use qalign_core::scoring::score_image;
use qalign_core::store::store_read;
use qalign_core::ImageF32;

use crate::commands::{ensure_parent_dir, load_manifest};
use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn parse_kinds(raw: &str) -> Result<Vec<DistortionKind>> {
    if raw == "all" {
        return Ok(DistortionKind::ALL.to_vec());
    }
    raw.split(',').map(|name| DistortionKind::parse(name.trim())).collect()
}

pub fn run(
    cfg: &RunConfig,
    model: &Path,
    prompts: &Path,
    manifest_path: &Path,
    kinds_raw: &str,
    out: &Path,
) -> Result<()> {
    let meta = MetaWriter::start("sweep");
    let kinds = parse_kinds(kinds_raw)?;
    let bank = PromptBank::<f32>::from_store(&store_read(prompts)?)?;
    let params = ToyEncoderParams::<f32>::load(model)?;
    if params.dim != bank.dim() {
        return Err(Error::invalid(format!(
            "model dim {} does not match prompt bank dim {}",
            params.dim,
            bank.dim()
        )));
    }
    let manifest = load_manifest(manifest_path)?;
    let pristine: Vec<(String, ImageF32)> = manifest
        .rows
        .iter()
        .map(|row| Ok((row.id.clone(), decode_image(&row.path)?)))
        .collect::<Result<Vec<_>>>()?;

    let tau = cfg.tau;
    let report = intensity_sweep(
        |degraded: &ImageF32, _pristine: &ImageF32| {
            Ok(score_image(&params, degraded, &bank, tau, "cell")?.q)
        },
        &pristine,
        &kinds,
        cfg.seed,
    )?;
    ensure_parent_dir(out)?;
    write_sweep_csv(out, &report)?;
    for k in &report.per_kind {
        println!("{} srcc={}{}", k.kind.name(), k.srcc, if k.degenerate { " (degenerate)" } else { "" });
    }
    let mean: f64 =
        report.per_kind.iter().map(|k| k.srcc).sum::<f64>() / report.per_kind.len() as f64;
    println!("mean_srcc={mean}");
    meta.finish(out, cfg)
}
