//! Degradation-ladder corpus generation.

use std::path::Path;

use qalign_core::error::Result;
use qalign_core::sampling::generate_corpus;

use crate::commands::load_manifest;
use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn run(cfg: &RunConfig, manifest_path: &Path, out: &Path) -> Result<()> {
    let meta = MetaWriter::start("corpus");
    let manifest = load_manifest(manifest_path)?;
    let summary = generate_corpus::<f32>(&manifest, &cfg.ladder_config(), out)?;
    println!("processed={} failed={}", summary.processed, summary.failed);
    meta.finish(out, cfg)
}
