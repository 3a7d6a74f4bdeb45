//! Toy prompt bank generation: seeded random unit vectors standing in for
//! offline text-encoder exports (which use the same store format).

use std::path::Path;

use qalign_core::alignment::PromptBank;
use qalign_core::error::Result;
use qalign_core::store::store_write;

use crate::commands::ensure_parent_dir;
use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn run(cfg: &RunConfig, pairs: usize, out: &Path) -> Result<()> {
    let meta = MetaWriter::start("prompts");
    let bank = PromptBank::<f32>::toy(pairs, cfg.dim, cfg.seed)?;
    ensure_parent_dir(out)?;
    store_write(out, &bank.to_store())?;
    eprintln!("prompts: wrote {pairs} pairs of dim {} to {}", cfg.dim, out.display());
    meta.finish(out, cfg)
}
