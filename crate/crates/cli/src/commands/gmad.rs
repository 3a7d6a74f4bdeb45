//! Maximum-differentiation pair selection between two score files.

use std::path::Path;

use qalign_core::error::{Error, Result};
use qalign_core::evaluation::gmad_select;
use qalign_core::scoring::read_scores_csv;

use crate::commands::ensure_parent_dir;
use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn run(cfg: &RunConfig, defender: &Path, attacker: &Path, out: &Path) -> Result<()> {
    let meta = MetaWriter::start("gmad");
    let read = |path: &Path| -> Result<Vec<(String, f64)>> {
        Ok(read_scores_csv(path)?.into_iter().map(|s| (s.image_id, s.q)).collect())
    };
    let selection = read(defender).and_then(|d| {
        let a = read(attacker)?;
        gmad_select(&d, &a, cfg.gmad_levels, cfg.band_width)
    })?;
    ensure_parent_dir(out)?;
    let json = serde_json::to_string_pretty(&selection).expect("selection serializes");
    std::fs::write(out, json).map_err(|e| Error::io(out, e))?;
    for band in &selection.bands {
        match &band.pair {
            Some(pair) => println!(
                "band@{:.2}: {} .. {} gap={}",
                band.anchor_quantile, pair.image_id_low, pair.image_id_high, pair.attacker_gap
            ),
            None => println!("band@{:.2}: empty ({} members)", band.anchor_quantile, band.member_count),
        }
    }
    meta.finish(out, cfg)
}
