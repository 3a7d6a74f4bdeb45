//! Join scores with opinion scores and compute SRCC / PLCC.

use std::collections::BTreeMap;
use std::path::Path;

use qalign_core::error::{Error, Result};
use qalign_core::evaluation::evaluate;
use qalign_core::scoring::read_scores_csv;

use crate::commands::{ensure_parent_dir, load_manifest};
use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn run(cfg: &RunConfig, scores_path: &Path, manifest_path: &Path, out: &Path) -> Result<()> {
    let meta = MetaWriter::start("eval");
    let scores = read_scores_csv(scores_path)?;
    let manifest = load_manifest(manifest_path)?;
    let mos: BTreeMap<&str, f64> = manifest
        .rows
        .iter()
        .filter_map(|row| row.mos.map(|m| (row.id.as_str(), m)))
        .collect();
    let items: Vec<(String, f64, f64)> = scores
        .iter()
        .map(|s| {
            let m = mos.get(s.image_id.as_str()).ok_or_else(|| {
                Error::invalid(format!("id `{}` has no mos in {}", s.image_id, manifest_path.display()))
            })?;
            Ok((s.image_id.clone(), s.q, *m))
        })
        .collect::<Result<Vec<_>>>()?;

    let report = evaluate(&items)?;
    ensure_parent_dir(out)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(out, json).map_err(|e| Error::io(out, e))?;
    println!("n={} srcc={} plcc={}", report.n, report.srcc, report.plcc);
    meta.finish(out, cfg)
}
