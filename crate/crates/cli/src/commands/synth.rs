//! Seeded synthetic pristine set: PNG images plus a manifest with a
//! deterministic pseudo-mos column (handy for exercising the evaluation
//! pipeline end to end).

use std::path::Path;

use qalign_core::error::{Error, Result};
use qalign_core::imaging::encode_image;
use qalign_core::procedural::synth_image;
use qalign_core::rng::derive_seed;
use qalign_core::sampling::{DatasetManifest, ManifestRow};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn run(cfg: &RunConfig, count: usize, size: usize, out: &Path) -> Result<()> {
    let meta = MetaWriter::start("synth");
    if size < 8 {
        return Err(Error::invalid("image size must be at least 8"));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let rows: Vec<ManifestRow> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<ManifestRow> {
            let id = format!("synth{i:05}");
            let image_seed = derive_seed(cfg.seed, &["synth", &id]);
            let img = synth_image::<f32>(size, size, image_seed);
            let path = out.join(format!("{id}.png"));
            encode_image(&path, &img)?;
            // Pseudo-mos in [1, 5], deterministic per id.
            let mos = 1.0 + 4.0 * (derive_seed(cfg.seed, &["synth-mos", &id]) % 10_000) as f64 / 9_999.0;
            Ok(ManifestRow { path: format!("{id}.png").into(), id, mos: Some(mos) })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest { rows };
    manifest.write_csv(out.join("manifest.csv"))?;
    eprintln!("synth: wrote {count} images to {}", out.display());
    meta.finish(out, cfg)
}
