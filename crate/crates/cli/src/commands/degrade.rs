//! Apply one distortion at one level; print the PSNR cost to stdout.

use std::path::Path;

use qalign_core::degradations::{apply_distortion, DistortionKind, IntensityLevel};
use qalign_core::imaging::{decode_image, encode_image, psnr};
use qalign_core::{error::Result, ImageF32};

use crate::commands::ensure_parent_dir;
use crate::config::RunConfig;
use crate::meta::MetaWriter;

pub fn run(cfg: &RunConfig, input: &Path, kind: &str, level: u8, out: &Path) -> Result<()> {
    let meta = MetaWriter::start("degrade");
    let kind = DistortionKind::parse(kind)?;
    let level = IntensityLevel::new(level)?;
    let img: ImageF32 = decode_image(input)?;
    let degraded = apply_distortion(&img, kind, level, cfg.seed)?;
    ensure_parent_dir(out)?;
    encode_image(out, &degraded)?;
    println!("{}", psnr(&img, &degraded)?);
    meta.finish(out, cfg)
}
