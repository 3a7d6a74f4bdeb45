//! Training-sample construction: overlapping crop pairs, degradation
//! ladders, and corpus generation from a dataset manifest.
//!
//! A ladder takes one pristine image, extracts two overlapping crops, and
//! applies the same distortion chain to both at every intensity level. The
//! two crops of an entry share content and damage; entries are ordered by
//! strictly increasing severity. That ordering is the only supervision the
//! training loop uses.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degradations::{apply_distortion, DistortionGroup, DistortionKind, IntensityLevel};
use crate::error::{Error, Result};
use crate::imaging::{decode_image, encode_image, resample, ImageBuffer, ResampleMethod};
use crate::rng::{derive_seed, derive_stream};
use crate::scalar::Scalar;

/// Configuration for ladder construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    /// Square crop side in pixels.
    pub patch_size: usize,
    /// Number of intensity levels per ladder (2..=5).
    pub levels: u8,
    /// Number of sequential distortions applied to each crop (1..=7).
    pub distortions: u8,
    /// Minimum IoU between the two crops of a pair.
    pub min_overlap: f64,
    /// Base seed for all derived streams.
    pub seed: u64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self { patch_size: 224, levels: 5, distortions: 1, min_overlap: 0.25, seed: 0 }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 {
            return Err(Error::invalid("patch size must be positive"));
        }
        if !(2..=IntensityLevel::MAX).contains(&self.levels) {
            return Err(Error::invalid(format!(
                "level count must be in 2..={}, got {}",
                IntensityLevel::MAX,
                self.levels
            )));
        }
        if self.distortions == 0 {
            return Err(Error::invalid("distortion count must be at least 1"));
        }
        if self.distortions as usize > DistortionGroup::ALL.len() {
            return Err(Error::invalid(format!(
                "distortion count must be at most {}, got {} (groups are sampled without replacement)",
                DistortionGroup::ALL.len(),
                self.distortions
            )));
        }
        if !(0.0..1.0).contains(&self.min_overlap) {
            return Err(Error::invalid("min overlap must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Crop rectangle in source-image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

/// Two overlapping crops from the same source image.
#[derive(Debug, Clone)]
pub struct CropPair<S> {
    pub crop_a: ImageBuffer<S>,
    pub crop_b: ImageBuffer<S>,
    pub rect_a: CropRect,
    pub rect_b: CropRect,
    /// Achieved intersection-over-union of the two rectangles.
    pub overlap: f64,
    /// True when the source was upscaled to fit the patch size.
    pub upscaled: bool,
    pub source_id: String,
}

/// One distortion of the chain applied to a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedDistortion {
    pub kind: DistortionKind,
    pub seed: u64,
}

/// L pairs of equally degraded crops, ordered by increasing level.
#[derive(Debug, Clone)]
pub struct DegradationLadder<S> {
    /// `entries[i]` holds the two crops degraded at level `i + 1`.
    pub entries: Vec<[ImageBuffer<S>; 2]>,
    pub applied: Vec<AppliedDistortion>,
    pub source_id: String,
}

impl<S> DegradationLadder<S> {
    pub fn levels(&self) -> usize {
        self.entries.len()
    }
}

fn iou(a: CropRect, b: CropRect) -> f64 {
    let ix = (a.x + a.size).min(b.x + b.size).saturating_sub(a.x.max(b.x));
    let iy = (a.y + a.size).min(b.y + b.size).saturating_sub(a.y.max(b.y));
    let inter = (ix * iy) as f64;
    let union = (2 * a.size * a.size) as f64 - inter;
    inter / union
}

/// Extracts a pair of random overlapping crops. Positions are uniform over
/// the set of pairs meeting the overlap requirement (rejection sampling
/// from the uniform joint). Images smaller than the patch are bicubically
/// upscaled first and flagged in the result.
pub fn extract_overlapping_crops<S: Scalar>(
    img: &ImageBuffer<S>,
    cfg: &LadderConfig,
    source_id: &str,
    rng: &mut ChaCha8Rng,
) -> Result<CropPair<S>> {
    cfg.validate()?;
    let p = cfg.patch_size;
    let owned;
    let mut upscaled = false;
    let img = if img.width() < p || img.height() < p {
        let scale = (p as f64 / img.width() as f64).max(p as f64 / img.height() as f64);
        let w = ((img.width() as f64 * scale).ceil() as usize).max(p);
        let h = ((img.height() as f64 * scale).ceil() as usize).max(p);
        let mut up = resample(img, w, h, ResampleMethod::Bicubic)?;
        // Keep crop values on the 8-bit grid, matching what a PNG round
        // trip of the source would produce.
        up.quantize_u8_grid();
        upscaled = true;
        owned = up;
        &owned
    } else {
        img
    };
    let max_x = img.width() - p;
    let max_y = img.height() - p;

    let mut chosen = None;
    for _ in 0..10_000 {
        let a = CropRect { x: rng.gen_range(0..=max_x), y: rng.gen_range(0..=max_y), size: p };
        let b = CropRect { x: rng.gen_range(0..=max_x), y: rng.gen_range(0..=max_y), size: p };
        if iou(a, b) >= cfg.min_overlap {
            chosen = Some((a, b));
            break;
        }
    }
    // Coincident crops always satisfy any overlap below 1.
    let (rect_a, rect_b) = chosen.unwrap_or_else(|| {
        let a = CropRect { x: max_x / 2, y: max_y / 2, size: p };
        (a, a)
    });
    Ok(CropPair {
        crop_a: img.crop(rect_a.x, rect_a.y, p, p)?,
        crop_b: img.crop(rect_b.x, rect_b.y, p, p)?,
        overlap: iou(rect_a, rect_b),
        rect_a,
        rect_b,
        upscaled,
        source_id: source_id.to_string(),
    })
}

/// Samples the distortion chain for one ladder: `distortions` groups drawn
/// without replacement, one kind per group, each with its own derived seed.
pub fn sample_chain(cfg: &LadderConfig, source_id: &str) -> Result<Vec<AppliedDistortion>> {
    cfg.validate()?;
    let mut rng = derive_stream(cfg.seed, &["chain", source_id]);
    let mut groups: Vec<DistortionGroup> = DistortionGroup::ALL.to_vec();
    let mut chain = Vec::with_capacity(cfg.distortions as usize);
    for _ in 0..cfg.distortions {
        let g = groups.remove(rng.gen_range(0..groups.len()));
        let kinds: Vec<DistortionKind> = g.kinds().collect();
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let seed = derive_seed(cfg.seed, &["distortion", source_id, kind.name()]);
        chain.push(AppliedDistortion { kind, seed });
    }
    Ok(chain)
}

/// Applies a recorded distortion chain to one crop at one level.
pub fn apply_chain<S: Scalar>(
    crop: &ImageBuffer<S>,
    chain: &[AppliedDistortion],
    level: IntensityLevel,
) -> Result<ImageBuffer<S>> {
    let mut out = crop.clone();
    for step in chain {
        out = apply_distortion(&out, step.kind, level, step.seed)?;
    }
    Ok(out)
}

/// Builds the full ladder for a crop pair: the same chain at level `i`
/// applied to both crops of entry `i`, for `i = 1..=levels`.
pub fn build_ladder<S: Scalar>(
    pair: &CropPair<S>,
    cfg: &LadderConfig,
) -> Result<DegradationLadder<S>> {
    let chain = sample_chain(cfg, &pair.source_id)?;
    let mut entries = Vec::with_capacity(cfg.levels as usize);
    for level in IntensityLevel::all().take(cfg.levels as usize) {
        entries.push([
            apply_chain(&pair.crop_a, &chain, level)?,
            apply_chain(&pair.crop_b, &chain, level)?,
        ]);
    }
    Ok(DegradationLadder { entries, applied: chain, source_id: pair.source_id.clone() })
}

/// One manifest row: where the image lives, its id, and an optional mean
/// opinion score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub id: String,
    pub mos: Option<f64>,
}

/// Rows of `(image_path, id, optional mos)` loaded from CSV.
#[derive(Debug, Clone, Default)]
pub struct DatasetManifest {
    pub rows: Vec<ManifestRow>,
}

impl DatasetManifest {
    /// Reads a UTF-8 CSV with header `path,id[,mos]`. Ids must be unique.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .from_path(path)
            .map_err(|e| Error::format(path, e.to_string()))?;
        let headers = reader.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let (path_col, id_col) = match (col("path"), col("id")) {
            (Some(p), Some(i)) => (p, i),
            _ => return Err(Error::format(path, "manifest header must contain `path` and `id`")),
        };
        let mos_col = col("mos");
        let mut rows = Vec::new();
        let mut seen = BTreeSet::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::format(path, e.to_string()))?;
            let image_path = record
                .get(path_col)
                .ok_or_else(|| Error::format(path, format!("row {}: missing path", line + 2)))?;
            let id = record
                .get(id_col)
                .ok_or_else(|| Error::format(path, format!("row {}: missing id", line + 2)))?
                .to_string();
            if !seen.insert(id.clone()) {
                return Err(Error::format(path, format!("duplicate id `{id}`")));
            }
            let mos = match mos_col.and_then(|c| record.get(c)) {
                Some("") | None => None,
                Some(raw) => Some(raw.trim().parse::<f64>().map_err(|_| {
                    Error::format(path, format!("row {}: mos `{raw}` is not a number", line + 2))
                })?),
            };
            rows.push(ManifestRow { path: PathBuf::from(image_path), id, mos });
        }
        Ok(Self { rows })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer =
            csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
        writer
            .write_record(["path", "id", "mos"])
            .map_err(|e| Error::format(path, e.to_string()))?;
        for row in &self.rows {
            let mos = row.mos.map(|m| m.to_string()).unwrap_or_default();
            writer
                .write_record([row.path.to_string_lossy().as_ref(), row.id.as_str(), mos.as_str()])
                .map_err(|e| Error::format(path, e.to_string()))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Sidecar record written next to each generated ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderRecord {
    pub source_id: String,
    pub source_path: PathBuf,
    pub levels: u8,
    pub applied: Vec<AppliedDistortion>,
    pub rect_a: CropRect,
    pub rect_b: CropRect,
    pub overlap: f64,
    pub upscaled: bool,
}

/// Corpus generation outcome.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub processed: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

/// Generates one ladder directory per manifest row:
/// `<out>/<id>/level<i>_<a|b>.png` plus `<out>/<id>/ladder.json`.
///
/// Rows fan out over the current rayon pool; per-row streams are derived
/// from `(seed, id)` so the output is identical for any worker count.
/// Unreadable images are logged to stderr, skipped, and counted.
pub fn generate_corpus<S: Scalar>(
    manifest: &DatasetManifest,
    cfg: &LadderConfig,
    out_dir: impl AsRef<Path>,
) -> Result<CorpusSummary> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let results: Vec<std::result::Result<(), String>> = manifest
        .rows
        .par_iter()
        .map(|row| generate_one_ladder::<S>(row, cfg, out_dir).map_err(|e| format!("{}: {e}", row.id)))
        .collect();

    let mut summary = CorpusSummary::default();
    for result in results {
        match result {
            Ok(()) => summary.processed += 1,
            Err(msg) => {
                eprintln!("corpus: skipping {msg}");
                summary.failed += 1;
                summary.failures.push(msg);
            }
        }
    }
    Ok(summary)
}

fn generate_one_ladder<S: Scalar>(
    row: &ManifestRow,
    cfg: &LadderConfig,
    out_dir: &Path,
) -> Result<()> {
    let img: ImageBuffer<S> = decode_image(&row.path)?;
    let mut crop_rng = derive_stream(cfg.seed, &["crops", &row.id]);
    let pair = extract_overlapping_crops(&img, cfg, &row.id, &mut crop_rng)?;
    let ladder = build_ladder(&pair, cfg)?;

    let dir = out_dir.join(&row.id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (idx, [a, b]) in ladder.entries.iter().enumerate() {
        let level = idx + 1;
        encode_image(dir.join(format!("level{level}_a.png")), a)?;
        encode_image(dir.join(format!("level{level}_b.png")), b)?;
    }
    let record = LadderRecord {
        source_id: row.id.clone(),
        source_path: row.path.clone(),
        levels: cfg.levels,
        applied: ladder.applied.clone(),
        rect_a: pair.rect_a,
        rect_b: pair.rect_b,
        overlap: pair.overlap,
        upscaled: pair.upscaled,
    };
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    let record_path = dir.join("ladder.json");
    fs::write(&record_path, json).map_err(|e| Error::io(&record_path, e))?;
    Ok(())
}

/// Re-extracts the pristine crops named by a sidecar record from the
/// source image (including the recorded upscale step).
pub fn replay_crops<S: Scalar>(record: &LadderRecord) -> Result<(ImageBuffer<S>, ImageBuffer<S>)> {
    let img: ImageBuffer<S> = decode_image(&record.source_path)?;
    let p = record.rect_a.size;
    let img = if record.upscaled {
        let scale = (p as f64 / img.width() as f64).max(p as f64 / img.height() as f64);
        let w = ((img.width() as f64 * scale).ceil() as usize).max(p);
        let h = ((img.height() as f64 * scale).ceil() as usize).max(p);
        let mut up = resample(&img, w, h, ResampleMethod::Bicubic)?;
        up.quantize_u8_grid();
        up
    } else {
        img
    };
    let a = img.crop(record.rect_a.x, record.rect_a.y, p, p)?;
    let b = img.crop(record.rect_b.x, record.rect_b.y, p, p)?;
    Ok((a, b))
}
