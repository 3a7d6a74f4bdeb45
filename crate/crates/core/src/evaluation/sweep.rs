//! Intensity sweep: degrade every image at every (kind, level) cell, score
//! it, and correlate the per-cell mean score with the level index.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::srcc;
use crate::degradations::{apply_distortion, DistortionKind, IntensityLevel};
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::rng::derive_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kind: DistortionKind,
    pub level: u8,
    pub mean_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindCorrelation {
    pub kind: DistortionKind,
    /// Spearman correlation between the level index and the mean score;
    /// 0 with the degenerate flag when the scores have no variance.
    pub srcc: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub per_kind: Vec<KindCorrelation>,
}

/// Runs the sweep. The scorer sees `(degraded, pristine)`; model-based
/// scorers ignore the pristine reference, oracle scorers may use it.
/// Distortion seeds are derived from `(seed, image id, kind)`, so results
/// are independent of evaluation order and worker count.
pub fn intensity_sweep<S, F>(
    scorer: F,
    pristine: &[(String, ImageBuffer<S>)],
    kinds: &[DistortionKind],
    seed: u64,
) -> Result<SweepReport>
where
    S: Scalar,
    F: Fn(&ImageBuffer<S>, &ImageBuffer<S>) -> Result<f64> + Sync,
{
    if pristine.is_empty() {
        return Err(Error::invalid("intensity sweep needs at least one image"));
    }
    if kinds.is_empty() {
        return Err(Error::invalid("intensity sweep needs at least one distortion kind"));
    }
    // One task per (kind, level, image), aggregated in deterministic order.
    let mut tasks = Vec::new();
    for &kind in kinds {
        for level in IntensityLevel::all() {
            for (img_idx, _) in pristine.iter().enumerate() {
                tasks.push((kind, level, img_idx));
            }
        }
    }
    let scores: Vec<f64> = tasks
        .par_iter()
        .map(|&(kind, level, img_idx)| {
            let (id, img) = &pristine[img_idx];
            let kind_seed = derive_seed(seed, &["sweep", id, kind.name()]);
            let degraded = apply_distortion(img, kind, level, kind_seed)?;
            scorer(&degraded, img)
        })
        .collect::<Result<Vec<_>>>()?;

    let per_image = pristine.len();
    let mut cells = Vec::with_capacity(kinds.len() * 5);
    for (block, &kind) in kinds.iter().enumerate() {
        for (level_idx, level) in IntensityLevel::all().enumerate() {
            let start = (block * 5 + level_idx) * per_image;
            let mean = scores[start..start + per_image].iter().sum::<f64>() / per_image as f64;
            cells.push(SweepCell { kind, level: level.get(), mean_q: mean });
        }
    }
    let per_kind = kinds
        .iter()
        .enumerate()
        .map(|(block, &kind)| {
            let levels: Vec<f64> = (1..=5).map(f64::from).collect();
            let means: Vec<f64> = cells[block * 5..block * 5 + 5].iter().map(|c| c.mean_q).collect();
            match srcc(&levels, &means) {
                Ok(value) => KindCorrelation { kind, srcc: value, degenerate: false },
                Err(Error::Degenerate(_)) => KindCorrelation { kind, srcc: 0.0, degenerate: true },
                Err(e) => unreachable!("srcc on 5 points cannot fail otherwise: {e}"),
            }
        })
        .collect();
    Ok(SweepReport { cells, per_kind })
}

/// Writes the sweep as two CSV tables: `<path>` with the cells
/// (`kind,level,mean_q`) and `<path stem>_srcc.csv` with the per-kind
/// correlations (`kind,srcc,degenerate`).
pub fn write_sweep_csv(path: impl AsRef<Path>, report: &SweepReport) -> Result<()> {
    let path = path.as_ref();
    let mut cells = String::from("kind,level,mean_q\n");
    for c in &report.cells {
        cells.push_str(&format!("{},{},{}\n", c.kind.name(), c.level, c.mean_q));
    }
    std::fs::write(path, cells).map_err(|e| Error::io(path, e))?;

    let srcc_path = match path.extension() {
        Some(ext) => path.with_extension(format!("srcc.{}", ext.to_string_lossy())),
        None => path.with_extension("srcc"),
    };
    let mut lines = String::from("kind,srcc,degenerate\n");
    for k in &report.per_kind {
        lines.push_str(&format!("{},{},{}\n", k.kind.name(), k.srcc, k.degenerate));
    }
    std::fs::write(&srcc_path, lines).map_err(|e| Error::io(&srcc_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::psnr;
    use crate::procedural::synth_image;

    fn images(n: usize) -> Vec<(String, ImageBuffer<f32>)> {
        (0..n).map(|i| (format!("img{i}"), synth_image::<f32>(96, 96, 500 + i as u64))).collect()
    }

    #[test]
    fn row_count_is_kinds_times_levels() {
        let kinds = [DistortionKind::WhiteNoise, DistortionKind::MeanShift];
        let report =
            intensity_sweep(|_, _| Ok(0.5), &images(2), &kinds, 1).unwrap();
        assert_eq!(report.cells.len(), kinds.len() * 5);
    }

    #[test]
    fn constant_scorer_reports_degenerate_zero() {
        let kinds = [DistortionKind::WhiteNoise];
        let report = intensity_sweep(|_, _| Ok(0.5), &images(1), &kinds, 1).unwrap();
        assert_eq!(report.per_kind[0].srcc, 0.0);
        assert!(report.per_kind[0].degenerate);
    }

    #[test]
    fn psnr_oracle_scorer_gives_perfect_inverse_correlation() {
        // The negative-PSNR oracle is a perfect quality scorer; severity
        // monotonicity makes every per-kind correlation exactly -1.
        let imgs = images(2);
        let report = intensity_sweep(
            |degraded, pristine| Ok(psnr(pristine, degraded)? as f64),
            &imgs,
            &DistortionKind::ALL,
            7,
        )
        .unwrap();
        for k in &report.per_kind {
            assert!(!k.degenerate, "{:?}", k);
            assert_eq!(k.srcc, -1.0, "{} correlation {}", k.kind.name(), k.srcc);
        }
    }

    #[test]
    fn csv_outputs_parse_back(){
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let kinds = [DistortionKind::MeanShift];
        let report = intensity_sweep(|_, p| Ok(p.data()[0] as f64), &images(1), &kinds, 1).unwrap();
        write_sweep_csv(&path, &report).unwrap();
        let cells = std::fs::read_to_string(&path).unwrap();
        assert!(cells.starts_with("kind,level,mean_q\n"));
        assert_eq!(cells.lines().count(), 1 + 5);
        let srcc_file = std::fs::read_to_string(dir.path().join("sweep.srcc.csv")).unwrap();
        assert!(srcc_file.contains("mean-shift"));
    }
}
