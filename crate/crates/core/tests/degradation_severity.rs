//! Severity ordering across intensity levels, checked with PSNR against the
//! pristine image on the fixed 10-image reference set.

use qalign_core::degradations::{apply_distortion, DistortionKind, IntensityLevel};
use qalign_core::imaging::psnr;
use qalign_core::procedural::reference_images;

const SLACK_DB: f64 = 0.1;

#[test]
fn severity_is_monotone_for_every_kind() {
    let references = reference_images::<f32>();
    let mut failures = Vec::new();
    for kind in DistortionKind::ALL {
        for (img_idx, img) in references.iter().enumerate() {
            let seed = 1000 + img_idx as u64;
            let mut previous: Option<f64> = None;
            for level in IntensityLevel::all() {
                let degraded = apply_distortion(img, kind, level, seed).unwrap();
                let db = psnr(img, &degraded).unwrap() as f64;
                if let Some(prev) = previous {
                    if db > prev + SLACK_DB {
                        failures.push(format!(
                            "{} image {} level {}: {:.3} dB after {:.3} dB",
                            kind.name(),
                            img_idx,
                            level.get(),
                            db,
                            prev
                        ));
                    }
                }
                previous = Some(db);
            }
        }
    }
    assert!(failures.is_empty(), "severity inversions:\n{}", failures.join("\n"));
}

#[test]
fn every_level_actually_degrades() {
    // Level 1 must already do measurable damage so rankings have signal.
    let img = &reference_images::<f32>()[0];
    for kind in DistortionKind::ALL {
        let degraded = apply_distortion(img, kind, IntensityLevel::new(1).unwrap(), 7).unwrap();
        let db = psnr(img, &degraded).unwrap();
        assert!(db < 55.0, "{} level 1 is a near no-op ({db} dB)", kind.name());
    }
}
