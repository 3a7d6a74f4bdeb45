//! Spatial group: jitter, patch relocation, pixelation, quantization, and
//! color blocks.

use rand::Rng;

use crate::error::Result;
use crate::imaging::{resample, ImageBuffer, ResampleMethod};
use crate::rng::derive_stream;
use crate::scalar::{cast, Scalar};

pub const JITTER_RADIUS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
pub const PATCH_SIZE: usize = 16;
pub const PATCH_COUNT: [usize; 5] = [10, 20, 40, 70, 110];
pub const PIXELATE_FACTOR: [f64; 5] = [0.5, 0.25, 0.16, 0.11, 0.07];
pub const QUANTIZATION_LEVELS: [usize; 5] = [10, 7, 5, 4, 2];
pub const BLOCK_SIZE: usize = 32;
pub const BLOCK_COUNT: [usize; 5] = [2, 4, 6, 8, 10];

/// Warps each pixel by a random offset. The unit displacement field is
/// drawn once from the seed; the level scales its radius.
pub fn jitter<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> ImageBuffer<S> {
    let mut rng = derive_stream(seed, &["jitter", "field"]);
    let radius = JITTER_RADIUS[i];
    let (w, h) = (img.width(), img.height());
    let mut out = ImageBuffer::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let ux: f64 = rng.gen_range(-1.0..=1.0);
            let uy: f64 = rng.gen_range(-1.0..=1.0);
            let sx = (x as isize + (radius * ux).round() as isize).clamp(0, w as isize - 1) as usize;
            let sy = (y as isize + (radius * uy).round() as isize).clamp(0, h as isize - 1) as usize;
            out.set_pixel(x, y, img.pixel(sx, sy));
        }
    }
    out
}

/// Relocates random 16px patches to nearby positions. Relocation records
/// are drawn as one seed-determined sequence; level `i` applies a prefix of
/// it, so higher levels strictly extend lower ones.
pub fn non_eccentricity_patch<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> ImageBuffer<S> {
    let mut rng = derive_stream(seed, &["non-eccentricity-patch", "moves"]);
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let max_moves = PATCH_COUNT[PATCH_COUNT.len() - 1];
    for m in 0..max_moves {
        let sx = rng.gen_range(0..=w - PATCH_SIZE);
        let sy = rng.gen_range(0..=h - PATCH_SIZE);
        let dx: isize = rng.gen_range(-(PATCH_SIZE as isize)..=PATCH_SIZE as isize);
        let dy: isize = rng.gen_range(-(PATCH_SIZE as isize)..=PATCH_SIZE as isize);
        if m >= PATCH_COUNT[i] {
            continue; // keep consuming draws so prefixes match across levels
        }
        let tx = (sx as isize + dx).clamp(0, (w - PATCH_SIZE) as isize) as usize;
        let ty = (sy as isize + dy).clamp(0, (h - PATCH_SIZE) as isize) as usize;
        let patch = out.crop(sx, sy, PATCH_SIZE, PATCH_SIZE).expect("patch fits");
        for py in 0..PATCH_SIZE {
            for px in 0..PATCH_SIZE {
                out.set_pixel(tx + px, ty + py, patch.pixel(px, py));
            }
        }
    }
    out
}

pub fn pixelate<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    let f = PIXELATE_FACTOR[i];
    let dw = ((img.width() as f64 * f).round() as usize).max(1);
    let dh = ((img.height() as f64 * f).round() as usize).max(1);
    let down = resample(img, dw, dh, ResampleMethod::Nearest)?;
    resample(&down, img.width(), img.height(), ResampleMethod::Nearest)
}

/// Multi-Otsu thresholds over a 256-bin histogram: the `classes - 1` cut
/// points maximizing the between-class variance criterion
/// `sum_k weight_k * mean_k^2`, found by dynamic programming over segment
/// boundaries. Returned thresholds are bin indices; band `k` covers bins
/// `[t_{k-1}, t_k)`.
pub fn multi_otsu_thresholds(hist: &[f64], classes: usize) -> Vec<usize> {
    let bins = hist.len();
    assert!(classes >= 2 && classes <= bins);
    // Prefix sums of mass and of bin*mass.
    let mut weight = vec![0.0; bins + 1];
    let mut moment = vec![0.0; bins + 1];
    for (b, &p) in hist.iter().enumerate() {
        weight[b + 1] = weight[b] + p;
        moment[b + 1] = moment[b] + b as f64 * p;
    }
    let segment_score = |a: usize, b: usize| -> f64 {
        let w = weight[b] - weight[a];
        if w <= 0.0 {
            return 0.0;
        }
        let m = moment[b] - moment[a];
        m * m / w
    };
    // best[k][b]: max score splitting bins [0, b) into k segments.
    let mut best = vec![vec![f64::MIN; bins + 1]; classes + 1];
    let mut split = vec![vec![0usize; bins + 1]; classes + 1];
    for b in 0..=bins {
        best[1][b] = segment_score(0, b);
    }
    for k in 2..=classes {
        for b in k..=bins {
            for a in (k - 1)..b {
                let score = best[k - 1][a] + segment_score(a, b);
                if score > best[k][b] {
                    best[k][b] = score;
                    split[k][b] = a;
                }
            }
        }
    }
    let mut thresholds = Vec::with_capacity(classes - 1);
    let mut b = bins;
    for k in (2..=classes).rev() {
        let a = split[k][b];
        thresholds.push(a);
        b = a;
    }
    thresholds.reverse();
    thresholds
}

/// Quantizes every channel through a step function: Multi-Otsu thresholds
/// on the luma histogram, each band mapped to its mean luma.
pub fn quantization<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> ImageBuffer<S> {
    let classes = QUANTIZATION_LEVELS[i];
    let mut hist = vec![0.0f64; 256];
    for l in img.luma_plane() {
        let bin = (l.to_f64().unwrap() * 255.0).round().clamp(0.0, 255.0) as usize;
        hist[bin] += 1.0;
    }
    let thresholds = multi_otsu_thresholds(&hist, classes);

    // Band representatives: mean luma of each band, midpoint if empty.
    let mut bounds = Vec::with_capacity(classes + 1);
    bounds.push(0usize);
    bounds.extend_from_slice(&thresholds);
    bounds.push(256);
    let mut representative = Vec::with_capacity(classes);
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mass: f64 = hist[a..b].iter().sum();
        let value = if mass > 0.0 {
            let m: f64 = hist[a..b].iter().enumerate().map(|(j, &p)| (a + j) as f64 * p).sum();
            m / mass / 255.0
        } else {
            (a + b) as f64 / 2.0 / 255.0
        };
        representative.push(cast::<S>(value));
    }
    let band_of = |v: S| -> usize {
        let bin = (v.to_f64().unwrap() * 255.0).round().clamp(0.0, 255.0) as usize;
        thresholds.iter().take_while(|&&t| bin >= t).count()
    };
    img.map_pixels(|px| [representative[band_of(px[0])], representative[band_of(px[1])], representative[band_of(px[2])]])
}

/// Paints random uniformly colored squares. Block records are drawn as one
/// seed-determined sequence; the level takes a prefix. Placement avoids
/// earlier blocks (with bounded retries), so each block adds fresh damage
/// and severity rises strictly with the count.
pub fn color_block<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> ImageBuffer<S> {
    let mut rng = derive_stream(seed, &["color-block", "blocks"]);
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let size = BLOCK_SIZE.min(w).min(h);
    let mut placed: Vec<(usize, usize)> = Vec::new();
    for _ in 0..BLOCK_COUNT[i] {
        let mut pos = None;
        for _ in 0..200 {
            let x = rng.gen_range(0..=w - size);
            let y = rng.gen_range(0..=h - size);
            let overlaps = placed
                .iter()
                .any(|&(px, py)| x < px + size && px < x + size && y < py + size && py < y + size);
            if !overlaps {
                pos = Some((x, y));
                break;
            }
        }
        let (x, y) = match pos {
            Some(p) => p,
            None => (rng.gen_range(0..=w - size), rng.gen_range(0..=h - size)),
        };
        placed.push((x, y));
        let color = [
            cast::<S>(rng.gen::<f64>()),
            cast::<S>(rng.gen::<f64>()),
            cast::<S>(rng.gen::<f64>()),
        ];
        for py in y..y + size {
            for px in x..x + size {
                out.set_pixel(px, py, color);
            }
        }
    }
    out
}
