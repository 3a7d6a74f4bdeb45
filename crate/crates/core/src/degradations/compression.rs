//! Compression group: blockwise DCT quantization (JPEG-style artifacts)
//! and wavelet coefficient thresholding (JPEG2000-style artifacts).
//!
//! These are artifact simulators, not codecs: the contract is the visual
//! structure and a monotone quality drop across levels, not bit-exact
//! compatibility with any encoder.

use crate::error::Result;
use crate::imaging::{clamp01, convert_colorspace, ColorSpace, ImageBuffer};
use crate::scalar::{cast, Scalar};

pub const JPEG_QUALITY: [u32; 5] = [43, 36, 24, 12, 7];
pub const WAVELET_KEEP_FRACTION: [f64; 5] = [0.25, 0.15, 0.08, 0.04, 0.02];
const WAVELET_LEVELS: usize = 3;

// Standard luminance/chrominance quantization tables.
#[rustfmt::skip]
const LUMA_TABLE: [u32; 64] = [
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99,
];
#[rustfmt::skip]
const CHROMA_TABLE: [u32; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
];

fn scaled_table(base: &[u32; 64], quality: u32) -> [f64; 64] {
    let quality = quality.clamp(1, 100);
    let scale = if quality < 50 { 5000.0 / quality as f64 } else { 200.0 - 2.0 * quality as f64 };
    let mut out = [0.0; 64];
    for (o, &t) in out.iter_mut().zip(base) {
        *o = ((t as f64 * scale + 50.0) / 100.0).floor().clamp(1.0, 255.0);
    }
    out
}

/// Orthonormal 8-point DCT-II basis, row u = alpha(u) * cos((2x+1)u*pi/16).
fn dct_matrix() -> [[f64; 8]; 8] {
    let mut d = [[0.0; 8]; 8];
    for (u, row) in d.iter_mut().enumerate() {
        let alpha = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        for (x, v) in row.iter_mut().enumerate() {
            *v = alpha * ((2.0 * x as f64 + 1.0) * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    d
}

/// Mirror-pads a plane to multiples of `block` in both dimensions.
fn pad_plane(plane: &[f64], w: usize, h: usize, block: usize) -> (Vec<f64>, usize, usize) {
    let pw = w.div_ceil(block) * block;
    let ph = h.div_ceil(block) * block;
    // Mirror overhang; pad is < block <= dims, so one reflection suffices.
    let reflect = |i: usize, n: usize| if i < n { i } else { 2 * n - 1 - i };
    let mut out = vec![0.0; pw * ph];
    for y in 0..ph {
        let sy = reflect(y, h);
        for x in 0..pw {
            let sx = reflect(x, w);
            out[y * pw + x] = plane[sy * w + sx];
        }
    }
    (out, pw, ph)
}

fn quantize_plane(plane: &mut [f64], pw: usize, ph: usize, table: &[f64; 64], dct: &[[f64; 8]; 8]) {
    let mut block = [[0.0f64; 8]; 8];
    let mut tmp = [[0.0f64; 8]; 8];
    for by in (0..ph).step_by(8) {
        for bx in (0..pw).step_by(8) {
            for y in 0..8 {
                for x in 0..8 {
                    block[y][x] = plane[(by + y) * pw + bx + x] * 255.0 - 128.0;
                }
            }
            // F = D * block * D^T
            for u in 0..8 {
                for x in 0..8 {
                    tmp[u][x] = (0..8).map(|y| dct[u][y] * block[y][x]).sum();
                }
            }
            let mut coeff = [[0.0f64; 8]; 8];
            for u in 0..8 {
                for v in 0..8 {
                    coeff[u][v] = (0..8).map(|x| tmp[u][x] * dct[v][x]).sum();
                }
            }
            for u in 0..8 {
                for v in 0..8 {
                    let q = table[u * 8 + v];
                    coeff[u][v] = (coeff[u][v] / q).round() * q;
                }
            }
            // block = D^T * F * D
            for y in 0..8 {
                for v in 0..8 {
                    tmp[y][v] = (0..8).map(|u| dct[u][y] * coeff[u][v]).sum();
                }
            }
            for y in 0..8 {
                for x in 0..8 {
                    let value: f64 = (0..8).map(|v| tmp[y][v] * dct[v][x]).sum();
                    plane[(by + y) * pw + bx + x] = (value + 128.0) / 255.0;
                }
            }
        }
    }
}

pub fn jpeg<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    let quality = JPEG_QUALITY[i];
    let luma_q = scaled_table(&LUMA_TABLE, quality);
    let chroma_q = scaled_table(&CHROMA_TABLE, quality);
    let dct = dct_matrix();
    let (w, h) = (img.width(), img.height());

    let ycbcr = convert_colorspace(img, ColorSpace::Rgb, ColorSpace::YCbCr)?;
    let mut out = ycbcr.clone();
    for c in 0..3 {
        let plane: Vec<f64> =
            ycbcr.channel_plane(c).iter().map(|v| v.to_f64().unwrap()).collect();
        let (mut padded, pw, ph) = pad_plane(&plane, w, h, 8);
        let table = if c == 0 { &luma_q } else { &chroma_q };
        quantize_plane(&mut padded, pw, ph, table, &dct);
        let cropped: Vec<S> =
            (0..h).flat_map(|y| (0..w).map(move |x| (y, x))).map(|(y, x)| cast(padded[y * pw + x])).collect();
        out.set_channel_plane(c, &cropped);
    }
    let mut rgb = convert_colorspace(&out, ColorSpace::YCbCr, ColorSpace::Rgb)?;
    rgb.clamp_unit();
    Ok(rgb)
}

/// One level of the orthonormal Haar transform along rows then columns of
/// the `n x m` top-left region, in place. Low-pass ends up in the first
/// half of each axis.
fn haar_forward(data: &mut [f64], stride: usize, n_cols: usize, n_rows: usize) {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut scratch = vec![0.0; n_cols.max(n_rows)];
    for y in 0..n_rows {
        for k in 0..n_cols / 2 {
            let a = data[y * stride + 2 * k];
            let b = data[y * stride + 2 * k + 1];
            scratch[k] = (a + b) * inv_sqrt2;
            scratch[n_cols / 2 + k] = (a - b) * inv_sqrt2;
        }
        data[y * stride..y * stride + n_cols].copy_from_slice(&scratch[..n_cols]);
    }
    for x in 0..n_cols {
        for k in 0..n_rows / 2 {
            let a = data[(2 * k) * stride + x];
            let b = data[(2 * k + 1) * stride + x];
            scratch[k] = (a + b) * inv_sqrt2;
            scratch[n_rows / 2 + k] = (a - b) * inv_sqrt2;
        }
        for k in 0..n_rows {
            data[k * stride + x] = scratch[k];
        }
    }
}

fn haar_inverse(data: &mut [f64], stride: usize, n_cols: usize, n_rows: usize) {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut scratch = vec![0.0; n_cols.max(n_rows)];
    for x in 0..n_cols {
        for k in 0..n_rows / 2 {
            let lo = data[k * stride + x];
            let hi = data[(n_rows / 2 + k) * stride + x];
            scratch[2 * k] = (lo + hi) * inv_sqrt2;
            scratch[2 * k + 1] = (lo - hi) * inv_sqrt2;
        }
        for k in 0..n_rows {
            data[k * stride + x] = scratch[k];
        }
    }
    for y in 0..n_rows {
        for k in 0..n_cols / 2 {
            let lo = data[y * stride + k];
            let hi = data[y * stride + n_cols / 2 + k];
            scratch[2 * k] = (lo + hi) * inv_sqrt2;
            scratch[2 * k + 1] = (lo - hi) * inv_sqrt2;
        }
        data[y * stride..y * stride + n_cols].copy_from_slice(&scratch[..n_cols]);
    }
}

/// Keeps only the strongest detail coefficients of a 3-level Haar
/// decomposition. The approximation band is always kept; the keep budget
/// is a fraction of the total coefficient count, so the kept sets are
/// nested across levels and the removed energy grows monotonically.
pub fn jpeg2000<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> ImageBuffer<S> {
    let keep_fraction = WAVELET_KEEP_FRACTION[i];
    let (w, h) = (img.width(), img.height());
    let block = 1 << WAVELET_LEVELS;
    let mut out = img.clone();
    for c in 0..3 {
        let plane: Vec<f64> = img.channel_plane(c).iter().map(|v| v.to_f64().unwrap()).collect();
        let (mut padded, pw, ph) = pad_plane(&plane, w, h, block);
        let (mut cw, mut ch) = (pw, ph);
        for _ in 0..WAVELET_LEVELS {
            haar_forward(&mut padded, pw, cw, ch);
            cw /= 2;
            ch /= 2;
        }
        // Rank detail coefficients by magnitude; the approximation band
        // (the final cw x ch corner) is exempt.
        let ll_count = cw * ch;
        let total = pw * ph;
        let budget = ((keep_fraction * total as f64).round() as usize).saturating_sub(ll_count);
        let mut detail: Vec<(usize, f64)> = Vec::with_capacity(total - ll_count);
        for y in 0..ph {
            for x in 0..pw {
                if x < cw && y < ch {
                    continue;
                }
                let idx = y * pw + x;
                detail.push((idx, padded[idx].abs()));
            }
        }
        detail.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        for &(idx, _) in detail.iter().skip(budget) {
            padded[idx] = 0.0;
        }
        let (mut cw, mut ch) = (pw >> WAVELET_LEVELS, ph >> WAVELET_LEVELS);
        for _ in 0..WAVELET_LEVELS {
            cw *= 2;
            ch *= 2;
            haar_inverse(&mut padded, pw, cw, ch);
        }
        let cropped: Vec<S> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (y, x)))
            .map(|(y, x)| clamp01(cast(padded[y * pw + x])))
            .collect();
        out.set_channel_plane(c, &cropped);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_round_trip_is_identity() {
        let mut data: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let original = data.clone();
        haar_forward(&mut data, 8, 8, 8);
        haar_inverse(&mut data, 8, 8, 8);
        for (a, b) in data.iter().zip(&original) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_table_grows_as_quality_drops() {
        let hi = scaled_table(&LUMA_TABLE, 43);
        let lo = scaled_table(&LUMA_TABLE, 7);
        for (a, b) in hi.iter().zip(lo.iter()) {
            assert!(b >= a);
        }
    }

    #[test]
    fn jpeg_identity_on_flat_image() {
        // A flat block has only a DC coefficient, which survives
        // quantization nearly unchanged.
        let img = ImageBuffer::<f64>::filled(16, 16, 0.5);
        let out = jpeg(&img, 4).unwrap();
        for &v in out.data() {
            assert!((v - 0.5).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn wavelet_keeps_less_energy_at_higher_levels() {
        let img = crate::procedural::synth_image::<f64>(64, 64, 12);
        let e1 = crate::imaging::mse(&img, &jpeg2000(&img, 0)).unwrap();
        let e5 = crate::imaging::mse(&img, &jpeg2000(&img, 4)).unwrap();
        assert!(e5 > e1, "level 5 should destroy more than level 1 ({e5} vs {e1})");
    }
}
