//! Brightness-change group: brighten, darken, mean shift.

use crate::error::Result;
use crate::imaging::{clamp01, convert_colorspace, ColorSpace, ImageBuffer};
use crate::scalar::{cast, Scalar};

/// Gamma exponents for brighten; darken uses the reciprocals.
const CURVE_GAMMA: [f64; 5] = [0.85, 0.7, 0.55, 0.4, 0.3];
const MEAN_SHIFT_OFFSET: [f64; 5] = [0.08, 0.15, 0.22, 0.30, 0.38];

/// Gamma curve applied both per RGB channel and on the LAB lightness
/// channel, blended 50/50.
fn curve_blend<S: Scalar>(img: &ImageBuffer<S>, gamma: f64) -> Result<ImageBuffer<S>> {
    let g = cast::<S>(gamma);
    let rgb_curved = img.map_pixels(|px| [px[0].powf(g), px[1].powf(g), px[2].powf(g)]);

    let mut lab = convert_colorspace(img, ColorSpace::Rgb, ColorSpace::Lab)?;
    let lightness: Vec<S> = lab.channel_plane(0).iter().map(|&l| l.powf(g)).collect();
    lab.set_channel_plane(0, &lightness);
    let lab_curved = convert_colorspace(&lab, ColorSpace::Lab, ColorSpace::Rgb)?;

    let half = cast::<S>(0.5);
    let mut out = rgb_curved;
    for (dst, &src) in out.data_mut().iter_mut().zip(lab_curved.data()) {
        *dst = clamp01(half * *dst + half * src);
    }
    Ok(out)
}

pub fn brighten<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    curve_blend(img, CURVE_GAMMA[i])
}

pub fn darken<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    curve_blend(img, 1.0 / CURVE_GAMMA[i])
}

pub fn mean_shift<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> ImageBuffer<S> {
    let offset = cast::<S>(MEAN_SHIFT_OFFSET[i]);
    img.map_pixels(|px| {
        [clamp01(px[0] + offset), clamp01(px[1] + offset), clamp01(px[2] + offset)]
    })
}
