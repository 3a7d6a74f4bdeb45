//! Sharpness & contrast group: unsharp masking and the two tone curves.

use crate::error::Result;
use crate::imaging::{clamp01, convert_colorspace, gaussian_blur_plane, ColorSpace, ImageBuffer};
use crate::scalar::{cast, Scalar};

pub const SHARPEN_AMOUNT: [f64; 5] = [1.0, 2.0, 3.0, 5.0, 8.0];
pub const SHARPEN_SIGMA: f64 = 3.0;
/// Blend strength toward the smoothstep curve.
pub const NONLINEAR_STRENGTH: [f64; 5] = [0.35, 0.55, 0.75, 0.9, 1.0];
/// Slope of the linear tone curve around 0.5; contractions only, so the
/// per-pixel error grows strictly with the level and never clamps.
pub const LINEAR_SLOPE: [f64; 5] = [0.85, 0.7, 0.55, 0.4, 0.25];

/// Unsharp masking on the LAB lightness channel:
/// `L' = L + amount * (L - blur(L))`.
pub fn high_sharpen<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    let amount = cast::<S>(SHARPEN_AMOUNT[i]);
    let mut lab = convert_colorspace(img, ColorSpace::Rgb, ColorSpace::Lab)?;
    let lightness = lab.channel_plane(0);
    let blurred = gaussian_blur_plane(&lightness, lab.width(), lab.height(), SHARPEN_SIGMA)?;
    let sharpened: Vec<S> = lightness
        .iter()
        .zip(&blurred)
        .map(|(&l, &b)| clamp01(l + amount * (l - b)))
        .collect();
    lab.set_channel_plane(0, &sharpened);
    convert_colorspace(&lab, ColorSpace::Lab, ColorSpace::Rgb)
}

pub fn nonlinear_contrast<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> ImageBuffer<S> {
    let t = cast::<S>(NONLINEAR_STRENGTH[i]);
    let one = S::one();
    let curve = |v: S| {
        let s = v * v * (cast::<S>(3.0) - cast::<S>(2.0) * v); // smoothstep
        clamp01((one - t) * v + t * s)
    };
    img.map_pixels(|px| [curve(px[0]), curve(px[1]), curve(px[2])])
}

pub fn linear_contrast<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> ImageBuffer<S> {
    let a = cast::<S>(LINEAR_SLOPE[i]);
    let half = cast::<S>(0.5);
    img.map_pixels(|px| {
        [
            clamp01(a * (px[0] - half) + half),
            clamp01(a * (px[1] - half) + half),
            clamp01(a * (px[2] - half) + half),
        ]
    })
}
