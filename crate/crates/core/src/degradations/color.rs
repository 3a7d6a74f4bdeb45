//! Color-distortion group: chroma diffusion, green-channel shift, and the
//! two saturation scalings.

use rand::Rng;

use crate::error::Result;
use crate::imaging::{
    clamp01, convert_colorspace, convolve2d_plane, gaussian_blur_plane, ColorSpace, ImageBuffer, Kernel,
};
use crate::rng::derive_stream;
use crate::scalar::{cast, Scalar};

pub const DIFFUSION_SIGMA: [f64; 5] = [1.0, 2.0, 4.0, 6.0, 9.0];
pub const SHIFT_PIXELS: [f64; 5] = [2.0, 4.0, 7.0, 10.0, 14.0];
/// Blend strength on top of the gradient mask; grows with the level so the
/// severity ordering holds even when a larger shift happens to line up
/// with periodic image structure.
pub const SHIFT_BLEND: [f64; 5] = [0.5, 0.62, 0.74, 0.87, 1.0];
pub const SATURATION_HSV_FACTOR: [f64; 5] = [0.7, 0.55, 0.4, 0.25, 0.1];
pub const SATURATION_LAB_FACTOR: [f64; 5] = [1.6, 2.0, 2.6, 3.3, 4.2];

/// Gaussian blur on the LAB a/b channels only; lightness is untouched.
pub fn diffusion<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    let sigma = DIFFUSION_SIGMA[i];
    let mut lab = convert_colorspace(img, ColorSpace::Rgb, ColorSpace::Lab)?;
    for c in [1, 2] {
        let plane = lab.channel_plane(c);
        let blurred = gaussian_blur_plane(&plane, lab.width(), lab.height(), sigma)?;
        lab.set_channel_plane(c, &blurred);
    }
    convert_colorspace(&lab, ColorSpace::Lab, ColorSpace::Rgb)
}

/// Translates the green channel along a seed-chosen direction and blends
/// the shifted channel back in, weighted by the normalized Sobel gradient
/// magnitude of the original image.
pub fn shift<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> Result<ImageBuffer<S>> {
    let mut rng = derive_stream(seed, &["color-shift", "direction"]);
    let angle: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    let amount = SHIFT_PIXELS[i];
    let dx = (amount * angle.cos()).round() as isize;
    let dy = (amount * angle.sin()).round() as isize;

    let (w, h) = (img.width(), img.height());
    let luma = img.luma_plane();
    let sobel_x = Kernel::square(
        3,
        [-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0].iter().map(|&v| cast::<S>(v)).collect(),
    )?;
    let sobel_y = Kernel::square(
        3,
        [-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0].iter().map(|&v| cast::<S>(v)).collect(),
    )?;
    let gx = convolve2d_plane(&luma, w, h, &sobel_x)?;
    let gy = convolve2d_plane(&luma, w, h, &sobel_y)?;
    let mut mask: Vec<S> = gx.iter().zip(&gy).map(|(&a, &b)| (a * a + b * b).sqrt()).collect();
    let max = mask.iter().copied().fold(S::zero(), S::max);
    if max > S::zero() {
        for m in &mut mask {
            *m = *m / max;
        }
    }

    let blend = cast::<S>(SHIFT_BLEND[i]);
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let sx = (x as isize - dx).clamp(0, w as isize - 1) as usize;
            let sy = (y as isize - dy).clamp(0, h as isize - 1) as usize;
            let m = blend * mask[y * w + x];
            let g = img.get(x, y, 1);
            let shifted = img.get(sx, sy, 1);
            out.set(x, y, 1, clamp01((S::one() - m) * g + m * shifted));
        }
    }
    Ok(out)
}

pub fn saturation_hsv<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    let f = cast::<S>(SATURATION_HSV_FACTOR[i]);
    let mut hsv = convert_colorspace(img, ColorSpace::Rgb, ColorSpace::Hsv)?;
    for px in hsv.data_mut().chunks_exact_mut(3) {
        px[1] = clamp01(px[1] * f);
    }
    convert_colorspace(&hsv, ColorSpace::Hsv, ColorSpace::Rgb)
}

pub fn saturation_lab<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    let f = cast::<S>(SATURATION_LAB_FACTOR[i]);
    let offset = cast::<S>(128.0 / 255.0);
    let mut lab = convert_colorspace(img, ColorSpace::Rgb, ColorSpace::Lab)?;
    for px in lab.data_mut().chunks_exact_mut(3) {
        px[1] = clamp01((px[1] - offset) * f + offset);
        px[2] = clamp01((px[2] - offset) * f + offset);
    }
    convert_colorspace(&lab, ColorSpace::Lab, ColorSpace::Rgb)
}
