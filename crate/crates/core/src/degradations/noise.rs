//! Noise group. Each kind draws a unit-strength random field from the seed
//! and scales it by the level's sigma, so the same pattern just gets
//! stronger from level to level.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::imaging::{clamp01, convert_colorspace, ColorSpace, ImageBuffer};
use crate::rng::derive_stream;
use crate::scalar::{cast, Scalar};

pub const WHITE_SIGMA: [f64; 5] = [0.02, 0.04, 0.07, 0.11, 0.16];
pub const IMPULSE_FRACTION: [f64; 5] = [0.01, 0.03, 0.06, 0.10, 0.16];
pub const SPECKLE_SIGMA: [f64; 5] = [0.05, 0.10, 0.17, 0.25, 0.35];

fn normal_field(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn white<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> ImageBuffer<S> {
    let mut rng = derive_stream(seed, &["white-noise", "field"]);
    let field = normal_field(&mut rng, img.data().len());
    let sigma = WHITE_SIGMA[i];
    let mut out = img.clone();
    for (v, n) in out.data_mut().iter_mut().zip(field) {
        *v = clamp01(*v + cast::<S>(sigma * n));
    }
    out
}

pub fn white_color_component<S: Scalar>(
    img: &ImageBuffer<S>,
    i: usize,
    seed: u64,
) -> Result<ImageBuffer<S>> {
    let mut rng = derive_stream(seed, &["white-noise-color-component", "field"]);
    let field = normal_field(&mut rng, img.data().len());
    let sigma = WHITE_SIGMA[i];
    let mut ycbcr = convert_colorspace(img, ColorSpace::Rgb, ColorSpace::YCbCr)?;
    for (v, n) in ycbcr.data_mut().iter_mut().zip(field) {
        *v = clamp01(*v + cast::<S>(sigma * n));
    }
    convert_colorspace(&ycbcr, ColorSpace::YCbCr, ColorSpace::Rgb)
}

pub fn impulse<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> ImageBuffer<S> {
    let mut rng = derive_stream(seed, &["impulse-noise", "field"]);
    let fraction = IMPULSE_FRACTION[i];
    let mut out = img.clone();
    let pixels = img.width() * img.height();
    for p in 0..pixels {
        // Both draws happen for every pixel so that corrupted sets are
        // nested across levels and each pixel keeps its salt/pepper fate.
        let u: f64 = rng.gen();
        let salt: bool = rng.gen();
        if u < fraction {
            let v = if salt { S::one() } else { S::zero() };
            let base = p * 3;
            out.data_mut()[base] = v;
            out.data_mut()[base + 1] = v;
            out.data_mut()[base + 2] = v;
        }
    }
    out
}

pub fn multiplicative<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> ImageBuffer<S> {
    let mut rng = derive_stream(seed, &["multiplicative-noise", "field"]);
    let field = normal_field(&mut rng, img.data().len());
    let sigma = SPECKLE_SIGMA[i];
    let mut out = img.clone();
    for (v, n) in out.data_mut().iter_mut().zip(field) {
        *v = clamp01(*v * (S::one() + cast::<S>(sigma * n)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_corruption_sets_are_nested_across_levels() {
        let img = ImageBuffer::<f64>::filled(32, 32, 0.5);
        let low = impulse(&img, 0, 7);
        let high = impulse(&img, 4, 7);
        for (idx, (&a, &b)) in low.data().iter().zip(high.data()).enumerate() {
            if a != 0.5 {
                assert_eq!(a, b, "pixel {idx} corrupted at level 1 changed fate at level 5");
            }
        }
    }

    #[test]
    fn white_noise_scales_the_same_field() {
        let img = ImageBuffer::<f64>::filled(16, 16, 0.5);
        let a = white(&img, 0, 3);
        let b = white(&img, 1, 3);
        // Away from clamping, level 2 deviations are exactly double level 1.
        for (&x, &y) in a.data().iter().zip(b.data()) {
            if (0.05..0.95).contains(&y) {
                assert!(((y - 0.5) - 2.0 * (x - 0.5)).abs() < 1e-12);
            }
        }
    }
}
