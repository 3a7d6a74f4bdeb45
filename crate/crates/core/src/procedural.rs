//! Seeded synthetic "pristine" images.
//!
//! Real photographic corpora are out of reach for unit tests, so these
//! generators compose colorful gradients, hard-edged shapes, plaid texture,
//! and soft blotches into images with enough luminance, chroma, and
//! high-frequency content that all 24 distortions produce measurable
//! damage.

use rand::Rng;

use crate::imaging::ImageBuffer;
use crate::rng::derive_stream;
use crate::scalar::{cast, Scalar};

/// Deterministic synthetic image for `(width, height, seed)`.
pub fn synth_image<S: Scalar>(width: usize, height: usize, seed: u64) -> ImageBuffer<S> {
    let mut rng = derive_stream(seed, &["procedural-image"]);

    // Corner colors for a bilinear gradient base.
    let corners: [[f64; 3]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen()));

    // Plaid: two sinusoids with random frequency, phase, and channel mix.
    let fx: f64 = rng.gen_range(2.0..10.0);
    let fy: f64 = rng.gen_range(2.0..10.0);
    let phase_x: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let phase_y: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let plaid_amp: f64 = rng.gen_range(0.06..0.14);
    let plaid_mix: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.3..1.0));

    #[derive(Clone, Copy)]
    struct Shape {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        color: [f64; 3],
        alpha: f64,
        rectangular: bool,
    }
    let shape_count = rng.gen_range(6..=12);
    let shapes: Vec<Shape> = (0..shape_count)
        .map(|_| Shape {
            cx: rng.gen(),
            cy: rng.gen(),
            rx: rng.gen_range(0.05..0.3),
            ry: rng.gen_range(0.05..0.3),
            color: std::array::from_fn(|_| rng.gen()),
            alpha: rng.gen_range(0.6..1.0),
            rectangular: rng.gen(),
        })
        .collect();

    // Coarse blotch grid, bilinearly upsampled per channel.
    const GRID: usize = 9;
    let blotch_amp: f64 = rng.gen_range(0.04..0.10);
    let blotches: Vec<[f64; 3]> =
        (0..GRID * GRID).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();

    let micro_amp: f64 = rng.gen_range(0.01..0.025);
    let mut micro = derive_stream(seed, &["procedural-image", "micro"]);

    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        let v = y as f64 / (height - 1).max(1) as f64;
        for x in 0..width {
            let u = x as f64 / (width - 1).max(1) as f64;
            let mut px = [0.0f64; 3];
            for (c, out) in px.iter_mut().enumerate() {
                let top = corners[0][c] * (1.0 - u) + corners[1][c] * u;
                let bottom = corners[2][c] * (1.0 - u) + corners[3][c] * u;
                *out = top * (1.0 - v) + bottom * v;
                *out += plaid_amp
                    * plaid_mix[c]
                    * ((u * fx * std::f64::consts::TAU + phase_x).sin()
                        + (v * fy * std::f64::consts::TAU + phase_y).sin())
                    * 0.5;
            }
            for s in &shapes {
                let dx = (u - s.cx) / s.rx;
                let dy = (v - s.cy) / s.ry;
                let inside = if s.rectangular {
                    dx.abs() <= 1.0 && dy.abs() <= 1.0
                } else {
                    dx * dx + dy * dy <= 1.0
                };
                if inside {
                    for c in 0..3 {
                        px[c] = px[c] * (1.0 - s.alpha) + s.color[c] * s.alpha;
                    }
                }
            }
            // Blotches sampled bilinearly from the coarse grid.
            let gx = u * (GRID - 1) as f64;
            let gy = v * (GRID - 1) as f64;
            let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
            let (tx, ty) = (gx - ix as f64, gy - iy as f64);
            let (ix1, iy1) = ((ix + 1).min(GRID - 1), (iy + 1).min(GRID - 1));
            for (c, out) in px.iter_mut().enumerate() {
                let b00 = blotches[iy * GRID + ix][c];
                let b10 = blotches[iy * GRID + ix1][c];
                let b01 = blotches[iy1 * GRID + ix][c];
                let b11 = blotches[iy1 * GRID + ix1][c];
                let b = b00 * (1.0 - tx) * (1.0 - ty)
                    + b10 * tx * (1.0 - ty)
                    + b01 * (1.0 - tx) * ty
                    + b11 * tx * ty;
                *out += blotch_amp * b + micro_amp * micro.gen_range(-1.0..1.0);
                *out = out.clamp(0.0, 1.0);
            }
            data.extend_from_slice(&[cast::<S>(px[0]), cast::<S>(px[1]), cast::<S>(px[2])]);
        }
    }
    let mut img = ImageBuffer::from_data(width, height, data).expect("generated dimensions are valid");
    // Snap to the 8-bit grid so in-memory images match their PNG round trip.
    img.quantize_u8_grid();
    img
}

/// The fixed 10-image reference set used by the severity-monotonicity
/// checks: 160x160, seeds under a dedicated namespace.
pub fn reference_images<S: Scalar>() -> Vec<ImageBuffer<S>> {
    (0..10).map(|i| synth_image(160, 160, 0x5EED_0000 + i)).collect()
}
