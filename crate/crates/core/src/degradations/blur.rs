//! Blur group: Gaussian, lens (disk), and motion (line) kernels.

use rand::Rng;

use crate::error::Result;
use crate::imaging::{convolve2d, gaussian_blur, Border, ImageBuffer, Kernel};
use crate::rng::derive_stream;
use crate::scalar::{cast, Scalar};

pub const GAUSSIAN_SIGMA: [f64; 5] = [0.8, 1.6, 2.6, 4.0, 6.0];
pub const LENS_RADIUS: [usize; 5] = [1, 2, 4, 6, 9];
pub const MOTION_LENGTH: [usize; 5] = [4, 7, 11, 16, 23];

pub fn gaussian<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    gaussian_blur(img, GAUSSIAN_SIGMA[i])
}

/// Disk kernel with 4x4 subpixel coverage at the rim.
fn disk_kernel<S: Scalar>(radius: usize) -> Kernel<S> {
    let size = 2 * radius + 1;
    let r = radius as f64;
    let mut weights = vec![0.0f64; size * size];
    for y in 0..size {
        for x in 0..size {
            let mut coverage = 0.0;
            for sy in 0..4 {
                for sx in 0..4 {
                    let dx = x as f64 + (sx as f64 + 0.5) / 4.0 - 0.5 - r;
                    let dy = y as f64 + (sy as f64 + 0.5) / 4.0 - 0.5 - r;
                    if dx * dx + dy * dy <= r * r + 0.25 {
                        coverage += 1.0;
                    }
                }
            }
            weights[y * size + x] = coverage / 16.0;
        }
    }
    let sum: f64 = weights.iter().sum();
    let data = weights.into_iter().map(|w| cast::<S>(w / sum)).collect();
    Kernel::square(size, data).expect("disk kernel size is odd")
}

pub fn lens<S: Scalar>(img: &ImageBuffer<S>, i: usize) -> Result<ImageBuffer<S>> {
    convolve2d(img, &disk_kernel(LENS_RADIUS[i]), Border::Reflect)
}

pub fn motion_kernel_size(length: usize) -> usize {
    if length % 2 == 0 {
        length + 1
    } else {
        length
    }
}

/// Line kernel of the given length: dense samples along the segment are
/// splatted bilinearly onto the grid, then normalized.
fn line_kernel<S: Scalar>(length: usize, angle: f64) -> Kernel<S> {
    let size = motion_kernel_size(length);
    let center = (size / 2) as f64;
    let half = (length as f64 - 1.0) / 2.0;
    let (dy, dx) = angle.sin_cos();
    let mut weights = vec![0.0f64; size * size];
    let samples = length * 8;
    for s in 0..=samples {
        let t = -half + (s as f64 / samples as f64) * (2.0 * half);
        let x = center + t * dx;
        let y = center + t * dy;
        let x0 = x.floor() as isize;
        let y0 = y.floor() as isize;
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        for (oy, wy) in [(0isize, 1.0 - fy), (1, fy)] {
            for (ox, wx) in [(0isize, 1.0 - fx), (1, fx)] {
                let xx = x0 + ox;
                let yy = y0 + oy;
                if xx >= 0 && yy >= 0 && (xx as usize) < size && (yy as usize) < size {
                    weights[yy as usize * size + xx as usize] += wx * wy;
                }
            }
        }
    }
    let sum: f64 = weights.iter().sum();
    let data = weights.into_iter().map(|w| cast::<S>(w / sum)).collect();
    Kernel::square(size, data).expect("line kernel size is odd")
}

pub fn motion<S: Scalar>(img: &ImageBuffer<S>, i: usize, seed: u64) -> Result<ImageBuffer<S>> {
    // One direction per seed, shared by all levels of a ladder.
    let mut rng = derive_stream(seed, &["motion-blur", "angle"]);
    let angle: f64 = rng.gen::<f64>() * std::f64::consts::PI;
    convolve2d(img, &line_kernel(MOTION_LENGTH[i], angle), Border::Reflect)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_kernel_shape() {
        let k = disk_kernel::<f64>(3);
        assert_eq!((k.rows(), k.cols()), (7, 7));
    }

    #[test]
    fn motion_kernel_sizes_are_odd() {
        for len in MOTION_LENGTH {
            assert_eq!(motion_kernel_size(len) % 2, 1);
            assert!(motion_kernel_size(len) >= len);
        }
    }

    #[test]
    fn blur_reduces_gradient_energy() {
        let img = crate::procedural::synth_image::<f64>(64, 64, 9);
        let blurred = gaussian(&img, 2).unwrap();
        let energy = |im: &ImageBuffer<f64>| {
            let mut e = 0.0;
            for y in 0..im.height() {
                for x in 1..im.width() {
                    let d = im.get(x, y, 0) - im.get(x - 1, y, 0);
                    e += d * d;
                }
            }
            e
        };
        assert!(energy(&blurred) < energy(&img) * 0.5);
    }
}
