//! 2-D correlation with mirrored borders, plus the kernel constructors the
//! distortions share.

use super::{clamp01, ImageBuffer};
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Border handling for filtering. `Reflect` mirrors the image at the edge
/// with the edge pixel included: `[a b c ...]` is padded as `[b a | a b c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    Reflect,
}

/// Odd-sized correlation kernel (rows x cols).
#[derive(Debug, Clone)]
pub struct Kernel<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Kernel<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if rows % 2 == 0 || cols % 2 == 0 {
            return Err(Error::invalid(format!("kernel dimensions must be odd, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "kernel data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn square(size: usize, data: Vec<S>) -> Result<Self> {
        Self::new(size, size, data)
    }

    /// Horizontal 1 x n kernel.
    pub fn row(data: Vec<S>) -> Result<Self> {
        let n = data.len();
        Self::new(1, n, data)
    }

    /// Vertical n x 1 kernel.
    pub fn column(data: Vec<S>) -> Result<Self> {
        let n = data.len();
        Self::new(n, 1, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Nonzero taps as (dy, dx, weight) relative to the kernel center.
    /// Sparse kernels (motion-blur lines) filter much faster this way.
    fn taps(&self) -> Vec<(isize, isize, S)> {
        let (cy, cx) = (self.rows as isize / 2, self.cols as isize / 2);
        let mut taps = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let w = self.data[r * self.cols + c];
                if w != S::zero() {
                    taps.push((r as isize - cy, c as isize - cx, w));
                }
            }
        }
        taps
    }
}

#[inline]
fn mirror(i: isize, n: usize) -> usize {
    // Symmetric reflection with the edge pixel included; valid for
    // |overshoot| <= n, which the kernel-size precondition guarantees.
    let n = n as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= n {
        2 * n - 1 - i
    } else {
        i
    };
    j.clamp(0, n - 1) as usize
}

/// Per-channel 2-D correlation with mirrored borders, clamped to `[0, 1]`.
///
/// Kernel dimensions must be odd and no larger than the image along each
/// axis.
pub fn convolve2d<S: Scalar>(
    img: &ImageBuffer<S>,
    kernel: &Kernel<S>,
    border: Border,
) -> Result<ImageBuffer<S>> {
    if kernel.rows > img.height() || kernel.cols > img.width() {
        return Err(Error::invalid(format!(
            "kernel {}x{} larger than image {}x{}",
            kernel.rows,
            kernel.cols,
            img.height(),
            img.width()
        )));
    }
    let (w, h) = (img.width(), img.height());
    let taps = kernel.taps();
    let mut out = ImageBuffer::zeros(w, h);
    let src = img.data();
    let dst = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [S::zero(); 3];
            for &(dy, dx, wt) in &taps {
                let sy = mirror(y as isize + dy, h);
                let sx = mirror(x as isize + dx, w);
                let base = (sy * w + sx) * 3;
                acc[0] = acc[0] + wt * src[base];
                acc[1] = acc[1] + wt * src[base + 1];
                acc[2] = acc[2] + wt * src[base + 2];
            }
            let base = (y * w + x) * 3;
            dst[base] = clamp01(acc[0]);
            dst[base + 1] = clamp01(acc[1]);
            dst[base + 2] = clamp01(acc[2]);
        }
    }
    let _ = border; // single supported mode
    Ok(out)
}

/// Single-plane variant without clamping, for masks and per-channel work.
pub fn convolve2d_plane<S: Scalar>(
    plane: &[S],
    width: usize,
    height: usize,
    kernel: &Kernel<S>,
) -> Result<Vec<S>> {
    if kernel.rows > height || kernel.cols > width {
        return Err(Error::invalid(format!(
            "kernel {}x{} larger than plane {}x{}",
            kernel.rows, kernel.cols, height, width
        )));
    }
    if plane.len() != width * height {
        return Err(Error::invalid("plane length does not match dimensions"));
    }
    let taps = kernel.taps();
    let mut out = vec![S::zero(); plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = S::zero();
            for &(dy, dx, wt) in &taps {
                let sy = mirror(y as isize + dy, height);
                let sx = mirror(x as isize + dx, width);
                acc = acc + wt * plane[sy * width + sx];
            }
            out[y * width + x] = acc;
        }
    }
    Ok(out)
}

/// Normalized 1-D Gaussian, size `2*ceil(3*sigma) + 1`.
pub fn gaussian_kernel_1d<S: Scalar>(sigma: f64) -> Vec<S> {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as isize;
    let mut weights: Vec<f64> =
        (-radius..=radius).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    weights.into_iter().map(cast).collect()
}

/// Separable Gaussian blur (two 1-D passes with mirrored borders).
pub fn gaussian_blur<S: Scalar>(img: &ImageBuffer<S>, sigma: f64) -> Result<ImageBuffer<S>> {
    let weights = gaussian_kernel_1d::<S>(sigma);
    let horizontal = convolve2d(img, &Kernel::row(weights.clone())?, Border::Reflect)?;
    convolve2d(&horizontal, &Kernel::column(weights)?, Border::Reflect)
}

/// Single-plane separable Gaussian blur, unclamped.
pub fn gaussian_blur_plane<S: Scalar>(
    plane: &[S],
    width: usize,
    height: usize,
    sigma: f64,
) -> Result<Vec<S>> {
    let weights = gaussian_kernel_1d::<S>(sigma);
    let horizontal = convolve2d_plane(plane, width, height, &Kernel::row(weights.clone())?)?;
    convolve2d_plane(&horizontal, width, height, &Kernel::column(weights)?)
}
