//! Image representation and the pixel-level operations every distortion is
//! built from.
//!
//! Images are held as row-major `height x width x 3` float buffers with all
//! channel values in `[0, 1]`. 8-bit files are decoded as `v / 255` and
//! encoded as `round(v * 255)`; quantization happens only at file
//! boundaries.

mod color;
mod filter;
mod io;
mod metrics;
mod resample;

pub use color::{convert_colorspace, ColorSpace};
pub use filter::{
    convolve2d, convolve2d_plane, gaussian_blur, gaussian_blur_plane, gaussian_kernel_1d, Border, Kernel,
};
pub use io::{decode_image, encode_image};
pub use metrics::{mse, psnr};
pub use resample::{resample, ResampleMethod};

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// H x W x 3 floating-point image, channel values in `[0, 1]`.
///
/// Layout is row-major with interleaved channels: index
/// `(y * width + x) * 3 + c`. Producers are responsible for clamping; every
/// public operation in this crate returns buffers that satisfy the range
/// invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer<S> {
    height: usize,
    width: usize,
    data: Vec<S>,
}

impl<S: Scalar> ImageBuffer<S> {
    /// Wraps an existing buffer. `data.len()` must equal `width * height * 3`.
    pub fn from_data(width: usize, height: usize, data: Vec<S>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be at least 1x1"));
        }
        if data.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "data length {} does not match {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { height, width, data })
    }

    /// Constant-valued image.
    pub fn filled(width: usize, height: usize, value: S) -> Self {
        Self { height, width, data: vec![value; width * height * 3] }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, S::zero())
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> S {
        self.data[(y * self.width + x) * 3 + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: S) {
        self.data[(y * self.width + x) * 3 + c] = v;
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [S; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, p: [S; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i] = p[0];
        self.data[i + 1] = p[1];
        self.data[i + 2] = p[2];
    }

    /// Applies `f` to every pixel, producing a new image.
    pub fn map_pixels(&self, mut f: impl FnMut([S; 3]) -> [S; 3]) -> Self {
        let mut out = self.clone();
        for px in out.data.chunks_exact_mut(3) {
            let [r, g, b] = f([px[0], px[1], px[2]]);
            px[0] = r;
            px[1] = g;
            px[2] = b;
        }
        out
    }

    /// One channel as a contiguous plane, for single-channel filtering.
    pub fn channel_plane(&self, c: usize) -> Vec<S> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    pub fn set_channel_plane(&mut self, c: usize, plane: &[S]) {
        debug_assert_eq!(plane.len(), self.width * self.height);
        for (dst, &v) in self.data.iter_mut().skip(c).step_by(3).zip(plane) {
            *dst = v;
        }
    }

    /// Clamps every value into `[0, 1]`.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = clamp01(*v);
        }
    }

    /// Axis-aligned crop. The rectangle must lie inside the image.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::invalid(format!(
                "crop {}x{}+{}+{} outside {}x{} image",
                w, h, x, y, self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h * 3);
        for row in y..y + h {
            let start = (row * self.width + x) * 3;
            data.extend_from_slice(&self.data[start..start + w * 3]);
        }
        Ok(Self { height: h, width: w, data })
    }

    /// Snaps every value onto the 8-bit grid (`round(v * 255) / 255`), the
    /// same quantization a PNG write/read round trip applies.
    pub fn quantize_u8_grid(&mut self) {
        let max = cast::<S>(255.0);
        for v in &mut self.data {
            *v = (clamp01(*v) * max).round() / max;
        }
    }

    /// Converts the buffer to another scalar type.
    pub fn cast_to<T: Scalar>(&self) -> ImageBuffer<T> {
        ImageBuffer {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|v| T::from_f64(v.to_f64().unwrap_or(0.0)).unwrap()).collect(),
        }
    }

    /// Interleaved 8-bit RGB bytes (`round(v * 255)`).
    pub fn to_u8_rgb(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (clamp01(v) * cast::<S>(255.0)).round().to_f64().unwrap() as u8)
            .collect()
    }

    /// Builds an image from interleaved 8-bit RGB bytes (`v / 255`).
    pub fn from_u8_rgb(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let max = cast::<S>(255.0);
        let data = bytes.iter().map(|&b| cast::<S>(b as f64) / max).collect();
        Self::from_data(width, height, data)
    }

    /// BT.601 luma plane, the basis for histograms and gradient masks.
    pub fn luma_plane(&self) -> Vec<S> {
        let (wr, wg, wb) = (cast::<S>(0.299), cast::<S>(0.587), cast::<S>(0.114));
        self.data
            .chunks_exact(3)
            .map(|px| wr * px[0] + wg * px[1] + wb * px[2])
            .collect()
    }
}

#[inline]
pub(crate) fn clamp01<S: Scalar>(v: S) -> S {
    if v < S::zero() {
        S::zero()
    } else if v > S::one() {
        S::one()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_data_rejects_bad_shapes() {
        assert!(ImageBuffer::<f32>::from_data(0, 4, vec![]).is_err());
        assert!(ImageBuffer::<f32>::from_data(2, 2, vec![0.0; 11]).is_err());
        assert!(ImageBuffer::<f32>::from_data(2, 2, vec![0.0; 12]).is_ok());
    }

    #[test]
    fn crop_bounds_checked() {
        let img = ImageBuffer::<f32>::filled(4, 4, 0.5);
        assert!(img.crop(2, 2, 3, 1).is_err());
        let c = img.crop(1, 1, 2, 2).unwrap();
        assert_eq!((c.width(), c.height()), (2, 2));
    }

    #[test]
    fn u8_round_trip_is_exact_on_grid() {
        let mut img = ImageBuffer::<f32>::filled(3, 2, 0.4);
        img.quantize_u8_grid();
        let bytes = img.to_u8_rgb();
        let back = ImageBuffer::<f32>::from_u8_rgb(3, 2, &bytes).unwrap();
        assert_eq!(img, back);
    }
}
