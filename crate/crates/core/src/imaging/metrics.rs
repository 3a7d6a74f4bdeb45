//! Fidelity metrics against a reference image.

use super::ImageBuffer;
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Mean squared error over all channels, accumulated in f64.
pub fn mse<S: Scalar>(a: &ImageBuffer<S>, b: &ImageBuffer<S>) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::invalid(format!(
            "shape mismatch: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x.to_f64().unwrap() - y.to_f64().unwrap();
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// Peak signal-to-noise ratio in decibels with peak 1.0.
///
/// A zero MSE (identical images) is reported as the sentinel
/// `S::max_value()`, the largest finite value of the scalar type, so that
/// reports stay serializable.
pub fn psnr<S: Scalar>(a: &ImageBuffer<S>, b: &ImageBuffer<S>) -> Result<S> {
    let err = mse(a, b)?;
    if err == 0.0 {
        return Ok(S::max_value());
    }
    Ok(cast(-10.0 * err.log10()))
}
