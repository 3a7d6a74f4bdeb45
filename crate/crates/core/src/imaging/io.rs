//! PNG and baseline JPEG file I/O. Anything else is rejected with an error
//! naming the path.

use std::path::Path;

use image::{ImageFormat, ImageReader};

use super::ImageBuffer;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn format_for(path: &Path) -> Result<ImageFormat> {
    match ImageFormat::from_path(path) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Jpeg)) => Ok(f),
        _ => Err(Error::Image {
            path: path.to_path_buf(),
            message: "unsupported image format; only PNG and baseline JPEG are handled".into(),
        }),
    }
}

/// Decodes a PNG or baseline JPEG file into a float image (`v / 255`).
pub fn decode_image<S: Scalar>(path: impl AsRef<Path>) -> Result<ImageBuffer<S>> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = reader;
    reader.set_format(format);
    let decoded = reader
        .decode()
        .map_err(|e| Error::Image { path: path.to_path_buf(), message: e.to_string() })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    ImageBuffer::from_u8_rgb(w, h, rgb.as_raw())
}

/// Encodes as PNG or JPEG depending on the extension (`round(v * 255)`).
pub fn encode_image<S: Scalar>(path: impl AsRef<Path>, img: &ImageBuffer<S>) -> Result<()> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let bytes = img.to_u8_rgb();
    let buffer: image::RgbImage =
        image::ImageBuffer::from_raw(img.width() as u32, img.height() as u32, bytes)
            .expect("buffer length matches dimensions");
    buffer
        .save_with_format(path, format)
        .map_err(|e| Error::Image { path: path.to_path_buf(), message: e.to_string() })
}
