//! Image resizing with pixel-center alignment: a destination pixel samples
//! the source at `(dst + 0.5) * scale - 0.5`.

use super::{clamp01, ImageBuffer};
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleMethod {
    Nearest,
    Bilinear,
    Bicubic,
}

pub fn resample<S: Scalar>(
    img: &ImageBuffer<S>,
    out_w: usize,
    out_h: usize,
    method: ResampleMethod,
) -> Result<ImageBuffer<S>> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::invalid("resample target dimensions must be at least 1x1"));
    }
    let (src_w, src_h) = (img.width(), img.height());
    let scale_x = src_w as f64 / out_w as f64;
    let scale_y = src_h as f64 / out_h as f64;
    let mut out = ImageBuffer::zeros(out_w, out_h);
    for y in 0..out_h {
        let sy = (y as f64 + 0.5) * scale_y - 0.5;
        for x in 0..out_w {
            let sx = (x as f64 + 0.5) * scale_x - 0.5;
            let px = match method {
                ResampleMethod::Nearest => sample_nearest(img, sx, sy),
                ResampleMethod::Bilinear => sample_bilinear(img, sx, sy),
                ResampleMethod::Bicubic => sample_bicubic(img, sx, sy),
            };
            out.set_pixel(x, y, px);
        }
    }
    Ok(out)
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

fn sample_nearest<S: Scalar>(img: &ImageBuffer<S>, sx: f64, sy: f64) -> [S; 3] {
    let x = clamp_index((sx + 0.5).floor() as isize, img.width());
    let y = clamp_index((sy + 0.5).floor() as isize, img.height());
    img.pixel(x, y)
}

fn sample_bilinear<S: Scalar>(img: &ImageBuffer<S>, sx: f64, sy: f64) -> [S; 3] {
    let sx = sx.clamp(0.0, img.width() as f64 - 1.0);
    let sy = sy.clamp(0.0, img.height() as f64 - 1.0);
    let x0 = sx.floor() as usize;
    let y0 = sy.floor() as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let tx = cast::<S>(sx - x0 as f64);
    let ty = cast::<S>(sy - y0 as f64);
    let one = S::one();
    let mut px = [S::zero(); 3];
    for (c, out) in px.iter_mut().enumerate() {
        let top = img.get(x0, y0, c) * (one - tx) + img.get(x1, y0, c) * tx;
        let bottom = img.get(x0, y1, c) * (one - tx) + img.get(x1, y1, c) * tx;
        *out = top * (one - ty) + bottom * ty;
    }
    px
}

// Catmull-Rom cubic (a = -0.5).
fn cubic_weight(t: f64) -> f64 {
    let a = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a
    } else {
        0.0
    }
}

fn sample_bicubic<S: Scalar>(img: &ImageBuffer<S>, sx: f64, sy: f64) -> [S; 3] {
    let sx = sx.clamp(0.0, img.width() as f64 - 1.0);
    let sy = sy.clamp(0.0, img.height() as f64 - 1.0);
    let x0 = sx.floor() as isize;
    let y0 = sy.floor() as isize;
    let fx = sx - x0 as f64;
    let fy = sy - y0 as f64;
    let mut px = [0.0f64; 3];
    for j in -1..=2isize {
        let wy = cubic_weight(j as f64 - fy);
        if wy == 0.0 {
            continue;
        }
        let yy = clamp_index(y0 + j, img.height());
        for i in -1..=2isize {
            let wx = cubic_weight(i as f64 - fx);
            if wx == 0.0 {
                continue;
            }
            let xx = clamp_index(x0 + i, img.width());
            let w = wx * wy;
            for (c, acc) in px.iter_mut().enumerate() {
                *acc += w * img.get(xx, yy, c).to_f64().unwrap();
            }
        }
    }
    [clamp01(cast(px[0])), clamp01(cast(px[1])), clamp01(cast(px[2]))]
}
