//! Color-space conversions: sRGB (D65) <-> CIELAB, RGB <-> HSV, and
//! RGB <-> full-range BT.601 YCbCr.
//!
//! Non-RGB channels are rescaled into `[0, 1]` for storage uniformity:
//! `L/100`, `(a+128)/255`, `(b+128)/255` for LAB; hue as a fraction of a
//! full turn for HSV; chroma offset by 0.5 for YCbCr.

use super::{clamp01, ImageBuffer};
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    Rgb,
    Lab,
    Hsv,
    YCbCr,
}

impl ColorSpace {
    pub fn name(self) -> &'static str {
        match self {
            ColorSpace::Rgb => "RGB",
            ColorSpace::Lab => "LAB",
            ColorSpace::Hsv => "HSV",
            ColorSpace::YCbCr => "YCbCr",
        }
    }
}

/// Converts between color encodings. Supported pairs are RGB <-> LAB,
/// RGB <-> HSV, RGB <-> YCbCr, and the identity; anything else is an
/// invalid-argument error.
pub fn convert_colorspace<S: Scalar>(
    img: &ImageBuffer<S>,
    source: ColorSpace,
    target: ColorSpace,
) -> Result<ImageBuffer<S>> {
    use ColorSpace::*;
    let per_pixel: fn([S; 3]) -> [S; 3] = match (source, target) {
        (a, b) if a == b => return Ok(img.clone()),
        (Rgb, Lab) => rgb_to_lab,
        (Lab, Rgb) => lab_to_rgb,
        (Rgb, Hsv) => rgb_to_hsv,
        (Hsv, Rgb) => hsv_to_rgb,
        (Rgb, YCbCr) => rgb_to_ycbcr,
        (YCbCr, Rgb) => ycbcr_to_rgb,
        (a, b) => {
            return Err(Error::invalid(format!(
                "unsupported color conversion {} -> {}",
                a.name(),
                b.name()
            )))
        }
    };
    Ok(img.map_pixels(|px| {
        let out = per_pixel(px);
        [clamp01(out[0]), clamp01(out[1]), clamp01(out[2])]
    }))
}

#[inline]
fn srgb_decode<S: Scalar>(v: S) -> S {
    if v <= cast(0.04045) {
        v / cast(12.92)
    } else {
        ((v + cast(0.055)) / cast(1.055)).powf(cast(2.4))
    }
}

#[inline]
fn srgb_encode<S: Scalar>(v: S) -> S {
    if v <= cast(0.0031308) {
        v * cast(12.92)
    } else {
        cast::<S>(1.055) * v.max(S::zero()).powf(cast(1.0 / 2.4)) - cast(0.055)
    }
}

// D65 reference white.
const XN: f64 = 0.95047;
const YN: f64 = 1.0;
const ZN: f64 = 1.08883;

#[inline]
fn lab_f<S: Scalar>(t: S) -> S {
    let delta = cast::<S>(6.0 / 29.0);
    if t > delta.powi(3) {
        t.cbrt()
    } else {
        t / (cast::<S>(3.0) * delta * delta) + cast(4.0 / 29.0)
    }
}

#[inline]
fn lab_f_inv<S: Scalar>(t: S) -> S {
    let delta = cast::<S>(6.0 / 29.0);
    if t > delta {
        t.powi(3)
    } else {
        cast::<S>(3.0) * delta * delta * (t - cast(4.0 / 29.0))
    }
}

fn rgb_to_lab<S: Scalar>([r, g, b]: [S; 3]) -> [S; 3] {
    let (r, g, b) = (srgb_decode(r), srgb_decode(g), srgb_decode(b));
    let x = cast::<S>(0.4124564) * r + cast::<S>(0.3575761) * g + cast::<S>(0.1804375) * b;
    let y = cast::<S>(0.2126729) * r + cast::<S>(0.7151522) * g + cast::<S>(0.0721750) * b;
    let z = cast::<S>(0.0193339) * r + cast::<S>(0.1191920) * g + cast::<S>(0.9503041) * b;
    let fx = lab_f(x / cast(XN));
    let fy = lab_f(y / cast(YN));
    let fz = lab_f(z / cast(ZN));
    let l = cast::<S>(116.0) * fy - cast(16.0);
    let a = cast::<S>(500.0) * (fx - fy);
    let bb = cast::<S>(200.0) * (fy - fz);
    [l / cast(100.0), (a + cast(128.0)) / cast(255.0), (bb + cast(128.0)) / cast(255.0)]
}

fn lab_to_rgb<S: Scalar>([ls, as_, bs]: [S; 3]) -> [S; 3] {
    let l = ls * cast(100.0);
    let a = as_ * cast::<S>(255.0) - cast(128.0);
    let b = bs * cast::<S>(255.0) - cast(128.0);
    let fy = (l + cast(16.0)) / cast(116.0);
    let fx = fy + a / cast(500.0);
    let fz = fy - b / cast(200.0);
    let x = cast::<S>(XN) * lab_f_inv(fx);
    let y = cast::<S>(YN) * lab_f_inv(fy);
    let z = cast::<S>(ZN) * lab_f_inv(fz);
    let r = cast::<S>(3.2404542) * x - cast::<S>(1.5371385) * y - cast::<S>(0.4985314) * z;
    let g = cast::<S>(-0.9692660) * x + cast::<S>(1.8760108) * y + cast::<S>(0.0415560) * z;
    let bb = cast::<S>(0.0556434) * x - cast::<S>(0.2040259) * y + cast::<S>(1.0572252) * z;
    [srgb_encode(r), srgb_encode(g), srgb_encode(bb)]
}

fn rgb_to_hsv<S: Scalar>([r, g, b]: [S; 3]) -> [S; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > S::zero() { delta / max } else { S::zero() };
    let h = if delta == S::zero() {
        S::zero()
    } else {
        let six = cast::<S>(6.0);
        let h6 = if max == r {
            ((g - b) / delta).rem(six)
        } else if max == g {
            (b - r) / delta + cast(2.0)
        } else {
            (r - g) / delta + cast(4.0)
        };
        let h = h6 / six;
        if h < S::zero() {
            h + S::one()
        } else {
            h
        }
    };
    [h, s, v]
}

fn hsv_to_rgb<S: Scalar>([h, s, v]: [S; 3]) -> [S; 3] {
    if s == S::zero() {
        return [v, v, v];
    }
    let six = cast::<S>(6.0);
    let h6 = (h * six).rem(six);
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (S::one() - s);
    let q = v * (S::one() - s * f);
    let t = v * (S::one() - s * (S::one() - f));
    match sector.to_i32().unwrap_or(0) {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

fn rgb_to_ycbcr<S: Scalar>([r, g, b]: [S; 3]) -> [S; 3] {
    let y = cast::<S>(0.299) * r + cast::<S>(0.587) * g + cast::<S>(0.114) * b;
    let cb = cast::<S>(0.5) + (b - y) / cast(1.772);
    let cr = cast::<S>(0.5) + (r - y) / cast(1.402);
    [y, cb, cr]
}

fn ycbcr_to_rgb<S: Scalar>([y, cb, cr]: [S; 3]) -> [S; 3] {
    let r = y + cast::<S>(1.402) * (cr - cast(0.5));
    let b = y + cast::<S>(1.772) * (cb - cast(0.5));
    let g = (y - cast::<S>(0.299) * r - cast::<S>(0.114) * b) / cast(0.587);
    [r, g, b]
}
