//! The 24 synthetic distortions, organized into 7 groups, each with 5
//! strictly ordered intensity levels.
//!
//! Applying a distortion is a pure function of `(image, kind, level, seed)`.
//! Stochastic kinds draw their random structure (noise fields, patch
//! positions, directions) from a stream derived from the seed but *not*
//! from the level; the level only scales the magnitude or count. Ladders
//! built with a shared seed therefore degrade the same underlying pattern
//! harder and harder, which keeps severity strictly ordered.

mod blur;
mod brightness;
mod color;
mod compression;
mod noise;
mod sharpness;
mod spatial;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::scalar::Scalar;

/// The 7 distortion groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistortionGroup {
    BrightnessChange,
    Blur,
    Spatial,
    Noise,
    Color,
    Compression,
    SharpnessContrast,
}

impl DistortionGroup {
    pub const ALL: [DistortionGroup; 7] = [
        DistortionGroup::BrightnessChange,
        DistortionGroup::Blur,
        DistortionGroup::Spatial,
        DistortionGroup::Noise,
        DistortionGroup::Color,
        DistortionGroup::Compression,
        DistortionGroup::SharpnessContrast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistortionGroup::BrightnessChange => "brightness-change",
            DistortionGroup::Blur => "blur",
            DistortionGroup::Spatial => "spatial",
            DistortionGroup::Noise => "noise",
            DistortionGroup::Color => "color",
            DistortionGroup::Compression => "compression",
            DistortionGroup::SharpnessContrast => "sharpness-contrast",
        }
    }

    /// Kinds belonging to this group, in catalogue order.
    pub fn kinds(self) -> impl Iterator<Item = DistortionKind> {
        DistortionKind::ALL.iter().copied().filter(move |k| k.group() == self)
    }
}

/// The 24 distortion kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistortionKind {
    Brighten,
    Darken,
    MeanShift,
    GaussianBlur,
    LensBlur,
    MotionBlur,
    Jitter,
    NonEccentricityPatch,
    Pixelate,
    Quantization,
    ColorBlock,
    WhiteNoise,
    WhiteNoiseColorComponent,
    ImpulseNoise,
    MultiplicativeNoise,
    ColorDiffusion,
    ColorShift,
    ColorSaturation1,
    ColorSaturation2,
    Jpeg2000,
    Jpeg,
    HighSharpen,
    NonlinearContrastChange,
    LinearContrastChange,
}

impl DistortionKind {
    /// All kinds in the stable catalogue order (group order, then the kinds
    /// within each group).
    pub const ALL: [DistortionKind; 24] = [
        DistortionKind::Brighten,
        DistortionKind::Darken,
        DistortionKind::MeanShift,
        DistortionKind::GaussianBlur,
        DistortionKind::LensBlur,
        DistortionKind::MotionBlur,
        DistortionKind::Jitter,
        DistortionKind::NonEccentricityPatch,
        DistortionKind::Pixelate,
        DistortionKind::Quantization,
        DistortionKind::ColorBlock,
        DistortionKind::WhiteNoise,
        DistortionKind::WhiteNoiseColorComponent,
        DistortionKind::ImpulseNoise,
        DistortionKind::MultiplicativeNoise,
        DistortionKind::ColorDiffusion,
        DistortionKind::ColorShift,
        DistortionKind::ColorSaturation1,
        DistortionKind::ColorSaturation2,
        DistortionKind::Jpeg2000,
        DistortionKind::Jpeg,
        DistortionKind::HighSharpen,
        DistortionKind::NonlinearContrastChange,
        DistortionKind::LinearContrastChange,
    ];

    pub fn group(self) -> DistortionGroup {
        use DistortionKind::*;
        match self {
            Brighten | Darken | MeanShift => DistortionGroup::BrightnessChange,
            GaussianBlur | LensBlur | MotionBlur => DistortionGroup::Blur,
            Jitter | NonEccentricityPatch | Pixelate | Quantization | ColorBlock => {
                DistortionGroup::Spatial
            }
            WhiteNoise | WhiteNoiseColorComponent | ImpulseNoise | MultiplicativeNoise => {
                DistortionGroup::Noise
            }
            ColorDiffusion | ColorShift | ColorSaturation1 | ColorSaturation2 => {
                DistortionGroup::Color
            }
            Jpeg2000 | Jpeg => DistortionGroup::Compression,
            HighSharpen | NonlinearContrastChange | LinearContrastChange => {
                DistortionGroup::SharpnessContrast
            }
        }
    }

    /// Stable kebab-case name used by the CLI and sidecar records.
    pub fn name(self) -> &'static str {
        use DistortionKind::*;
        match self {
            Brighten => "brighten",
            Darken => "darken",
            MeanShift => "mean-shift",
            GaussianBlur => "gaussian-blur",
            LensBlur => "lens-blur",
            MotionBlur => "motion-blur",
            Jitter => "jitter",
            NonEccentricityPatch => "non-eccentricity-patch",
            Pixelate => "pixelate",
            Quantization => "quantization",
            ColorBlock => "color-block",
            WhiteNoise => "white-noise",
            WhiteNoiseColorComponent => "white-noise-color-component",
            ImpulseNoise => "impulse-noise",
            MultiplicativeNoise => "multiplicative-noise",
            ColorDiffusion => "color-diffusion",
            ColorShift => "color-shift",
            ColorSaturation1 => "color-saturation-1",
            ColorSaturation2 => "color-saturation-2",
            Jpeg2000 => "jpeg2000",
            Jpeg => "jpeg",
            HighSharpen => "high-sharpen",
            NonlinearContrastChange => "nonlinear-contrast-change",
            LinearContrastChange => "linear-contrast-change",
        }
    }

    pub fn description(self) -> &'static str {
        use DistortionKind::*;
        match self {
            Brighten => "brightens via blended gamma curves in RGB and on the LAB L channel",
            Darken => "darkens via blended gamma curves in RGB and on the LAB L channel",
            MeanShift => "adds a constant offset to every channel, then clamps",
            GaussianBlur => "separable Gaussian blur",
            LensBlur => "circular (disk) kernel blur",
            MotionBlur => "linear motion blur along a seed-chosen direction",
            Jitter => "warps each pixel by a small random offset",
            NonEccentricityPatch => "relocates random patches to nearby positions",
            Pixelate => "nearest-neighbor downscale followed by nearest-neighbor upscale",
            Quantization => "quantizes channels into N bands with Multi-Otsu thresholds",
            ColorBlock => "superimposes uniformly colored random squares",
            WhiteNoise => "additive Gaussian noise in RGB",
            WhiteNoiseColorComponent => "additive Gaussian noise per YCbCr channel",
            ImpulseNoise => "salt-and-pepper noise",
            MultiplicativeNoise => "speckle noise: x * (1 + n)",
            ColorDiffusion => "Gaussian blur on the LAB a/b channels",
            ColorShift => "shifts the green channel, blended through a gradient-magnitude mask",
            ColorSaturation1 => "scales the HSV saturation channel down",
            ColorSaturation2 => "scales the LAB color channels up",
            Jpeg2000 => "wavelet coefficient thresholding compression artifacts",
            Jpeg => "8x8 DCT quantization compression artifacts",
            HighSharpen => "unsharp masking on the LAB L channel",
            NonlinearContrastChange => "smoothstep tone curve blended per channel",
            LinearContrastChange => "linear tone curve y = a*(x-0.5)+0.5",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        DistortionKind::ALL.iter().copied().find(|k| k.name() == name).ok_or_else(|| {
            let all: Vec<&str> = DistortionKind::ALL.iter().map(|k| k.name()).collect();
            Error::invalid(format!(
                "unknown distortion kind '{name}'; valid kinds: {}",
                all.join(", ")
            ))
        })
    }

    /// Kinds whose output depends on the seed. For the rest, any seed
    /// produces the same image.
    pub fn is_stochastic(self) -> bool {
        use DistortionKind::*;
        matches!(
            self,
            MotionBlur
                | Jitter
                | NonEccentricityPatch
                | ColorBlock
                | WhiteNoise
                | WhiteNoiseColorComponent
                | ImpulseNoise
                | MultiplicativeNoise
                | ColorShift
        )
    }

    /// Smallest image side the kind supports at the given level (kernel
    /// footprints and patch sizes set the floor).
    pub fn min_dimension(self, level: IntensityLevel) -> usize {
        use DistortionKind::*;
        let i = level.index();
        let floor = match self {
            GaussianBlur => gaussian_kernel_size(blur::GAUSSIAN_SIGMA[i]),
            LensBlur => 2 * blur::LENS_RADIUS[i] + 1,
            MotionBlur => blur::motion_kernel_size(blur::MOTION_LENGTH[i]),
            ColorDiffusion => gaussian_kernel_size(color::DIFFUSION_SIGMA[i]),
            HighSharpen => gaussian_kernel_size(sharpness::SHARPEN_SIGMA),
            NonEccentricityPatch => spatial::PATCH_SIZE,
            _ => 1,
        };
        floor.max(8)
    }
}

pub(crate) fn gaussian_kernel_size(sigma: f64) -> usize {
    2 * (3.0 * sigma).ceil() as usize + 1
}

/// Intensity level in `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntensityLevel(u8);

impl IntensityLevel {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(level: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&level) {
            Ok(Self(level))
        } else {
            Err(Error::invalid(format!(
                "intensity level must be in {}..={}, got {level}",
                Self::MIN,
                Self::MAX
            )))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based index into severity ladders.
    #[inline]
    pub(crate) fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn all() -> impl Iterator<Item = IntensityLevel> {
        (Self::MIN..=Self::MAX).map(IntensityLevel)
    }
}

/// One catalogue entry: group, kind, human description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KindInfo {
    pub group: DistortionGroup,
    pub kind: DistortionKind,
    pub description: &'static str,
}

/// All 24 kinds in the stable documented order.
pub fn list_kinds() -> Vec<KindInfo> {
    DistortionKind::ALL
        .iter()
        .map(|&kind| KindInfo { group: kind.group(), kind, description: kind.description() })
        .collect()
}

/// Applies `kind` at `level` to `img`. Pure in `(img, kind, level, seed)`:
/// the same arguments always produce a bit-identical image of the same
/// dimensions, with every value in `[0, 1]`.
pub fn apply_distortion<S: Scalar>(
    img: &ImageBuffer<S>,
    kind: DistortionKind,
    level: IntensityLevel,
    seed: u64,
) -> Result<ImageBuffer<S>> {
    let min_dim = kind.min_dimension(level);
    if img.width() < min_dim || img.height() < min_dim {
        return Err(Error::invalid(format!(
            "image {}x{} too small for {} at level {}; minimum side is {min_dim}",
            img.width(),
            img.height(),
            kind.name(),
            level.get()
        )));
    }
    let i = level.index();
    use DistortionKind::*;
    let out = match kind {
        Brighten => brightness::brighten(img, i)?,
        Darken => brightness::darken(img, i)?,
        MeanShift => brightness::mean_shift(img, i),
        GaussianBlur => blur::gaussian(img, i)?,
        LensBlur => blur::lens(img, i)?,
        MotionBlur => blur::motion(img, i, seed)?,
        Jitter => spatial::jitter(img, i, seed),
        NonEccentricityPatch => spatial::non_eccentricity_patch(img, i, seed),
        Pixelate => spatial::pixelate(img, i)?,
        Quantization => spatial::quantization(img, i),
        ColorBlock => spatial::color_block(img, i, seed),
        WhiteNoise => noise::white(img, i, seed),
        WhiteNoiseColorComponent => noise::white_color_component(img, i, seed)?,
        ImpulseNoise => noise::impulse(img, i, seed),
        MultiplicativeNoise => noise::multiplicative(img, i, seed),
        ColorDiffusion => color::diffusion(img, i)?,
        ColorShift => color::shift(img, i, seed)?,
        ColorSaturation1 => color::saturation_hsv(img, i)?,
        ColorSaturation2 => color::saturation_lab(img, i)?,
        Jpeg2000 => compression::jpeg2000(img, i),
        Jpeg => compression::jpeg(img, i)?,
        HighSharpen => sharpness::high_sharpen(img, i)?,
        NonlinearContrastChange => sharpness::nonlinear_contrast(img, i),
        LinearContrastChange => sharpness::linear_contrast(img, i),
    };
    debug_assert_eq!((out.width(), out.height()), (img.width(), img.height()));
    Ok(out)
}
