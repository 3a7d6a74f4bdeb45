//! Quality-aware image-text alignment at desk scale.
//!
//! The crate builds the full pipeline around a simple idea: synthetically
//! degrade overlapping crops of a pristine image with increasing intensity,
//! then train an encoder so that the similarity between the crop embeddings
//! and a bank of antonym prompt embeddings ranks with the degradation level.
//! A softmax over the positive/negative similarities yields a no-reference
//! quality score, and the evaluation module measures how well those scores
//! track ground truth (SRCC, logistic-fitted PLCC, intensity sweeps, gMAD).
//!
//! Modules map onto the pipeline stages:
//!
//! - [`imaging`]: float image buffers, color conversions, filtering,
//!   resampling, PSNR, PNG/JPEG I/O.
//! - [`degradations`]: the 24 synthetic distortions in 7 groups, each with
//!   5 deterministic, strictly ordered intensity levels.
//! - [`sampling`]: overlapping crop pairs, degradation ladders, and corpus
//!   generation from a dataset manifest.
//! - [`alignment`]: the three margin ranking losses, the toy differentiable
//!   encoder, training, and gradient checking.
//! - [`scoring`]: the softmax quality score and batch scoring.
//! - [`evaluation`]: SRCC, four-parameter logistic fitting, PLCC, intensity
//!   sweeps, and gMAD pair selection.
//! - [`store`]: the binary embedding-store file format shared by prompt
//!   banks, model parameters, and precomputed image features.
//! - [`procedural`]: seeded synthetic pristine images for tests and demos.
//!
//! All numeric kernels are generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below pin the two instantiations used throughout the CLI.

pub mod alignment;
pub mod degradations;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod procedural;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod scoring;
pub mod store;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Single-precision image, the default for the degradation pipeline.
pub type ImageF32 = imaging::ImageBuffer<f32>;
/// Double-precision image, used where metric tolerances are tight.
pub type ImageF64 = imaging::ImageBuffer<f64>;

/// Single-precision embedding (matches the on-disk store payload).
pub type EmbeddingF32 = alignment::Embedding<f32>;
/// Double-precision embedding, used by the gradient checker.
pub type EmbeddingF64 = alignment::Embedding<f64>;
