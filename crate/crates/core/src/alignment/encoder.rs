//! The toy differentiable image encoder: two strided 3x3 convolutions with
//! softplus nonlinearities, global average pooling, an affine map to the
//! embedding dimension, and L2 normalization. Small enough to train on a
//! CPU in minutes, spatial enough to react to blur, noise, and color
//! damage: softplus is convex, so the pooled mean of each channel moves
//! with the local response variance, not just its mean.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Embedding;
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::rng::derive_stream;
use crate::scalar::{cast, cast_usize, Scalar};
use crate::store::{store_read_raw, store_write_raw, EmbeddingStore};

const C0: usize = 3; // input channels
const C1: usize = 8; // first conv output channels
const C2: usize = 16; // second conv output channels
const K: usize = 3;
const STRIDE: usize = 2;
/// Smallest input side: two valid strided 3x3 convolutions need 8 pixels.
pub const MIN_PATCH: usize = 8;

const MODEL_ID_PREFIX: &str = "toy-encoder|dim=";

/// Trainable parameters. Weight layouts are row-major:
/// `conv*[out_ch][in_ch][ky][kx]`, `fc[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyEncoderParams<S> {
    pub dim: usize,
    pub conv1_w: Vec<S>,
    pub conv1_b: Vec<S>,
    pub conv2_w: Vec<S>,
    pub conv2_b: Vec<S>,
    pub fc_w: Vec<S>,
    pub fc_b: Vec<S>,
}

impl<S: Scalar> ToyEncoderParams<S> {
    /// Seeded initialization: Xavier-scaled Gaussian weights and small
    /// positive biases.
    pub fn init(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        let mut rng = derive_stream(seed, &["toy-encoder-init"]);
        let mut normal = |n: usize, std: f64| -> Vec<S> {
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    cast::<S>(z * std)
                })
                .collect()
        };
        let conv1_w = normal(C1 * C0 * K * K, (1.0 / (C0 * K * K) as f64).sqrt());
        let conv2_w = normal(C2 * C1 * K * K, (1.0 / (C1 * K * K) as f64).sqrt());
        let fc_w = normal(dim * C2, (1.0 / C2 as f64).sqrt());
        let mut bias = |n: usize| -> Vec<S> {
            (0..n).map(|_| cast::<S>(rng.gen_range(0.05..0.25))).collect()
        };
        let conv1_b = bias(C1);
        let conv2_b = bias(C2);
        let fc_b = vec![S::zero(); dim];
        Ok(Self { dim, conv1_w, conv1_b, conv2_w, conv2_b, fc_w, fc_b })
    }

    pub fn param_count(&self) -> usize {
        self.conv1_w.len()
            + self.conv1_b.len()
            + self.conv2_w.len()
            + self.conv2_b.len()
            + self.fc_w.len()
            + self.fc_b.len()
    }

    /// Flattened view in the fixed order conv1_w, conv1_b, conv2_w,
    /// conv2_b, fc_w, fc_b.
    pub fn to_flat(&self) -> Vec<S> {
        let mut flat = Vec::with_capacity(self.param_count());
        for part in self.parts() {
            flat.extend_from_slice(part);
        }
        flat
    }

    pub fn from_flat(dim: usize, flat: &[S]) -> Result<Self> {
        let mut p = Self::init(dim, 0)?;
        if flat.len() != p.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters for dim {dim}, got {}",
                p.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for part in p.parts_mut() {
            part.copy_from_slice(&flat[offset..offset + part.len()]);
            offset += part.len();
        }
        Ok(p)
    }

    fn parts(&self) -> [&[S]; 6] {
        [&self.conv1_w, &self.conv1_b, &self.conv2_w, &self.conv2_b, &self.fc_w, &self.fc_b]
    }

    fn parts_mut(&mut self) -> [&mut [S]; 6] {
        [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.fc_w,
            &mut self.fc_b,
        ]
    }

    pub fn get_flat(&self, index: usize) -> S {
        let mut i = index;
        for part in self.parts() {
            if i < part.len() {
                return part[i];
            }
            i -= part.len();
        }
        panic!("parameter index {index} out of range");
    }

    pub fn set_flat(&mut self, index: usize, value: S) {
        let mut i = index;
        for part in self.parts_mut() {
            if i < part.len() {
                part[i] = value;
                return;
            }
            i -= part.len();
        }
        panic!("parameter index {index} out of range");
    }

    /// Serializes into the shared store container: one row holding the
    /// flattened parameters (f32 storage), id `toy-encoder|dim=<d>|v1`.
    pub fn to_store(&self) -> EmbeddingStore {
        let flat: Vec<f32> = self.to_flat().iter().map(|v| v.to_f64().unwrap() as f32).collect();
        EmbeddingStore::new(vec![format!("{MODEL_ID_PREFIX}{}|v1", self.dim)], flat.len(), flat)
            .expect("one row is always consistent")
    }

    pub fn from_store(store: &EmbeddingStore) -> Result<Self> {
        if store.len() != 1 {
            return Err(Error::invalid(format!(
                "model store must hold exactly one parameter row, got {}",
                store.len()
            )));
        }
        let id = &store.ids[0];
        let rest = id
            .strip_prefix(MODEL_ID_PREFIX)
            .ok_or_else(|| Error::invalid(format!("unexpected model row id `{id}`")))?;
        let dim: usize = rest
            .split('|')
            .next()
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::invalid(format!("cannot parse dimension from id `{id}`")))?;
        let flat: Vec<S> = store.vector(0).iter().map(|&v| cast::<S>(v as f64)).collect();
        Self::from_flat(dim, &flat)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        store_write_raw(path, &self.to_store())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_store(&store_read_raw(path)?)
    }
}

/// Gradient buffer mirroring the parameter shapes.
#[derive(Debug, Clone)]
pub struct ParamGrad<S> {
    pub conv1_w: Vec<S>,
    pub conv1_b: Vec<S>,
    pub conv2_w: Vec<S>,
    pub conv2_b: Vec<S>,
    pub fc_w: Vec<S>,
    pub fc_b: Vec<S>,
}

impl<S: Scalar> ParamGrad<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            conv1_w: vec![S::zero(); C1 * C0 * K * K],
            conv1_b: vec![S::zero(); C1],
            conv2_w: vec![S::zero(); C2 * C1 * K * K],
            conv2_b: vec![S::zero(); C2],
            fc_w: vec![S::zero(); dim * C2],
            fc_b: vec![S::zero(); dim],
        }
    }

    pub fn to_flat(&self) -> Vec<S> {
        let mut flat = Vec::new();
        for part in
            [&self.conv1_w, &self.conv1_b, &self.conv2_w, &self.conv2_b, &self.fc_w, &self.fc_b]
        {
            flat.extend_from_slice(part);
        }
        flat
    }

    pub fn add_assign(&mut self, other: &ParamGrad<S>) {
        let dst = [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.fc_w,
            &mut self.fc_b,
        ];
        let src =
            [&other.conv1_w, &other.conv1_b, &other.conv2_w, &other.conv2_b, &other.fc_w, &other.fc_b];
        for (d, s) in dst.into_iter().zip(src) {
            for (a, &b) in d.iter_mut().zip(s) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, factor: S) {
        for part in
            [&mut self.conv1_w, &mut self.conv1_b, &mut self.conv2_w, &mut self.conv2_b, &mut self.fc_w, &mut self.fc_b]
        {
            for v in part.iter_mut() {
                *v = *v * factor;
            }
        }
    }
}

/// Cached forward state for one input, everything backprop needs.
#[derive(Debug, Clone)]
pub struct Activations<S> {
    input: Vec<S>, // planar C0 x h x w
    in_w: usize,
    in_h: usize,
    a1: Vec<S>,
    a1_w: usize,
    a1_h: usize,
    a2: Vec<S>,
    a2_w: usize,
    a2_h: usize,
    pooled: Vec<S>,
    raw_embed: Vec<S>,
    norm: S,
    y: Vec<S>,
}

impl<S: Scalar> Activations<S> {
    pub fn embedding(&self) -> Embedding<S> {
        Embedding::normalized(self.y.clone()).expect("normalized output is unit")
    }
}

#[inline]
fn conv_out(n: usize) -> usize {
    (n - K) / STRIDE + 1
}

/// `ln(1 + e^x)` in a form that never overflows.
#[inline]
fn softplus<S: Scalar>(x: S) -> S {
    x.max(S::zero()) + (-x.abs()).exp().ln_1p()
}

/// Softplus derivative recovered from the activation itself:
/// `sigmoid(z) = 1 - e^{-softplus(z)}`.
#[inline]
fn softplus_slope_from_activation<S: Scalar>(a: S) -> S {
    S::one() - (-a).exp()
}

fn conv_forward<S: Scalar>(
    input: &[S],
    in_ch: usize,
    in_w: usize,
    in_h: usize,
    weights: &[S],
    bias: &[S],
    out_ch: usize,
) -> (Vec<S>, usize, usize) {
    let (ow, oh) = (conv_out(in_w), conv_out(in_h));
    let mut out = vec![S::zero(); out_ch * ow * oh];
    for oc in 0..out_ch {
        let out_plane = &mut out[oc * ow * oh..(oc + 1) * ow * oh];
        for ic in 0..in_ch {
            let in_plane = &input[ic * in_w * in_h..(ic + 1) * in_w * in_h];
            let w_base = (oc * in_ch + ic) * K * K;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = S::zero();
                    let (sy, sx) = (oy * STRIDE, ox * STRIDE);
                    for ky in 0..K {
                        let row = &in_plane[(sy + ky) * in_w + sx..(sy + ky) * in_w + sx + K];
                        let wrow = &weights[w_base + ky * K..w_base + ky * K + K];
                        acc += wrow[0] * row[0] + wrow[1] * row[1] + wrow[2] * row[2];
                    }
                    out_plane[oy * ow + ox] += acc;
                }
            }
        }
        for v in out_plane.iter_mut() {
            *v = softplus(*v + bias[oc]);
        }
    }
    (out, ow, oh)
}

/// Full forward pass with cached activations.
pub fn forward<S: Scalar>(
    params: &ToyEncoderParams<S>,
    img: &ImageBuffer<S>,
) -> Result<Activations<S>> {
    if img.width() < MIN_PATCH || img.height() < MIN_PATCH {
        return Err(Error::invalid(format!(
            "encoder input must be at least {MIN_PATCH}x{MIN_PATCH}, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let (w, h) = (img.width(), img.height());
    // Interleaved -> planar.
    let mut input = vec![S::zero(); C0 * w * h];
    for (i, px) in img.data().chunks_exact(3).enumerate() {
        input[i] = px[0];
        input[w * h + i] = px[1];
        input[2 * w * h + i] = px[2];
    }
    let (a1, a1_w, a1_h) = conv_forward(&input, C0, w, h, &params.conv1_w, &params.conv1_b, C1);
    let (a2, a2_w, a2_h) = conv_forward(&a1, C1, a1_w, a1_h, &params.conv2_w, &params.conv2_b, C2);

    let spatial = cast_usize::<S>(a2_w * a2_h);
    let pooled: Vec<S> = (0..C2)
        .map(|c| a2[c * a2_w * a2_h..(c + 1) * a2_w * a2_h].iter().copied().sum::<S>() / spatial)
        .collect();

    let mut raw_embed = params.fc_b.clone();
    for (o, out) in raw_embed.iter_mut().enumerate() {
        let row = &params.fc_w[o * C2..(o + 1) * C2];
        *out += row.iter().zip(&pooled).map(|(&wv, &pv)| wv * pv).sum::<S>();
    }
    let mut norm = raw_embed.iter().map(|&v| v * v).sum::<S>().sqrt();
    let mut y = raw_embed.clone();
    if norm == S::zero() {
        // Degenerate pre-normalization zero vector: documented epsilon nudge.
        y[0] = cast(1e-8);
        norm = cast(1e-8);
    }
    for v in &mut y {
        *v = *v / norm;
    }
    Ok(Activations { input, in_w: w, in_h: h, a1, a1_w, a1_h, a2, a2_w, a2_h, pooled, raw_embed, norm, y })
}

/// Unit-norm embedding of a patch; deterministic in (params, patch).
pub fn encode<S: Scalar>(params: &ToyEncoderParams<S>, patch: &ImageBuffer<S>) -> Result<Embedding<S>> {
    Ok(forward(params, patch)?.embedding())
}

fn conv_backward<S: Scalar>(
    input: &[S],
    in_ch: usize,
    in_w: usize,
    in_h: usize,
    g_z: &[S],
    out_ch: usize,
    ow: usize,
    oh: usize,
    weights: &[S],
    g_w: &mut [S],
    g_b: &mut [S],
    g_input: Option<&mut [S]>,
) {
    for oc in 0..out_ch {
        let gz_plane = &g_z[oc * ow * oh..(oc + 1) * ow * oh];
        g_b[oc] += gz_plane.iter().copied().sum::<S>();
    }
    let mut g_in = g_input;
    for oc in 0..out_ch {
        let gz_plane = &g_z[oc * ow * oh..(oc + 1) * ow * oh];
        for ic in 0..in_ch {
            let in_plane = &input[ic * in_w * in_h..(ic + 1) * in_w * in_h];
            let w_base = (oc * in_ch + ic) * K * K;
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = gz_plane[oy * ow + ox];
                    if g == S::zero() {
                        continue;
                    }
                    let (sy, sx) = (oy * STRIDE, ox * STRIDE);
                    for ky in 0..K {
                        for kx in 0..K {
                            g_w[w_base + ky * K + kx] += g * in_plane[(sy + ky) * in_w + sx + kx];
                        }
                    }
                    if let Some(gi) = g_in.as_deref_mut() {
                        let gi_plane = &mut gi[ic * in_w * in_h..(ic + 1) * in_w * in_h];
                        for ky in 0..K {
                            for kx in 0..K {
                                gi_plane[(sy + ky) * in_w + sx + kx] +=
                                    g * weights[w_base + ky * K + kx];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Backpropagates `g_y` (the loss gradient at the normalized embedding)
/// through the whole encoder, accumulating into `grads`.
pub fn backward<S: Scalar>(
    params: &ToyEncoderParams<S>,
    acts: &Activations<S>,
    g_y: &[S],
    grads: &mut ParamGrad<S>,
) {
    debug_assert_eq!(g_y.len(), params.dim);
    // Through normalization: g_e = (g_y - y * <y, g_y>) / norm.
    let y_dot: S = acts.y.iter().zip(g_y).map(|(&a, &b)| a * b).sum();
    let g_e: Vec<S> =
        acts.y.iter().zip(g_y).map(|(&yv, &gv)| (gv - yv * y_dot) / acts.norm).collect();
    let _ = &acts.raw_embed; // kept for completeness of the cached state

    // Affine layer.
    let mut g_pooled = vec![S::zero(); C2];
    for o in 0..params.dim {
        let ge = g_e[o];
        grads.fc_b[o] += ge;
        let w_row = &params.fc_w[o * C2..(o + 1) * C2];
        let gw_row = &mut grads.fc_w[o * C2..(o + 1) * C2];
        for c in 0..C2 {
            gw_row[c] += ge * acts.pooled[c];
            g_pooled[c] += ge * w_row[c];
        }
    }

    // Global average pooling spreads each channel gradient uniformly, then
    // the softplus slope.
    let spatial = cast_usize::<S>(a2_len(acts));
    let mut g_z2 = vec![S::zero(); acts.a2.len()];
    for c in 0..C2 {
        let g = g_pooled[c] / spatial;
        let a_plane = &acts.a2[c * a2_len(acts)..(c + 1) * a2_len(acts)];
        let gz_plane = &mut g_z2[c * a2_len(acts)..(c + 1) * a2_len(acts)];
        for (gz, &a) in gz_plane.iter_mut().zip(a_plane) {
            *gz = g * softplus_slope_from_activation(a);
        }
    }

    let mut g_a1 = vec![S::zero(); acts.a1.len()];
    conv_backward(
        &acts.a1,
        C1,
        acts.a1_w,
        acts.a1_h,
        &g_z2,
        C2,
        acts.a2_w,
        acts.a2_h,
        &params.conv2_w,
        &mut grads.conv2_w,
        &mut grads.conv2_b,
        Some(&mut g_a1),
    );

    let mut g_z1 = g_a1;
    for (gz, &a) in g_z1.iter_mut().zip(&acts.a1) {
        *gz = *gz * softplus_slope_from_activation(a);
    }
    conv_backward(
        &acts.input,
        C0,
        acts.in_w,
        acts.in_h,
        &g_z1,
        C1,
        acts.a1_w,
        acts.a1_h,
        &params.conv1_w,
        &mut grads.conv1_w,
        &mut grads.conv1_b,
        None,
    );
}

#[inline]
fn a2_len<S>(acts: &Activations<S>) -> usize {
    acts.a2_w * acts.a2_h
}
