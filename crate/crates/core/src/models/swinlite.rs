//! Small SwinIR-style network.
//!
//! ```text
//! F0    = conv_first(Y)
//! F     = F0, then per RSTB: F = conv(STL_shifted(STL_regular(F))) + F
//! Fdeep = conv_after_body(norm(F))
//! X^    = conv_last(up(Fdeep + F0)),  up = [nearest x2 -> conv -> LeakyReLU] per factor 2
//! STL:  t = t + attn(LN1(t));  t = t + fc2(GELU(fc1(LN2(t))))
//! ```
//!
//! The input is reflect-padded to a multiple of the window and the output is
//! cropped back to `scale x` the input size. Scales 2 and 4 only.

use serde::{Deserialize, Serialize};

use super::attention::{crop_top_left, init_attention, pad_bottom_right, window_msa_tokens, AttnParams};
use super::ops::{
    from_tokens, gaussian_vec, gelu, init_conv, layer_norm, leaky_relu_inplace, linear, linear_params,
    norm_params, to_tokens, upsample_nearest, Conv, Fmap,
};
use super::ModelWeights;
use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::rng::Prng;

pub const LEAKY_SLOPE: f32 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwinLiteConfig {
    pub embed_dim: usize,
    pub rstb_count: usize,
    pub layers_per_rstb: usize,
    pub window: usize,
    pub heads: usize,
    pub mlp_ratio: usize,
    pub scale: u32,
}

impl SwinLiteConfig {
    pub fn new(scale: u32) -> Self {
        Self { embed_dim: 16, rstb_count: 2, layers_per_rstb: 2, window: 8, heads: 2, mlp_ratio: 2, scale }
    }

    pub fn supports_scale(scale: u32) -> bool {
        matches!(scale, 2 | 4)
    }

    pub fn validate(&self) -> Result<()> {
        if self.heads == 0 || self.embed_dim % self.heads != 0 {
            return Err(Error::Config("embed_dim must be divisible by heads".into()));
        }
        if self.window < 2 {
            return Err(Error::Config("window must be >= 2".into()));
        }
        if !Self::supports_scale(self.scale) {
            return Err(Error::Config(format!("swinlite supports scales 2 and 4, not {}", self.scale)));
        }
        Ok(())
    }

    fn up_stages(&self) -> usize {
        self.scale.trailing_zeros() as usize
    }
}

struct Stl {
    norm1: (Vec<f32>, Vec<f32>),
    attn: AttnParams,
    norm2: (Vec<f32>, Vec<f32>),
    fc1: (Vec<f32>, Vec<f32>),
    fc2: (Vec<f32>, Vec<f32>),
    shifted: bool,
}

struct Rstb {
    layers: Vec<Stl>,
    conv: Conv,
}

pub struct SwinLite {
    pub cfg: SwinLiteConfig,
    conv_first: Conv,
    blocks: Vec<Rstb>,
    norm: (Vec<f32>, Vec<f32>),
    conv_after_body: Conv,
    upsample: Vec<Conv>,
    conv_last: Conv,
}

fn block_prefix(i: usize, j: usize) -> String {
    format!("layers.{i}.residual_group.blocks.{j}.")
}

impl SwinLite {
    pub fn load(w: &ModelWeights, cfg: SwinLiteConfig) -> Result<Self> {
        cfg.validate()?;
        let e = cfg.embed_dim;
        let hidden = e * cfg.mlp_ratio;
        let blocks = (0..cfg.rstb_count)
            .map(|i| {
                let layers = (0..cfg.layers_per_rstb)
                    .map(|j| {
                        let p = block_prefix(i, j);
                        Ok(Stl {
                            norm1: norm_params(w, &format!("{p}norm1"), e)?,
                            attn: AttnParams::load(w, &format!("{p}attn."), e, cfg.heads, cfg.window)?,
                            norm2: norm_params(w, &format!("{p}norm2"), e)?,
                            fc1: linear_params(w, &format!("{p}mlp.fc1"), e, hidden)?,
                            fc2: linear_params(w, &format!("{p}mlp.fc2"), hidden, e)?,
                            shifted: j % 2 == 1,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Rstb { layers, conv: Conv::load(w, &format!("layers.{i}.conv"), e, e, 3)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg,
            conv_first: Conv::load(w, "conv_first", 1, e, 3)?,
            blocks,
            norm: norm_params(w, "norm", e)?,
            conv_after_body: Conv::load(w, "conv_after_body", e, e, 3)?,
            upsample: (0..cfg.up_stages())
                .map(|s| Conv::load(w, &format!("upsample.{s}"), e, e, 3))
                .collect::<Result<_>>()?,
            conv_last: Conv::load(w, "conv_last", e, 1, 3)?,
        })
    }

    fn stl(&self, layer: &Stl, t: &mut [f32], h: usize, w: usize) {
        let e = self.cfg.embed_dim;
        let normed = layer_norm(t, e, &layer.norm1.0, &layer.norm1.1);
        let att = window_msa_tokens(&normed, h, w, &layer.attn, layer.shifted, None);
        t.iter_mut().zip(&att).for_each(|(a, b)| *a += b);
        let normed = layer_norm(t, e, &layer.norm2.0, &layer.norm2.1);
        let hidden = e * self.cfg.mlp_ratio;
        let mut mid = linear(&normed, e, &layer.fc1.0, &layer.fc1.1, hidden);
        mid.iter_mut().for_each(|v| *v = gelu(*v));
        let mlp = linear(&mid, hidden, &layer.fc2.0, &layer.fc2.1, e);
        t.iter_mut().zip(&mlp).for_each(|(a, b)| *a += b);
    }

    /// Shallow features `F0` of a window-aligned input.
    pub fn shallow(&self, y: &Fmap<f32>) -> Fmap<f32> {
        self.conv_first.forward(y)
    }

    /// `Fdeep` from `F0`.
    pub fn deep(&self, f0: &Fmap<f32>) -> Fmap<f32> {
        let (e, h, w) = (f0.c, f0.h, f0.w);
        let mut x = f0.clone();
        for block in &self.blocks {
            let mut t = to_tokens(&x);
            for layer in &block.layers {
                self.stl(layer, &mut t, h, w);
            }
            let mut y = block.conv.forward(&from_tokens(&t, e, h, w));
            y.add_assign(&x);
            x = y;
        }
        let t = layer_norm(&to_tokens(&x), e, &self.norm.0, &self.norm.1);
        self.conv_after_body.forward(&from_tokens(&t, e, h, w))
    }

    /// Image reconstruction from `Fdeep + F0`.
    pub fn reconstruct(&self, feat: &Fmap<f32>) -> Fmap<f32> {
        let mut x = feat.clone();
        for conv in &self.upsample {
            x = conv.forward(&upsample_nearest(&x, 2));
            leaky_relu_inplace(&mut x, LEAKY_SLOPE);
        }
        self.conv_last.forward(&x)
    }

    pub fn forward_fmap(&self, y: &Fmap<f32>) -> Fmap<f32> {
        let m = self.cfg.window;
        let (ph, pw) = (y.h.div_ceil(m) * m, y.w.div_ceil(m) * m);
        let padded = if (ph, pw) == (y.h, y.w) { y.clone() } else { pad_bottom_right(y, ph, pw) };
        let f0 = self.shallow(&padded);
        let mut feat = self.deep(&f0);
        feat.add_assign(&f0);
        let out = self.reconstruct(&feat);
        let s = self.cfg.scale as usize;
        crop_top_left(&out, y.h * s, y.w * s)
    }
}

/// Upscales `y` by `cfg.scale`; output is not clamped here.
pub fn swinlite_forward(y: &Image, w: &ModelWeights, cfg: &SwinLiteConfig) -> Result<Image> {
    let net = SwinLite::load(w, *cfg)?;
    let out = net.forward_fmap(&Fmap::from_vec(1, y.height(), y.width(), y.data().to_vec()));
    Image::new(out.w, out.h, out.data).map_err(|_| Error::Model("swinlite produced non-finite output".into()))
}

/// Seeded weights biased toward nearest-neighbour upscaling: channel 0 carries
/// the pixel through centered delta kernels and every other weight is a small
/// Gaussian perturbation.
pub fn swinlite_init(cfg: &SwinLiteConfig, seed: u64) -> Result<ModelWeights> {
    cfg.validate()?;
    let e = cfg.embed_dim;
    let hidden = e * cfg.mlp_ratio;
    let mut rng = Prng::new(seed);
    let mut w = ModelWeights::new();
    let lin_std = 0.02;
    let conv_gain = 0.02;
    init_conv(&mut w, &mut rng, "conv_first", 1, e, 3, conv_gain);
    for i in 0..cfg.rstb_count {
        for j in 0..cfg.layers_per_rstb {
            let p = block_prefix(i, j);
            w.put(format!("{p}norm1.weight"), &[e], vec![1.0; e]);
            w.put(format!("{p}norm1.bias"), &[e], vec![0.0; e]);
            init_attention(&mut w, &mut rng, &format!("{p}attn."), e, cfg.heads, cfg.window, lin_std);
            w.put(format!("{p}norm2.weight"), &[e], vec![1.0; e]);
            w.put(format!("{p}norm2.bias"), &[e], vec![0.0; e]);
            w.put(format!("{p}mlp.fc1.weight"), &[hidden, e], gaussian_vec(&mut rng, hidden * e, lin_std));
            w.put(format!("{p}mlp.fc1.bias"), &[hidden], vec![0.0; hidden]);
            w.put(format!("{p}mlp.fc2.weight"), &[e, hidden], gaussian_vec(&mut rng, hidden * e, lin_std));
            w.put(format!("{p}mlp.fc2.bias"), &[e], vec![0.0; e]);
        }
        init_conv(&mut w, &mut rng, &format!("layers.{i}.conv"), e, e, 3, conv_gain * 0.1);
    }
    w.put("norm.weight", &[e], vec![1.0; e]);
    w.put("norm.bias", &[e], vec![0.0; e]);
    init_conv(&mut w, &mut rng, "conv_after_body", e, e, 3, conv_gain * 0.1);
    for s in 0..cfg.up_stages() {
        init_conv(&mut w, &mut rng, &format!("upsample.{s}"), e, e, 3, conv_gain);
    }
    init_conv(&mut w, &mut rng, "conv_last", e, 1, 3, conv_gain);

    let mut names = vec!["conv_first.weight".to_string(), "conv_last.weight".to_string()];
    names.extend((0..cfg.up_stages()).map(|s| format!("upsample.{s}.weight")));
    for name in names {
        add_center_delta(w.get_mut(&name)?.data_mut(), 3);
    }
    Ok(w)
}

/// Adds 1 at the center tap of the (out 0, in 0) kernel.
pub(crate) fn add_center_delta(weight: &mut [f32], k: usize) {
    weight[(k / 2) * k + k / 2] += 1.0;
}
