//! Perceptual distance with a fixed random feature extractor standing in for
//! pretrained LPIPS features. Weights are frozen in `lpips_proxy.msrw`
//! (regenerable with [`lpips_proxy_weights_from_seed`]).

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::models::ops::{avg_pool2, init_conv, relu_inplace, Conv, Fmap};
use crate::models::ModelWeights;
use crate::rng::Prng;

pub const LPIPS_PROXY_SEED: u64 = 0xD1CE;
pub const LPIPS_MIN_DIM: usize = 16;
/// `(in, out)` channels of the three conv -> ReLU -> 2x2 mean-pool stages.
pub const LPIPS_STAGES: [(usize, usize); 3] = [(1, 8), (8, 16), (16, 32)];
const NORM_EPS: f64 = 1e-10;

static GOLDEN: &[u8] = include_bytes!("lpips_proxy.msrw");

/// He-normal weights drawn stage by stage from [`LPIPS_PROXY_SEED`], zero biases.
pub fn lpips_proxy_weights_from_seed() -> ModelWeights {
    let mut rng = Prng::new(LPIPS_PROXY_SEED);
    let mut w = ModelWeights::new();
    for (i, &(ci, co)) in LPIPS_STAGES.iter().enumerate() {
        init_conv(&mut w, &mut rng, &format!("stage{}", i + 1), ci, co, 3, 1.0);
    }
    w
}

/// The bundled feature weights.
pub fn lpips_proxy_weights() -> &'static ModelWeights {
    static W: OnceLock<ModelWeights> = OnceLock::new();
    W.get_or_init(|| ModelWeights::from_bytes(GOLDEN).expect("bundled feature weights are valid"))
}

fn stages() -> &'static [Conv] {
    static S: OnceLock<Vec<Conv>> = OnceLock::new();
    S.get_or_init(|| {
        LPIPS_STAGES
            .iter()
            .enumerate()
            .map(|(i, &(ci, co))| Conv::load(lpips_proxy_weights(), &format!("stage{}", i + 1), ci, co, 3))
            .collect::<Result<_>>()
            .expect("bundled feature weights match the stage layout")
    })
}

/// Stage outputs with each spatial feature vector scaled to unit length.
pub fn lpips_proxy_features(img: &Image) -> Vec<Fmap<f32>> {
    let mut x = Fmap::from_vec(1, img.height(), img.width(), img.data().iter().map(|v| 2.0 * v - 1.0).collect());
    let mut out = Vec::with_capacity(LPIPS_STAGES.len());
    for conv in stages() {
        let mut y = conv.forward(&x);
        relu_inplace(&mut y);
        x = avg_pool2(&y);
        out.push(unit_normalize(&x));
    }
    out
}

fn unit_normalize(f: &Fmap<f32>) -> Fmap<f32> {
    let plane = f.h * f.w;
    let mut out = f.clone();
    for i in 0..plane {
        let norm = (0..f.c).map(|c| (f.data[c * plane + i] as f64).powi(2)).sum::<f64>().sqrt();
        let inv = 1.0 / (norm + NORM_EPS);
        for c in 0..f.c {
            out.data[c * plane + i] = (f.data[c * plane + i] as f64 * inv) as f32;
        }
    }
    out
}

pub fn lpips_proxy(reference: &Image, x: &Image) -> Result<f64> {
    reference.ensure_same_dims(x)?;
    let (w, h) = x.dims();
    if w.min(h) < LPIPS_MIN_DIM {
        return Err(Error::Precondition(format!(
            "lpips_proxy needs images of at least {LPIPS_MIN_DIM}x{LPIPS_MIN_DIM}, got {w}x{h}"
        )));
    }
    let fa = lpips_proxy_features(reference);
    let fb = lpips_proxy_features(x);
    let total: f64 = fa
        .iter()
        .zip(&fb)
        .map(|(a, b)| {
            // channel sum, spatial mean
            a.data.iter().zip(&b.data).map(|(&p, &q)| (p as f64 - q as f64).powi(2)).sum::<f64>()
                / (a.h * a.w) as f64
        })
        .sum();
    Ok(total / LPIPS_STAGES.len() as f64)
}
