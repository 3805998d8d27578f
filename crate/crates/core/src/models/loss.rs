use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::metrics::lpips_proxy;

/// Mean of `sqrt((x - x^)^2 + eps^2)`. Accumulated as offsets from `eps` so
/// a zero residual gives `eps` exactly.
pub fn charbonnier(x_hat: &Image, x: &Image, eps: f64) -> Result<f64> {
    x_hat.ensure_same_dims(x)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!("charbonnier eps must be positive, got {eps}")));
    }
    let excess: f64 = x_hat
        .data()
        .iter()
        .zip(x.data())
        .map(|(&a, &b)| (a as f64 - b as f64).hypot(eps) - eps)
        .sum();
    Ok(eps + excess / x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub pixel: f64,
    pub perceptual: f64,
    pub gan: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { pixel: 1.0, perceptual: 1.0, gan: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeLoss {
    pub total: f64,
    pub pixel: f64,
    pub perceptual: f64,
    pub gan: f64,
}

/// `ln(1 + e^-l)`, the generator's BCE against the "real" label.
fn softplus_neg(l: f64) -> f64 {
    if l > 0.0 {
        (-l).exp().ln_1p()
    } else {
        -l + l.exp().ln_1p()
    }
}

/// `pixel * mean|x - x^| + perceptual * lpips_proxy + gan * mean BCE(sigmoid(l), 1)`.
pub fn composite_loss(x_hat: &Image, x: &Image, d_logits_fake: &Tensor, lambdas: LossWeights) -> Result<CompositeLoss> {
    x_hat.ensure_same_dims(x)?;
    if d_logits_fake.numel() == 0 {
        return Err(Error::Shape("empty discriminator logits".into()));
    }
    let pixel = x_hat
        .data()
        .iter()
        .zip(x.data())
        .map(|(&a, &b)| (a as f64 - b as f64).abs())
        .sum::<f64>()
        / x.len() as f64;
    let perceptual = lpips_proxy(x, x_hat)?;
    let gan = d_logits_fake.data().iter().map(|&l| softplus_neg(l as f64)).sum::<f64>()
        / d_logits_fake.numel() as f64;
    Ok(CompositeLoss {
        total: lambdas.pixel * pixel + lambdas.perceptual * perceptual + lambdas.gan * gan,
        pixel,
        perceptual,
        gan,
    })
}
