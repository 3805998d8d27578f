//! HR -> LR degradation: classical bicubic downsampling and a two-round
//! high-order chain (blur, resize, noise, block-DCT compression).
//!
//! All randomness comes from [`DegradationSpec::seed`], so a given
//! `(image, spec)` always produces the same LR image bit for bit.

mod ops;
mod pairs;

pub use ops::{add_gaussian_noise, dct_compress, gaussian_blur, gaussian_taps, quant_table, LUMA_QUANT};
pub use pairs::{image_seed, list_corpus, make_pairs, stable_name_hash, PairsManifest, PairRecord};
pub use crate::rng::Prng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{resample, Image, ResampleKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Optional fixed blur, bicubic antialiased downscale, optional fixed
    /// noise and compression. With default parameters: downscale only.
    Classical,
    /// Two randomized rounds of blur -> resize -> noise -> compress.
    #[serde(alias = "high-order")]
    HighOrder,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Profile::Classical),
            "high-order" | "high_order" => Ok(Profile::HighOrder),
            other => Err(Error::Config(format!("unknown degradation profile {other:?}"))),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Profile::Classical => "classical",
            Profile::HighOrder => "high-order",
        })
    }
}

/// Sampling ranges of the high-order chain, per round.
pub mod high_order_ranges {
    pub const BLUR_SIGMA: (f64, f64) = (0.2, 2.0);
    pub const NOISE_SIGMA_255: (f64, f64) = (1.0, 15.0);
    pub const JPEG_QUALITY: (i64, i64) = (50, 95);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub profile: Profile,
    pub scale: u32,
    /// Pre-downscale blur in HR pixels (classical profile only).
    #[serde(default)]
    pub blur_sigma: f64,
    /// Post-downscale noise on the 0-255 scale (classical profile only).
    #[serde(default)]
    pub noise_sigma: f64,
    /// Final compression quality (classical profile only).
    #[serde(default)]
    pub compression_quality: Option<u8>,
    #[serde(default)]
    pub seed: u64,
}

impl DegradationSpec {
    pub fn classical(scale: u32) -> Self {
        Self {
            profile: Profile::Classical,
            scale,
            blur_sigma: 0.0,
            noise_sigma: 0.0,
            compression_quality: None,
            seed: 0,
        }
    }

    pub fn high_order(scale: u32, seed: u64) -> Self {
        Self {
            profile: Profile::HighOrder,
            seed,
            ..Self::classical(scale)
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.scale) {
            return Err(Error::Config(format!("scale must be 2, 3 or 4, got {}", self.scale)));
        }
        for (name, v) in [("blur_sigma", self.blur_sigma), ("noise_sigma", self.noise_sigma)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if let Some(q) = self.compression_quality {
            if !(1..=100).contains(&q) {
                return Err(Error::Config(format!("compression quality must be 1..=100, got {q}")));
            }
        }
        Ok(())
    }
}

/// Produces the LR counterpart of `img`. The image is first center-cropped to
/// dimensions divisible by `spec.scale`; the result is exactly `1/scale` of the
/// cropped size and clamped to `[0, 1]`.
pub fn degrade(img: &Image, spec: &DegradationSpec) -> Result<Image> {
    spec.validate()?;
    let s = spec.scale as usize;
    if img.width() < s || img.height() < s {
        return Err(Error::Degradation(format!(
            "{}x{} image is smaller than scale {s}",
            img.width(),
            img.height()
        )));
    }
    let hr = img.center_crop_to_multiple(s)?;
    let (tw, th) = (hr.width() / s, hr.height() / s);
    let lr = match spec.profile {
        Profile::Classical => classical_chain(&hr, spec, tw, th),
        Profile::HighOrder => high_order_chain(&hr, spec.seed, s, tw, th),
    };
    Ok(lr.clamp01())
}

fn classical_chain(hr: &Image, spec: &DegradationSpec, tw: usize, th: usize) -> Image {
    let mut x = gaussian_blur(hr, spec.blur_sigma);
    x = resample(&x, tw, th, ResampleKernel::Bicubic, true);
    if spec.noise_sigma > 0.0 {
        x = add_gaussian_noise(&x.clamp01(), spec.noise_sigma, &mut Prng::new(spec.seed));
    }
    if let Some(q) = spec.compression_quality {
        x = dct_compress(&x.clamp01(), q);
    }
    x
}

fn high_order_chain(hr: &Image, seed: u64, scale: usize, tw: usize, th: usize) -> Image {
    use high_order_ranges::*;

    let mut rng = Prng::new(seed);
    // first round covers sqrt(scale) of the reduction, second lands on target
    let partial = (scale as f64).sqrt();
    let mid = |full: usize, target: usize| {
        ((full as f64 / partial).round() as usize).clamp(target, full)
    };
    let sizes = [(mid(hr.width(), tw), mid(hr.height(), th)), (tw, th)];

    let mut x = hr.clone();
    for (w, h) in sizes {
        let sigma = rng.uniform(BLUR_SIGMA.0, BLUR_SIGMA.1);
        x = gaussian_blur(&x, sigma);
        let kernel = if rng.next_f64() < 0.5 {
            ResampleKernel::Bicubic
        } else {
            ResampleKernel::Bilinear
        };
        x = resample(&x, w, h, kernel, true).clamp01();
        let noise = rng.uniform(NOISE_SIGMA_255.0, NOISE_SIGMA_255.1);
        x = add_gaussian_noise(&x, noise, &mut rng);
        let q = rng.int_inclusive(JPEG_QUALITY.0, JPEG_QUALITY.1) as u8;
        x = dct_compress(&x, q);
    }
    x
}
