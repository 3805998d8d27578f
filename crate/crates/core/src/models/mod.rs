//! Super-resolution networks: a trainable SRCNN, a SwinIR-style and an
//! RRDB-style inference engine, a U-Net discriminator, losses and the MSRW
//! weight format.

mod attention;
mod discriminator;
mod loss;
pub mod ops;
mod rrdb;
mod srcnn;
mod swinlite;
mod tensor;
mod weights;

pub use attention::{
    init_attention, relative_position_index, window_attention, window_attention_traced, AttnParams, WindowTrace,
};
pub use discriminator::{unet_discriminator_forward, unet_init, UNET_FEATURES};
pub use loss::{charbonnier, composite_loss, CompositeLoss, LossWeights};
pub use rrdb::{rrdb_forward, rrdb_init, RrdbLite, RrdbLiteConfig, RDBS_PER_RRDB};
pub use srcnn::{
    bicubic_input, load_training_pairs, srcnn_forward, srcnn_identity, srcnn_init, srcnn_loss_and_grad,
    srcnn_train, srcnn_train_on, Srcnn, SrcnnConfig, TrainOptions, TrainOutcome,
};
pub use swinlite::{swinlite_forward, swinlite_init, SwinLite, SwinLiteConfig, LEAKY_SLOPE};
pub use tensor::Tensor;
pub use weights::{load_weights, save_weights, ModelWeights, MSRW_VERSION};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bicubic,
    Srcnn,
    Swinlite,
    Rrdblite,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Bicubic, ModelKind::Srcnn, ModelKind::Swinlite, ModelKind::Rrdblite];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Bicubic => "bicubic",
            ModelKind::Srcnn => "srcnn",
            ModelKind::Swinlite => "swinlite",
            ModelKind::Rrdblite => "rrdblite",
        }
    }

    /// Column heading in reports.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Bicubic => "Bicubic",
            ModelKind::Srcnn => "SRCNN",
            ModelKind::Swinlite => "SwinIR-lite",
            ModelKind::Rrdblite => "RRDB-lite",
        }
    }

    pub fn needs_weights(self) -> bool {
        self != ModelKind::Bicubic
    }

    /// The windowed model has no x3 upsampler.
    pub fn supports_scale(self, scale: u32) -> bool {
        (2..=4).contains(&scale) && (self != ModelKind::Swinlite || SwinLiteConfig::supports_scale(scale))
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model {s:?} (expected bicubic, srcnn, swinlite or rrdblite)")))
    }
}

/// Upscales `lr` by `scale` with the chosen model. Output is clamped to `[0, 1]`.
pub fn upscale(lr: &Image, kind: ModelKind, weights: Option<&ModelWeights>, scale: u32) -> Result<Image> {
    if !kind.supports_scale(scale) {
        return Err(Error::Model(format!("{kind} does not support scale {scale}")));
    }
    let (w, h) = (lr.width() * scale as usize, lr.height() * scale as usize);
    let need = || weights.ok_or_else(|| Error::Model(format!("{kind} requires weights")));
    let out = match kind {
        ModelKind::Bicubic => bicubic_input(lr, w, h),
        ModelKind::Srcnn => srcnn_forward(&bicubic_input(lr, w, h), need()?, &SrcnnConfig::new(scale))?,
        ModelKind::Swinlite => swinlite_forward(lr, need()?, &SwinLiteConfig::new(scale))?,
        ModelKind::Rrdblite => rrdb_forward(lr, need()?, &RrdbLiteConfig::new(scale))?,
    };
    debug_assert_eq!(out.dims(), (w, h));
    Ok(out.clamp01())
}

/// Checks that `w` holds every tensor `kind` needs at `scale`, with the right shapes.
pub fn check_weights(kind: ModelKind, w: &ModelWeights, scale: u32) -> Result<()> {
    if !kind.supports_scale(scale) {
        return Err(Error::Model(format!("{kind} does not support scale {scale}")));
    }
    match kind {
        ModelKind::Bicubic => Ok(()),
        ModelKind::Srcnn => Srcnn::<f32>::from_weights(w, SrcnnConfig::new(scale)).map(drop),
        ModelKind::Swinlite => SwinLite::load(w, SwinLiteConfig::new(scale)).map(drop),
        ModelKind::Rrdblite => RrdbLite::load(w, RrdbLiteConfig::new(scale)).map(drop),
    }
}

/// Untrained default weights for a learned model at `scale`.
pub fn init_weights(kind: ModelKind, scale: u32, seed: u64) -> Result<ModelWeights> {
    match kind {
        ModelKind::Bicubic => Ok(ModelWeights::new()),
        ModelKind::Srcnn => Ok(srcnn_init(&SrcnnConfig::new(scale), seed)),
        ModelKind::Swinlite => swinlite_init(&SwinLiteConfig::new(scale), seed),
        ModelKind::Rrdblite => rrdb_init(&RrdbLiteConfig::new(scale), seed),
    }
}
