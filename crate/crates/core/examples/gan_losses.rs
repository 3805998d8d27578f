//! Discriminator logits and the composite pixel + perceptual + adversarial
//! objective for an RRDB-lite output, with the Charbonnier pixel term.
//!
//! cargo run --release --example gan_losses

use std::path::Path;

use medsr::degrade::{degrade, DegradationSpec};
use medsr::models::{
    charbonnier, composite_loss, load_weights, unet_discriminator_forward, unet_init, upscale, LossWeights, ModelKind,
    UNET_FEATURES,
};
use medsr::synth::{phantom, Domain};

fn main() -> medsr::Result<()> {
    let scale = 4;
    let hr = phantom(Domain::Nephrolithiasis, 64, 2);
    let lr = degrade(&hr, &DegradationSpec::high_order(scale, 2))?;
    let w = load_weights(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/weights/rrdblite_x4.msrw"))?;
    let sr = upscale(&lr, ModelKind::Rrdblite, Some(&w), scale)?;

    let disc = unet_init(UNET_FEATURES, 9);
    let logits = unet_discriminator_forward(&sr, &disc)?;
    let mean_logit = logits.data().iter().map(|&v| v as f64).sum::<f64>() / logits.numel() as f64;
    println!("discriminator map {:?}, mean logit {mean_logit:.4}", logits.dims());

    for eps in [1e-3, 1e-6] {
        println!("charbonnier eps={eps:e}: {:.6}", charbonnier(&sr, &hr, eps)?);
    }
    for lw in [LossWeights::default(), LossWeights { pixel: 1.0, perceptual: 0.0, gan: 0.0 }] {
        let l = composite_loss(&sr, &hr, &logits, lw)?;
        println!(
            "weights ({}, {}, {}): total {:.6} = pixel {:.6} + perceptual {:.6} + gan {:.6}",
            lw.pixel, lw.perceptual, lw.gan, l.total, l.pixel, l.perceptual, l.gan
        );
    }
    Ok(())
}
