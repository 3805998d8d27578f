//! Super-resolve one degraded phantom with every model family using the
//! bundled weights, and score each output.
//!
//! cargo run --release --example upscale_models

use std::path::Path;

use medsr::degrade::{degrade, DegradationSpec};
use medsr::metrics::{evaluate, MetricKind};
use medsr::models::{load_weights, upscale, ModelKind};
use medsr::synth::{phantom, Domain};

fn main() -> medsr::Result<()> {
    let weights = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/weights");
    let hr = phantom(Domain::Spine, 96, 3);
    let kinds = [MetricKind::Psnr, MetricKind::Ssim, MetricKind::Fsim, MetricKind::Tenengrad];

    for scale in [2, 3, 4] {
        let lr = degrade(&hr, &DegradationSpec::classical(scale))?;
        println!("x{scale}  (LR {}x{})", lr.width(), lr.height());
        for kind in ModelKind::ALL {
            if !kind.supports_scale(scale) {
                println!("  {:<12} --", kind.label());
                continue;
            }
            let w = if kind.needs_weights() {
                Some(load_weights(weights.join(format!("{kind}_x{scale}.msrw")))?)
            } else {
                None
            };
            let sr = upscale(&lr, kind, w.as_ref(), scale)?;
            let scores = evaluate(&hr, &sr, &kinds)?;
            let line: Vec<String> = scores.iter().map(|v| format!("{} {:.3}", v.name(), v.value)).collect();
            println!("  {:<12} {}", kind.label(), line.join("  "));
        }
    }
    Ok(())
}
