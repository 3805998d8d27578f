//! Train SRCNN on phantom pairs and compare against the bicubic input it
//! refines. Pass an iteration count to shorten the run.
//!
//! cargo run --release --example train_srcnn -- 200

use medsr::degrade::{degrade, DegradationSpec};
use medsr::metrics::psnr;
use medsr::models::{bicubic_input, srcnn_forward, srcnn_train_on, SrcnnConfig, TrainOptions};
use medsr::synth::{phantom, Domain};

fn main() -> medsr::Result<()> {
    let iters = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let scale = 2;
    let pairs: Vec<_> = Domain::ALL
        .iter()
        .flat_map(|&d| (0..4).map(move |i| phantom(d, 64, i)))
        .map(|hr| {
            let lr = degrade(&hr, &DegradationSpec::classical(scale))?;
            Ok((bicubic_input(&lr, hr.width(), hr.height()), hr))
        })
        .collect::<medsr::Result<_>>()?;

    let cfg = SrcnnConfig::new(scale);
    let out = srcnn_train_on(&pairs, &cfg, &TrainOptions { iters, ..TrainOptions::default() })?;
    for (i, loss) in out.losses.iter().enumerate().step_by((iters / 10).max(1)) {
        println!("iter {i:>4}  batch loss {loss:.4}");
    }

    let (mut p_sr, mut p_bic) = (0.0, 0.0);
    for (y, x) in &pairs {
        p_sr += psnr(x, &srcnn_forward(y, &out.weights, &cfg)?.clamp01())?;
        p_bic += psnr(x, y)?;
    }
    let n = pairs.len() as f64;
    println!("mean PSNR  bicubic {:.2} dB  srcnn {:.2} dB", p_bic / n, p_sr / n);
    Ok(())
}
