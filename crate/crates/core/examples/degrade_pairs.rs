//! Build paired LR/HR data from a phantom corpus with both degradation
//! profiles and report how far each LR image is from its bicubic re-upscale.
//!
//! cargo run --release --example degrade_pairs

use medsr::degrade::{degrade, make_pairs, DegradationSpec};
use medsr::metrics::psnr;
use medsr::models::bicubic_input;
use medsr::synth::{phantom, write_corpus, Domain};

fn main() -> medsr::Result<()> {
    let work = tempfile::tempdir().map_err(medsr::Error::io("tempdir"))?;
    write_corpus(work.path(), &[Domain::Chest], 3, 96, 0)?;

    for scale in [2, 3, 4] {
        let spec = DegradationSpec::classical(scale);
        let out = work.path().join(format!("pairs_x{scale}"));
        let n = make_pairs(&work.path().join("chest"), &spec, &out)?;
        println!("x{scale}: {n} pairs in {}", out.display());
    }

    // one image through both profiles at every scale
    let hr = phantom(Domain::Brain, 96, 7);
    println!("\n{:<12}{:>6}{:>10}{:>16}", "profile", "scale", "LR size", "PSNR(bicubic)");
    for scale in [2, 3, 4] {
        for spec in [DegradationSpec::classical(scale), DegradationSpec::high_order(scale, 7)] {
            let lr = degrade(&hr, &spec)?;
            let up = bicubic_input(&lr, hr.width(), hr.height());
            let size = format!("{}x{}", lr.width(), lr.height());
            println!("{:<12}{:>6}{:>10}{:>16.2}", spec.profile.to_string(), scale, size, psnr(&hr, &up)?);
        }
    }
    Ok(())
}
