//! The nine-metric suite on a ladder of distortions of one image.
//!
//! cargo run --release --example quality_metrics

use medsr::degrade::{add_gaussian_noise, dct_compress, gaussian_blur, Prng};
use medsr::metrics::{evaluate_all, MetricKind, MetricReport};
use medsr::synth::{phantom, Domain};

fn main() -> medsr::Result<()> {
    let reference = phantom(Domain::Chest, 128, 1);
    let variants = [
        ("identity", reference.clone()),
        ("noise s=5", add_gaussian_noise(&reference, 5.0, &mut Prng::new(1))),
        ("noise s=20", add_gaussian_noise(&reference, 20.0, &mut Prng::new(1))),
        ("blur s=1", gaussian_blur(&reference, 1.0)),
        ("blur s=3", gaussian_blur(&reference, 3.0)),
        ("dct q=20", dct_compress(&reference, 20)),
    ];

    print!("{:<12}", "");
    for k in MetricKind::ALL {
        print!("{:>14}", k.id());
    }
    println!();
    for (name, img) in &variants {
        let r: MetricReport = evaluate_all(&reference, img)?;
        print!("{name:<12}");
        for v in r.values() {
            print!("{:>14.4}", v.value);
        }
        println!();
    }
    Ok(())
}
