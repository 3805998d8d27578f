//! Regular and shifted window attention on a 16x16 feature map, with the
//! attention weights traced to show the shift mask at work.
//!
//! cargo run --release --example window_attention

use medsr::models::{init_attention, window_attention_traced, ModelWeights, Tensor};
use medsr::rng::Prng;

fn main() -> medsr::Result<()> {
    let (dim, heads, window, side) = (8, 2, 8, 16);
    let mut rng = Prng::new(5);
    let mut w = ModelWeights::new();
    init_attention(&mut w, &mut rng, "", dim, heads, window, 0.2);
    let x = Tensor::new(vec![1, dim, side, side], (0..dim * side * side).map(|_| rng.normal() as f32).collect())?;

    for shifted in [false, true] {
        let (y, traces) = window_attention_traced(&x, &w, window, heads, shifted)?;
        let mut worst_row = 0.0f64;
        let mut leaked = 0.0f64;
        let mut masked = 0usize;
        for t in &traces {
            let n = t.positions.len();
            for i in 0..n {
                let row = &t.probs[i * n..(i + 1) * n];
                worst_row = worst_row.max((row.iter().map(|&p| p as f64).sum::<f64>() - 1.0).abs());
                for j in 0..n {
                    if t.regions[i] != t.regions[j] {
                        masked += 1;
                        leaked = leaked.max(row[j] as f64);
                    }
                }
            }
        }
        println!(
            "shifted={shifted:<5} windows x heads {:>2}  output {:?}  max |row sum - 1| {worst_row:.1e}  masked pairs {masked}  max leaked weight {leaked:.1e}",
            traces.len(),
            y.dims()
        );
    }
    Ok(())
}
