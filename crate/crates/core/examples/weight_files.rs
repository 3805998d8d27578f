//! The MSRW weight format: inspect a bundled file, round-trip it, and see a
//! corrupted copy rejected.
//!
//! cargo run --release --example weight_files

use std::path::Path;

use medsr::models::{load_weights, ModelWeights};

fn main() -> medsr::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/weights/swinlite_x2.msrw");
    let w = load_weights(&path)?;
    println!("{}: {} tensors, {} parameters", path.display(), w.len(), w.num_params());
    for (name, t) in w.iter().take(6) {
        println!("  {name:<48} {:?}", t.dims());
    }

    let bytes = w.to_bytes();
    assert_eq!(ModelWeights::from_bytes(&bytes)?.to_bytes(), bytes);
    println!("round trip: {} bytes, identical", bytes.len());

    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    println!("corrupted magic: {}", ModelWeights::from_bytes(&bad).unwrap_err());
    println!("truncated: {}", ModelWeights::from_bytes(&bytes[..bytes.len() / 2]).unwrap_err());
    Ok(())
}
