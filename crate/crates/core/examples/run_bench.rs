//! Run the bundled benchmark grid (five phantom domains, scales 2-4, all
//! model families) and print the Markdown tables. Pass another config path
//! to run your own corpus.
//!
//! cargo run --release --example run_bench -- fixtures/configs/smoke.json

use std::path::PathBuf;

use medsr::bench::{emit_markdown, run_bench, write_outputs, BenchConfig};

fn main() -> medsr::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/configs/bench.json"));
    let cfg = BenchConfig::load(&path)?;
    let run = run_bench(&cfg)?;
    let files = write_outputs(&run, &cfg.output_path())?;
    print!("{}", emit_markdown(&run));
    eprintln!("results in {}", files.json.parent().unwrap_or(&files.json).display());
    Ok(())
}
