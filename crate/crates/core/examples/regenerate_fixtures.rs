//! Rebuilds every bundled fixture: the frozen perceptual-proxy weights, the
//! five-domain phantom corpus, the six-image smoke corpus, bench configs and
//! model weights. SRCNN weights are trained here (a few minutes).
//!
//! cargo run --release --example regenerate_fixtures

use std::fs;
use std::path::Path;

use medsr::bench::{BenchConfig, DomainSpec, ModelSpec};
use medsr::degrade::{make_pairs, DegradationSpec, Profile};
use medsr::imagecore::save_pgm;
use medsr::metrics::lpips_proxy_weights_from_seed;
use medsr::models::{init_weights, load_training_pairs, save_weights, srcnn_train_on, ModelKind, SrcnnConfig, TrainOptions};
use medsr::synth::{phantom, write_corpus, Domain};
use medsr::Error;

const CORPUS_PER_DOMAIN: usize = 4;
const SIZE: usize = 64;
const WEIGHT_SEED: u64 = 0;

fn write_json(path: &Path, cfg: &BenchConfig) -> medsr::Result<()> {
    fs::write(path, serde_json::to_string_pretty(cfg)? + "\n").map_err(Error::io(path))
}

fn main() -> medsr::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let fx = root.join("fixtures");
    save_weights(&lpips_proxy_weights_from_seed(), root.join("src/metrics/lpips_proxy.msrw"))?;

    let corpus = fx.join("corpus");
    write_corpus(&corpus, &Domain::ALL, CORPUS_PER_DOMAIN, SIZE, 0)?;

    let smoke = fx.join("smoke/images");
    fs::create_dir_all(&smoke).map_err(Error::io(&smoke))?;
    for (i, d) in Domain::ALL.iter().cycle().take(6).enumerate() {
        save_pgm(&phantom(*d, SIZE, 100 + i as u64), smoke.join(format!("smoke_{i}_{d}.pgm")))?;
    }

    let wdir = fx.join("weights");
    fs::create_dir_all(&wdir).map_err(Error::io(&wdir))?;
    let tmp = std::env::temp_dir().join("medsr_fixture_pairs");
    for scale in [2, 3, 4] {
        // SRCNN learns from every domain at once
        let mut pairs = Vec::new();
        for d in Domain::ALL {
            let dir = tmp.join(d.name()).join(format!("x{scale}"));
            make_pairs(&corpus.join(d.name()), &DegradationSpec::classical(scale), &dir)?;
            pairs.extend(load_training_pairs(&dir)?);
        }
        let out = srcnn_train_on(&pairs, &SrcnnConfig::new(scale), &TrainOptions::default())?;
        println!("srcnn x{scale}: loss {:.4} -> {:.4}", out.losses[0], out.losses[out.losses.len() - 1]);
        save_weights(&out.weights, wdir.join(format!("srcnn_x{scale}.msrw")))?;
        for kind in [ModelKind::Swinlite, ModelKind::Rrdblite] {
            if kind.supports_scale(scale) {
                save_weights(&init_weights(kind, scale, WEIGHT_SEED)?, wdir.join(format!("{kind}_x{scale}.msrw")))?;
            }
        }
    }
    let _ = fs::remove_dir_all(&tmp);

    let learned = |kind: ModelKind, scales: &[u32]| ModelSpec {
        kind,
        weights: scales
            .iter()
            .filter(|&&s| kind.supports_scale(s))
            .map(|&s| (s, Path::new("../weights").join(format!("{kind}_x{s}.msrw"))))
            .collect(),
    };
    let all = [2, 3, 4];
    let bench = BenchConfig {
        domains: Domain::ALL
            .iter()
            .map(|d| DomainSpec { name: d.label().into(), corpus: Path::new("../corpus").join(d.name()) })
            .collect(),
        scales: all.to_vec(),
        models: vec![
            ModelSpec::bicubic(),
            learned(ModelKind::Srcnn, &all),
            learned(ModelKind::Swinlite, &all),
            learned(ModelKind::Rrdblite, &all),
        ],
        profile: Profile::Classical,
        seed: 0,
        output_dir: "../../out/bench".into(),
        base_dir: None,
    };
    fs::create_dir_all(fx.join("configs")).map_err(Error::io(fx.join("configs")))?;
    write_json(&fx.join("configs/bench.json"), &bench)?;

    let smoke_cfg = BenchConfig {
        domains: vec![DomainSpec { name: "Smoke".into(), corpus: "../smoke/images".into() }],
        scales: vec![2],
        models: vec![ModelSpec::bicubic(), learned(ModelKind::Srcnn, &[2])],
        output_dir: "../../out/smoke".into(),
        ..bench
    };
    write_json(&fx.join("configs/smoke.json"), &smoke_cfg)?;
    println!("fixtures written to {}", fx.display());
    Ok(())
}
