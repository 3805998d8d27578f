//! The domain x scale x model grid: pair generation, upscaling, scoring,
//! aggregation and the result files.

mod emit;

pub use emit::{emit_csv, emit_json, emit_markdown, load_run, write_outputs, OutputFiles, MISSING_CELL};

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::degrade::{make_pairs, DegradationSpec, PairsManifest, Profile};
use crate::error::{Error, Result};
use crate::imagecore::load_pgm;
use crate::metrics::{evaluate_all, MetricKind, MetricReport};
use crate::models::{
    check_weights, load_weights, upscale, ModelKind, ModelWeights, RrdbLiteConfig, SrcnnConfig, SwinLiteConfig,
    RDBS_PER_RRDB,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const BENCH_SCALES: [u32; 3] = [2, 3, 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// Row label of the domain's table ("Renal", "Chest", ...).
    pub name: String,
    /// Directory of `*.pgm` HR images.
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// MSRW file per scale; required for every configured scale the model supports.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub weights: BTreeMap<u32, PathBuf>,
}

impl ModelSpec {
    pub fn bicubic() -> Self {
        Self { kind: ModelKind::Bicubic, weights: BTreeMap::new() }
    }
}

/// A bench run description, normally read from JSON. Relative paths are
/// resolved against [`BenchConfig::base_dir`] (the config file's directory
/// when loaded with [`BenchConfig::load`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub domains: Vec<DomainSpec>,
    pub scales: Vec<u32>,
    pub models: Vec<ModelSpec>,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_profile() -> Profile {
    Profile::Classical
}

impl BenchConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let mut cfg: BenchConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = Some(path.parent().map(Path::to_path_buf).unwrap_or_default());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.domains.is_empty() {
            return bad("config needs at least one domain".into());
        }
        if self.scales.is_empty() {
            return bad("config needs at least one scale".into());
        }
        if self.models.is_empty() {
            return bad("config needs at least one model".into());
        }
        let mut slugs = HashSet::new();
        for d in &self.domains {
            if d.name.trim().is_empty() {
                return bad("domain names must not be empty".into());
            }
            if !slugs.insert(slug(&d.name)) {
                return bad(format!("duplicate domain {:?}", d.name));
            }
        }
        let mut seen = HashSet::new();
        for &s in &self.scales {
            if !BENCH_SCALES.contains(&s) {
                return bad(format!("scale must be 2, 3 or 4, got {s}"));
            }
            if !seen.insert(s) {
                return bad(format!("duplicate scale {s}"));
            }
        }
        let mut kinds = HashSet::new();
        for m in &self.models {
            if !kinds.insert(m.kind) {
                return bad(format!("duplicate model {}", m.kind));
            }
            if !m.kind.needs_weights() {
                if !m.weights.is_empty() {
                    return bad(format!("{} takes no weights", m.kind));
                }
                continue;
            }
            for &s in self.scales.iter().filter(|&&s| m.kind.supports_scale(s)) {
                if !m.weights.contains_key(&s) {
                    return bad(format!("{} needs a weights file for scale {s}", m.kind));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of every config field.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(bytes))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Directory-safe form of a domain name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.trim().chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageResult {
    pub name: String,
    /// Degradation seed used for this image.
    pub seed: u64,
    pub metrics: MetricReport,
}

/// One (domain, scale, model) cell. Unsupported cells carry no images and no mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub domain: String,
    pub scale: u32,
    pub model: ModelKind,
    pub supported: bool,
    pub mean: Option<MetricReport>,
    pub images: Vec<ImageResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub profile: Profile,
    pub config_hash: String,
    /// Pixel-value conventions behind the metric magnitudes.
    pub intensity: String,
    /// Architecture of every configured model, so desk-scale results are not
    /// mistaken for full-size pretrained ones.
    pub architectures: IndexMap<String, String>,
    /// Wall-clock times; left out of `results.json` so reruns are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub manifest: RunManifest,
    pub config: BenchConfig,
    /// Domains, then scales, then models, each in config order.
    pub cells: Vec<CellResult>,
}

impl BenchRun {
    pub fn cell(&self, domain: &str, scale: u32, model: ModelKind) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.domain == domain && c.scale == scale && c.model == model)
    }
}

/// Arithmetic mean of each metric over the reports, in the given order.
pub fn mean_report(reports: &[&MetricReport]) -> Result<MetricReport> {
    if reports.is_empty() {
        return Err(Error::Precondition("mean of zero reports".into()));
    }
    let mut sums = [0.0f64; 9];
    for r in reports {
        for (s, k) in sums.iter_mut().zip(MetricKind::ALL) {
            *s += r.get(k);
        }
    }
    MetricReport::from_values(sums.map(|s| s / reports.len() as f64))
}

pub const INTENSITY_CONVENTION: &str =
    "images in [0,1]; PSNR and SSIM on [0,1], FSIM, VIF and sharpness measures on [0,255]";

/// One-line architecture summary of `kind` at the default desk-scale config.
pub fn architecture(kind: ModelKind) -> String {
    match kind {
        ModelKind::Bicubic => "Catmull-Rom bicubic interpolation (a = -0.5)".into(),
        ModelKind::Srcnn => {
            let c = SrcnnConfig::new(2);
            format!("SRCNN {}-{}-1 channels, kernels {}-{}-{}, on bicubic input", c.c1, c.c2, c.k1, c.k2, c.k3)
        }
        ModelKind::Swinlite => {
            let c = SwinLiteConfig::new(2);
            format!(
                "SwinIR-lite dim {}, {} RSTB x {} layers, window {}, {} heads, MLP ratio {}; x2/x4 only",
                c.embed_dim, c.rstb_count, c.layers_per_rstb, c.window, c.heads, c.mlp_ratio
            )
        }
        ModelKind::Rrdblite => {
            let c = RrdbLiteConfig::new(2);
            format!(
                "RRDB-lite {} features, {} RRDB x {} RDB x {} convs, growth {}, beta {}",
                c.features, c.rrdb_count, RDBS_PER_RRDB, c.dense_convs, c.growth, c.residual_scale
            )
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn load_model_weights(cfg: &BenchConfig) -> Result<BTreeMap<(ModelKind, u32), ModelWeights>> {
    let mut out = BTreeMap::new();
    for m in &cfg.models {
        for (&scale, path) in &m.weights {
            if !cfg.scales.contains(&scale) {
                continue;
            }
            let path = cfg.resolve(path);
            let w = load_weights(&path)?;
            check_weights(m.kind, &w, scale).map_err(|e| e.within(path.display().to_string()))?;
            out.insert((m.kind, scale), w);
        }
    }
    Ok(out)
}

/// Runs the whole grid. Pairs are written to `output_dir/pairs/<domain>/x<scale>`;
/// result files are left to [`write_outputs`].
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchRun> {
    cfg.validate()?;
    let started = unix_now();
    let weights = load_model_weights(cfg)?;
    let out_dir = cfg.output_path();
    let mut cells = Vec::new();

    for domain in &cfg.domains {
        let corpus = cfg.resolve(&domain.corpus);
        if !corpus.is_dir() {
            return Err(Error::Config(format!("corpus {} of domain {:?} is not a directory", corpus.display(), domain.name)));
        }
        for &scale in &cfg.scales {
            let spec = match cfg.profile {
                Profile::Classical => DegradationSpec::classical(scale).with_seed(cfg.seed),
                Profile::HighOrder => DegradationSpec::high_order(scale, cfg.seed),
            };
            let pairs_dir = out_dir.join("pairs").join(slug(&domain.name)).join(format!("x{scale}"));
            make_pairs(&corpus, &spec, &pairs_dir).map_err(|e| e.within(&domain.name))?;
            let manifest_path = pairs_dir.join("manifest.json");
            let text = fs::read_to_string(&manifest_path).map_err(Error::io(&manifest_path))?;
            let pairs: PairsManifest = serde_json::from_str(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", manifest_path.display())))?;
            let images = pairs
                .images
                .iter()
                .map(|r| {
                    let hr = load_pgm(pairs_dir.join("hr").join(&r.name))?;
                    let lr = load_pgm(pairs_dir.join("lr").join(&r.name))?;
                    Ok((r, hr, lr))
                })
                .collect::<Result<Vec<_>>>()?;

            let supported: Vec<&ModelSpec> = cfg.models.iter().filter(|m| m.kind.supports_scale(scale)).collect();
            let work: Vec<(ModelKind, usize)> = supported
                .iter()
                .flat_map(|m| (0..images.len()).map(move |i| (m.kind, i)))
                .collect();
            let results = work
                .par_iter()
                .map(|&(kind, i)| {
                    let (rec, hr, lr) = &images[i];
                    let item = || format!("{}/x{scale}/{kind}/{}", domain.name, rec.name);
                    let sr = upscale(lr, kind, weights.get(&(kind, scale)), scale).map_err(|e| e.within(item()))?;
                    let metrics = evaluate_all(hr, &sr).map_err(|e| e.within(item()))?;
                    Ok(ImageResult { name: rec.name.clone(), seed: rec.seed, metrics })
                })
                .collect::<Result<Vec<_>>>()?;

            let mut results = results.into_iter();
            for m in &cfg.models {
                if !m.kind.supports_scale(scale) {
                    cells.push(CellResult {
                        domain: domain.name.clone(),
                        scale,
                        model: m.kind,
                        supported: false,
                        mean: None,
                        images: Vec::new(),
                    });
                    continue;
                }
                let per_image: Vec<ImageResult> = results.by_ref().take(images.len()).collect();
                let mean = mean_report(&per_image.iter().map(|r| &r.metrics).collect::<Vec<_>>())?;
                cells.push(CellResult {
                    domain: domain.name.clone(),
                    scale,
                    model: m.kind,
                    supported: true,
                    mean: Some(mean),
                    images: per_image,
                });
            }
        }
    }

    Ok(BenchRun {
        manifest: RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            seed: cfg.seed,
            profile: cfg.profile,
            config_hash: cfg.hash(),
            intensity: INTENSITY_CONVENTION.into(),
            architectures: cfg.models.iter().map(|m| (m.kind.name().to_string(), architecture(m.kind))).collect(),
            timestamps: Some(Timestamps { started_unix: started, finished_unix: unix_now() }),
        },
        config: cfg.clone(),
        cells,
    })
}
