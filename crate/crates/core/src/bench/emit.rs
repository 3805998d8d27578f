//! Result files: Markdown tables laid out like the published comparison
//! tables, a long-format CSV, the full run as JSON and a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{hex, BenchRun, RunManifest};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;

pub const MISSING_CELL: &str = "--";

fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// One table per domain; per scale, the nine metric rows in report order;
/// one column per model. Unsupported cells read `--`.
pub fn emit_markdown(run: &BenchRun) -> String {
    let cfg = &run.config;
    let mut out = String::new();
    let _ = writeln!(out, "# Super-resolution benchmark\n");
    let _ = writeln!(
        out,
        "Profile `{}`, seed {}, tool {}, config `{}`. Values are means over images; \
         rows marked ↓ are lower-is-better.\n",
        run.manifest.profile,
        run.manifest.seed,
        run.manifest.tool_version,
        &run.manifest.config_hash[..run.manifest.config_hash.len().min(12)],
    );
    for domain in &cfg.domains {
        let _ = writeln!(out, "## {}\n", domain.name);
        let mut header = String::from("| Image Type | Scale | Metrics |");
        let mut rule = String::from("|---|---|---|");
        for m in &cfg.models {
            let _ = write!(header, " {} |", m.kind.label());
            rule.push_str("---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for (si, &scale) in cfg.scales.iter().enumerate() {
            for (mi, metric) in MetricKind::ALL.into_iter().enumerate() {
                let name_cell = if si == 0 && mi == 0 { domain.name.as_str() } else { "" };
                let scale_cell = if mi == 0 { format!("×{scale}") } else { String::new() };
                let _ = write!(out, "| {name_cell} | {scale_cell} | {} |", metric.label());
                for m in &cfg.models {
                    let value = run
                        .cell(&domain.name, scale, m.kind)
                        .and_then(|c| c.mean.as_ref())
                        .map(|r| fmt2(r.get(metric)))
                        .unwrap_or_else(|| MISSING_CELL.to_string());
                    let _ = write!(out, " {value} |");
                }
                out.push('\n');
            }
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Long format, one row per (domain, scale, model, metric); the mean is empty
/// for unsupported cells.
pub fn emit_csv(run: &BenchRun) -> String {
    let mut out = String::from("domain,scale,model,metric,mean\n");
    for c in &run.cells {
        for metric in MetricKind::ALL {
            let mean = c.mean.as_ref().map(|r| r.get(metric).to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{mean}", csv_field(&c.domain), c.scale, c.model, metric.id());
        }
    }
    out
}

/// The run with per-image values, without wall-clock timestamps.
pub fn emit_json(run: &BenchRun) -> Result<String> {
    let mut stable = run.clone();
    stable.manifest.timestamps = None;
    Ok(serde_json::to_string_pretty(&stable)? + "\n")
}

pub fn load_run(path: impl AsRef<Path>) -> Result<BenchRun> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub markdown: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Serialize)]
struct ManifestFile<'a> {
    #[serde(flatten)]
    run: &'a RunManifest,
    /// SHA-256 of each result file.
    outputs: IndexMap<&'static str, String>,
}

/// Writes `results.csv`, `results.json`, `report.md` and `manifest.json` into `dir`.
pub fn write_outputs(run: &BenchRun, dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let files = OutputFiles {
        csv: dir.join("results.csv"),
        json: dir.join("results.json"),
        markdown: dir.join("report.md"),
        manifest: dir.join("manifest.json"),
    };
    let contents = [
        ("results.csv", &files.csv, emit_csv(run)),
        ("results.json", &files.json, emit_json(run)?),
        ("report.md", &files.markdown, emit_markdown(run)),
    ];
    let mut outputs = IndexMap::new();
    for (name, path, text) in &contents {
        fs::write(path, text).map_err(Error::io(path))?;
        outputs.insert(*name, hex(&Sha256::digest(text.as_bytes())));
    }
    let manifest = ManifestFile { run: &run.manifest, outputs };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(&files.manifest, text).map_err(Error::io(&files.manifest))?;
    Ok(files)
}
