//! Full-reference and no-reference image quality measures, plus the
//! registry that fixes their report order.

mod fsim;
mod lpips;
mod plane;
mod sharpness;
mod similarity;
mod vif;

pub use fsim::{fsim, phase_congruency, PhaseCongruencyParams, FSIM_MIN_DIM};
pub use lpips::{
    lpips_proxy, lpips_proxy_features, lpips_proxy_weights, lpips_proxy_weights_from_seed, LPIPS_MIN_DIM,
    LPIPS_PROXY_SEED, LPIPS_STAGES,
};
pub use sharpness::{brenner, laplacian_variance, odi, tenengrad};
pub use similarity::{psnr, ssim, PSNR_CAP_DB, SSIM_SIGMA, SSIM_WINDOW};
pub use vif::{vif, VIF_MIN_DIM, VIF_SCALES};

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Psnr,
    Ssim,
    Fsim,
    LpipsProxy,
    Odi,
    Vif,
    Tenengrad,
    LaplacianVar,
    Brenner,
}

impl MetricKind {
    /// Report order.
    pub const ALL: [MetricKind; 9] = [
        MetricKind::Psnr,
        MetricKind::Ssim,
        MetricKind::Fsim,
        MetricKind::LpipsProxy,
        MetricKind::Odi,
        MetricKind::Vif,
        MetricKind::Tenengrad,
        MetricKind::LaplacianVar,
        MetricKind::Brenner,
    ];

    pub fn id(self) -> &'static str {
        match self {
            MetricKind::Psnr => "psnr",
            MetricKind::Ssim => "ssim",
            MetricKind::Fsim => "fsim",
            MetricKind::LpipsProxy => "lpips_proxy",
            MetricKind::Odi => "odi",
            MetricKind::Vif => "vif",
            MetricKind::Tenengrad => "tenengrad",
            MetricKind::LaplacianVar => "laplacian_var",
            MetricKind::Brenner => "brenner",
        }
    }

    /// Row label in the Markdown report; lower-is-better rows carry "↓".
    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Psnr => "PSNR",
            MetricKind::Ssim => "SSIM",
            MetricKind::Fsim => "FSIM",
            MetricKind::LpipsProxy => "LPIPS (proxy) ↓",
            MetricKind::Odi => "ODI Score ↓",
            MetricKind::Vif => "VIF",
            MetricKind::Tenengrad => "Tenengrad sharpness",
            MetricKind::LaplacianVar => "Laplacian variance",
            MetricKind::Brenner => "Brenner",
        }
    }

    pub fn higher_is_better(self) -> bool {
        !matches!(self, MetricKind::LpipsProxy | MetricKind::Odi)
    }

    /// Sharpness measures score the candidate alone.
    pub fn compute(self, reference: &Image, x: &Image) -> Result<f64> {
        reference.ensure_same_dims(x)?;
        match self {
            MetricKind::Psnr => psnr(reference, x),
            MetricKind::Ssim => ssim(reference, x),
            MetricKind::Fsim => fsim(reference, x),
            MetricKind::LpipsProxy => lpips_proxy(reference, x),
            MetricKind::Odi => odi(reference, x),
            MetricKind::Vif => vif(reference, x),
            MetricKind::Tenengrad => tenengrad(x),
            MetricKind::LaplacianVar => laplacian_variance(x),
            MetricKind::Brenner => brenner(x),
        }
    }

    /// Parses `all` or a comma-separated list of ids.
    pub fn parse_list(s: &str) -> Result<Vec<MetricKind>> {
        if s.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out: Vec<MetricKind> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let k: MetricKind = part.parse()?;
            if !out.contains(&k) {
                out.push(k);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("empty metric list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub kind: MetricKind,
    pub value: f64,
}

impl MetricValue {
    pub fn name(&self) -> &'static str {
        self.kind.id()
    }

    pub fn higher_is_better(&self) -> bool {
        self.kind.higher_is_better()
    }
}

/// Computes the requested metrics in order, naming the metric on failure.
pub fn evaluate(reference: &Image, x: &Image, kinds: &[MetricKind]) -> Result<Vec<MetricValue>> {
    kinds
        .iter()
        .map(|&kind| {
            let wrap = |e: Error| Error::Metric { metric: kind.id(), source: Box::new(e) };
            let value = kind.compute(reference, x).map_err(wrap)?;
            if !value.is_finite() {
                return Err(wrap(Error::Model(format!("non-finite value {value}"))));
            }
            Ok(MetricValue { kind, value })
        })
        .collect()
}

/// All nine metrics in report order. Serializes as `{"psnr": .., ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "IndexMap<String, f64>", try_from = "IndexMap<String, f64>")]
pub struct MetricReport {
    values: Vec<MetricValue>,
}

impl MetricReport {
    pub fn values(&self) -> &[MetricValue] {
        &self.values
    }

    pub fn get(&self, kind: MetricKind) -> f64 {
        self.values[MetricKind::ALL.iter().position(|&k| k == kind).unwrap()].value
    }

    pub fn csv_header() -> String {
        MetricKind::ALL.map(MetricKind::id).join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.values.iter().map(|v| v.value.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Builds a report from values in report order.
    pub fn from_values(values: [f64; 9]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Model(format!("non-finite metric value {v}")));
        }
        Ok(Self {
            values: MetricKind::ALL
                .iter()
                .zip(values)
                .map(|(&kind, value)| MetricValue { kind, value })
                .collect(),
        })
    }
}

impl From<MetricReport> for IndexMap<String, f64> {
    fn from(r: MetricReport) -> Self {
        r.values.iter().map(|v| (v.name().to_string(), v.value)).collect()
    }
}

impl TryFrom<IndexMap<String, f64>> for MetricReport {
    type Error = Error;

    fn try_from(map: IndexMap<String, f64>) -> Result<Self> {
        if map.len() != MetricKind::ALL.len() {
            return Err(Error::Format(format!("metric report needs 9 entries, got {}", map.len())));
        }
        let mut values = [0.0; 9];
        for (slot, kind) in values.iter_mut().zip(MetricKind::ALL) {
            *slot = *map
                .get(kind.id())
                .ok_or_else(|| Error::Format(format!("metric report lacks {}", kind.id())))?;
        }
        Self::from_values(values)
    }
}

pub fn evaluate_all(reference: &Image, x: &Image) -> Result<MetricReport> {
    Ok(MetricReport { values: evaluate(reference, x, &MetricKind::ALL)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> (Image, Image) {
        let a = Image::from_fn(40, 36, |x, y| 0.5 + 0.3 * ((x as f32 * 0.45).sin() * (y as f32 * 0.3).cos()));
        let b = a.map(|v| (v * 0.9 + 0.04).min(1.0));
        (a, b)
    }

    #[test]
    fn report_matches_single_metrics() {
        let (a, b) = pair();
        let r = evaluate_all(&a, &b).unwrap();
        assert_eq!(r.values().len(), 9);
        for k in MetricKind::ALL {
            assert_eq!(r.get(k), k.compute(&a, &b).unwrap(), "{k}");
        }
    }

    #[test]
    fn identity_report() {
        let (a, _) = pair();
        let r = evaluate_all(&a, &a).unwrap();
        assert_eq!(r.get(MetricKind::Psnr), 100.0);
        assert!((r.get(MetricKind::Ssim) - 1.0).abs() < 1e-6);
        assert!((r.get(MetricKind::Fsim) - 1.0).abs() < 1e-6);
        assert_eq!(r.get(MetricKind::LpipsProxy), 0.0);
        assert_eq!(r.get(MetricKind::Odi), 0.0);
        assert!((r.get(MetricKind::Vif) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn json_round_trip_and_order() {
        let (a, b) = pair();
        let r = evaluate_all(&a, &b).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.starts_with("{\"psnr\":"));
        let back: MetricReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<MetricReport>("{\"psnr\": 1.0}").is_err());
        assert_eq!(MetricReport::csv_header().split(',').count(), 9);
        assert_eq!(r.to_csv_row().split(',').count(), 9);
    }

    #[test]
    fn errors_name_the_metric() {
        let small = Image::filled(20, 20, 0.5);
        let err = evaluate_all(&small, &small).unwrap_err();
        assert!(err.to_string().contains("fsim"), "{err}");
        assert!(matches!(err.root(), Error::Precondition(_)));
    }

    #[test]
    fn metric_lists() {
        assert_eq!(MetricKind::parse_list("all").unwrap().len(), 9);
        assert_eq!(MetricKind::parse_list("psnr, ssim,psnr").unwrap(), vec![MetricKind::Psnr, MetricKind::Ssim]);
        assert!(MetricKind::parse_list("psnr,sharp").is_err());
    }
}
