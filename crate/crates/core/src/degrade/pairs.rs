use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{degrade, DegradationSpec};
use crate::error::{Error, Result};
use crate::imagecore::{load_pgm, save_pgm};

/// 64-bit FNV-1a over the UTF-8 bytes of `name`.
pub fn stable_name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Per-image seed, independent of corpus order.
pub fn image_seed(seed: u64, file_name: &str) -> u64 {
    seed ^ stable_name_hash(file_name)
}

/// `*.pgm` files directly under `dir`, sorted by file name.
pub fn list_corpus(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub name: String,
    pub seed: u64,
    pub hr: [usize; 2],
    pub lr: [usize; 2],
}

/// `manifest.json` written next to `hr/` and `lr/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairsManifest {
    pub spec: DegradationSpec,
    pub images: Vec<PairRecord>,
}

/// Writes `out_dir/hr/NAME.pgm` (center-cropped to a multiple of the scale)
/// and `out_dir/lr/NAME.pgm` for every PGM in `corpus_dir`, plus
/// `out_dir/manifest.json`. Returns the number of pairs.
pub fn make_pairs(corpus_dir: &Path, spec: &DegradationSpec, out_dir: &Path) -> Result<usize> {
    spec.validate()?;
    let files = list_corpus(corpus_dir)?;
    if files.is_empty() {
        return Err(Error::Config(format!(
            "no .pgm images in corpus {}",
            corpus_dir.display()
        )));
    }
    let hr_dir = out_dir.join("hr");
    let lr_dir = out_dir.join("lr");
    for d in [&hr_dir, &lr_dir] {
        fs::create_dir_all(d).map_err(Error::io(d))?;
    }

    let records = files
        .par_iter()
        .map(|path| {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::Config(format!("non-UTF-8 file name {}", path.display())))?
                .to_owned();
            let run = || -> Result<PairRecord> {
                let img = load_pgm(path)?;
                let seed = image_seed(spec.seed, &name);
                let hr = img.center_crop_to_multiple(spec.scale as usize).map_err(|_| {
                    Error::Degradation(format!(
                        "{}x{} image is smaller than scale {}",
                        img.width(),
                        img.height(),
                        spec.scale
                    ))
                })?;
                let lr = degrade(&hr, &DegradationSpec { seed, ..spec.clone() })?;
                save_pgm(&hr, hr_dir.join(&name))?;
                save_pgm(&lr, lr_dir.join(&name))?;
                Ok(PairRecord {
                    name: name.clone(),
                    seed,
                    hr: [hr.width(), hr.height()],
                    lr: [lr.width(), lr.height()],
                })
            };
            run().map_err(|e| e.within(name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = PairsManifest {
        spec: spec.clone(),
        images: records,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n").map_err(Error::io(&path))?;
    Ok(manifest.images.len())
}
