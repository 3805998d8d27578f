//! Seeded grayscale phantoms standing in for the five clinical image domains,
//! used for the bundled corpora, tests and examples.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::degrade::gaussian_blur;
use crate::error::{Error, Result};
use crate::imagecore::{save_pgm, Image};
use crate::rng::Prng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Renal,
    Chest,
    Brain,
    Nephrolithiasis,
    Spine,
}

impl Domain {
    /// Table order.
    pub const ALL: [Domain; 5] = [Domain::Renal, Domain::Chest, Domain::Brain, Domain::Nephrolithiasis, Domain::Spine];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Renal => "renal",
            Domain::Chest => "chest",
            Domain::Brain => "brain",
            Domain::Nephrolithiasis => "nephrolithiasis",
            Domain::Spine => "spine",
        }
    }

    /// Row label in reports.
    pub fn label(self) -> &'static str {
        match self {
            Domain::Renal => "Renal",
            Domain::Chest => "Chest",
            Domain::Brain => "Brain",
            Domain::Nephrolithiasis => "Nephrolithiasis",
            Domain::Spine => "Spine",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown domain {s:?}")))
    }
}

/// Soft-edged ellipse indicator in normalized coordinates.
fn ellipse(u: f64, v: f64, cx: f64, cy: f64, rx: f64, ry: f64, angle: f64, edge: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    let (du, dv) = (u - cx, v - cy);
    let (a, b) = ((c * du + s * dv) / rx, (-s * du + c * dv) / ry);
    let r = (a * a + b * b).sqrt();
    smoothstep(1.0 + edge, 1.0 - edge, r)
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn render(n: usize, f: impl Fn(f64, f64) -> f64) -> Image {
    Image::from_fn(n, n, |x, y| {
        let u = (x as f64 + 0.5) / n as f64;
        let v = (y as f64 + 0.5) / n as f64;
        f(u, v) as f32
    })
}

/// Multiplicative speckle smoothed to a correlation length of about a pixel.
fn speckle(img: &Image, strength: f64, rng: &mut Prng) -> Image {
    let field = Image::from_fn(img.width(), img.height(), |_, _| (rng.normal() * strength) as f32);
    let field = gaussian_blur(&field, 0.7);
    let data = img.data().iter().zip(field.data()).map(|(&v, &s)| v * (1.0 + s)).collect();
    Image::new(img.width(), img.height(), data).expect("finite").clamp01()
}

fn additive_noise(img: &Image, sigma: f64, rng: &mut Prng) -> Image {
    let data = img.data().iter().map(|&v| v + (rng.normal() * sigma) as f32).collect();
    Image::new(img.width(), img.height(), data).expect("finite").clamp01()
}

/// An `n x n` phantom of `domain`. Shape parameters are jittered by `seed`.
pub fn phantom(domain: Domain, n: usize, seed: u64) -> Image {
    let mut rng = Prng::new(seed ^ (domain as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut j = |amp: f64| rng.uniform(-amp, amp);
    let img = match domain {
        Domain::Renal => {
            // kidney in fan-shaped ultrasound field
            let (cx, cy, ang) = (0.5 + j(0.05), 0.55 + j(0.05), 0.5 + j(0.3));
            let (rx, ry) = (0.3 + j(0.03), 0.17 + j(0.02));
            let cyst = (0.5 + j(0.1), 0.5 + j(0.05), 0.04 + j(0.015));
            render(n, |u, v| {
                let fan = smoothstep(0.62, 0.58, ((u - 0.5).powi(2) + (v + 0.1).powi(2)).sqrt() - 0.4)
                    * smoothstep(0.55, 0.45, (u - 0.5).abs() / (v + 0.1));
                let cortex = ellipse(u, v, cx, cy, rx, ry, ang, 0.08);
                let sinus = ellipse(u, v, cx, cy, rx * 0.5, ry * 0.4, ang, 0.2);
                let c = ellipse(u, v, cyst.0, cyst.1, cyst.2, cyst.2, 0.0, 0.2);
                fan * (0.35 + 0.03 * (6.0 * v).sin() + 0.15 * cortex + 0.3 * sinus - 0.3 * c)
            })
        }
        Domain::Chest => {
            let tilt = j(0.05);
            let lung = (0.19 + j(0.02), 0.32 + j(0.03));
            render(n, |u, v| {
                let body = ellipse(u, v, 0.5, 0.55, 0.48, 0.55, 0.0, 0.05);
                let left = ellipse(u, v, 0.3, 0.5, lung.0, lung.1, tilt, 0.1);
                let right = ellipse(u, v, 0.7, 0.5, lung.0, lung.1, -tilt, 0.1);
                let heart = ellipse(u, v, 0.56, 0.62, 0.14, 0.12, 0.3, 0.15);
                let spine = smoothstep(0.06, 0.03, (u - 0.5).abs());
                let ribs = (((v - 0.25 * (u - 0.5).abs()) * 28.0).sin().max(0.0)).powi(6) * (left + right);
                0.15 + 0.55 * body - 0.45 * (left + right) + 0.25 * heart + 0.2 * spine + 0.25 * ribs
            })
        }
        Domain::Brain => {
            let bleed = (0.35 + j(0.1), 0.4 + j(0.1), 0.06 + j(0.02));
            let ang = j(0.1);
            render(n, |u, v| {
                let head = ellipse(u, v, 0.5, 0.5, 0.42, 0.47, ang, 0.03);
                let inner = ellipse(u, v, 0.5, 0.5, 0.37, 0.42, ang, 0.04);
                let vl = ellipse(u, v, 0.45, 0.48, 0.04, 0.12, 0.25, 0.2);
                let vr = ellipse(u, v, 0.55, 0.48, 0.04, 0.12, -0.25, 0.2);
                let gyri = 0.04 * ((u * 40.0).sin() * (v * 37.0).cos());
                let h = ellipse(u, v, bleed.0, bleed.1, bleed.2, bleed.2 * 0.7, 0.4, 0.3);
                0.9 * (head - inner) + inner * (0.45 + gyri - 0.25 * (vl + vr) + 0.3 * h)
            })
        }
        Domain::Nephrolithiasis => {
            let stone = (0.3 + j(0.04), 0.5 + j(0.05), 0.025 + j(0.008));
            render(n, |u, v| {
                let abdomen = ellipse(u, v, 0.5, 0.5, 0.46, 0.36, 0.0, 0.04);
                let fat = abdomen - ellipse(u, v, 0.5, 0.5, 0.42, 0.32, 0.0, 0.04);
                let kl = ellipse(u, v, 0.3, 0.5, 0.08, 0.13, 0.3, 0.15);
                let kr = ellipse(u, v, 0.7, 0.5, 0.08, 0.13, -0.3, 0.15);
                let vert = ellipse(u, v, 0.5, 0.62, 0.07, 0.06, 0.0, 0.1);
                let s = ellipse(u, v, stone.0, stone.1, stone.2, stone.2, 0.0, 0.2);
                0.05 + 0.35 * abdomen - 0.15 * fat + 0.2 * (kl + kr) + 0.5 * vert + 0.6 * s
            })
        }
        Domain::Spine => {
            let curve = 0.05 + j(0.03);
            let bulge = j(0.5).abs() * 0.05;
            render(n, |u, v| {
                let axis = 0.5 + curve * (std::f64::consts::PI * v).sin();
                let du = u - axis;
                let phase = (v * 5.0).fract();
                let body = smoothstep(0.16, 0.13, du.abs()) * smoothstep(0.0, 0.08, phase) * smoothstep(0.86, 0.78, phase);
                let disc = smoothstep(0.16 + bulge, 0.12, du.abs()) * (1.0 - smoothstep(0.0, 0.08, phase).min(smoothstep(0.86, 0.78, phase)));
                let cord = smoothstep(0.06, 0.04, (du - 0.22).abs());
                0.12 + 0.5 * body + 0.3 * disc + 0.35 * cord
            })
        }
    };
    let img = gaussian_blur(&img, 0.6);
    match domain {
        Domain::Renal => speckle(&img, 0.25, &mut rng),
        _ => additive_noise(&img, 0.01, &mut rng),
    }
}

/// Writes `count` phantoms per domain as `out/<domain>/<domain>_NN.pgm`.
pub fn write_corpus(out: &Path, domains: &[Domain], count: usize, n: usize, seed: u64) -> Result<()> {
    for &d in domains {
        let dir = out.join(d.name());
        std::fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
        for i in 0..count {
            let img = phantom(d, n, seed.wrapping_add(i as u64));
            save_pgm(&img, dir.join(format!("{}_{i:02}.pgm", d.name())))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_distinct() {
        for d in Domain::ALL {
            let a = phantom(d, 48, 3);
            assert_eq!(a, phantom(d, 48, 3));
            assert_ne!(a, phantom(d, 48, 4));
            assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)));
            let mean = a.data().iter().sum::<f32>() / a.len() as f32;
            let var = a.data().iter().map(|v| (v - mean).powi(2)).sum::<f32>() / a.len() as f32;
            assert!(var > 1e-3, "{d} has too little structure");
        }
    }

    #[test]
    fn names_round_trip() {
        for d in Domain::ALL {
            assert_eq!(d.name().parse::<Domain>().unwrap(), d);
        }
    }
}
