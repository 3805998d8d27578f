//! Pixel-domain visual information fidelity over four scales.

use super::plane::{filter_valid, gaussian_window, Plane};
use crate::error::{Error, Result};
use crate::imagecore::Image;

pub const VIF_MIN_DIM: usize = 32;
pub const VIF_SCALES: u32 = 4;
/// Variance of the visual noise on the `[0, 255]` scale.
const SIGMA_N_SQ: f64 = 2.0;
const TINY: f64 = 1e-10;

/// Window width at 1-based scale `s`: 17, 9, 5, 3 taps with `sigma = n / 5`.
fn window_len(s: u32) -> usize {
    (1usize << (VIF_SCALES - s + 1)) + 1
}

/// Information terms `(num, den)` of one scale, in bits.
fn scale_terms(a: &Plane, b: &Plane, taps: &[f64]) -> (f64, f64) {
    let mu_a = filter_valid(a, taps);
    if mu_a.is_empty() {
        return (0.0, 0.0);
    }
    let mu_b = filter_valid(b, taps);
    let aa = filter_valid(&a.zip(a, |p, q| p * q), taps);
    let bb = filter_valid(&b.zip(b, |p, q| p * q), taps);
    let ab = filter_valid(&a.zip(b, |p, q| p * q), taps);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..mu_a.data.len() {
        let (ma, mb) = (mu_a.data[i], mu_b.data[i]);
        let mut var_a = (aa.data[i] - ma * ma).max(0.0);
        let var_b = (bb.data[i] - mb * mb).max(0.0);
        let cov = ab.data[i] - ma * mb;

        let mut g = cov / (var_a + TINY);
        let mut sv = var_b - g * cov;
        if var_a < TINY {
            g = 0.0;
            sv = var_b;
            var_a = 0.0;
        }
        if var_b < TINY {
            g = 0.0;
            sv = 0.0;
        }
        if g < 0.0 {
            sv = var_b;
            g = 0.0;
        }
        sv = sv.max(TINY);
        num += (1.0 + g * g * var_a / (sv + SIGMA_N_SQ)).log2();
        den += (1.0 + var_a / SIGMA_N_SQ).log2();
    }
    (num, den)
}

pub fn vif(reference: &Image, x: &Image) -> Result<f64> {
    reference.ensure_same_dims(x)?;
    let (w, h) = x.dims();
    if w.min(h) < VIF_MIN_DIM {
        return Err(Error::Precondition(format!(
            "VIF needs images of at least {VIF_MIN_DIM}x{VIF_MIN_DIM}, got {w}x{h}"
        )));
    }
    let mut a = Plane::from_image(reference, 255.0);
    let mut b = Plane::from_image(x, 255.0);
    let (mut num, mut den) = (0.0, 0.0);
    for s in 1..=VIF_SCALES {
        let n = window_len(s);
        let taps = gaussian_window(n, n as f64 / 5.0);
        if s > 1 {
            a = filter_valid(&a, &taps).subsample(2);
            b = filter_valid(&b, &taps).subsample(2);
            if a.is_empty() {
                break;
            }
        }
        let (nu, de) = scale_terms(&a, &b, &taps);
        num += nu;
        den += de;
    }
    if den > 0.0 {
        Ok(num / den)
    } else if reference == x {
        // no reference detail at any scale: nothing to lose
        Ok(1.0)
    } else {
        Ok(0.0)
    }
}
