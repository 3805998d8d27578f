use super::plane::{filter_valid, gaussian_window, Plane};
use crate::error::{Error, Result};
use crate::imagecore::Image;

pub const PSNR_CAP_DB: f64 = 100.0;

/// `10 log10(1 / MSE)` on `[0, 1]` images; capped when the images match.
pub fn psnr(reference: &Image, x: &Image) -> Result<f64> {
    reference.ensure_same_dims(x)?;
    let mse = reference
        .data()
        .iter()
        .zip(x.data())
        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
        .sum::<f64>()
        / x.len() as f64;
    if mse < 1e-12 {
        return Ok(PSNR_CAP_DB);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Gaussian-windowed SSIM averaged over window positions that lie fully
/// inside the image.
pub fn ssim(reference: &Image, x: &Image) -> Result<f64> {
    reference.ensure_same_dims(x)?;
    let (w, h) = x.dims();
    if w.min(h) < SSIM_WINDOW {
        return Err(Error::Precondition(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let a = Plane::from_image(reference, 1.0);
    let b = Plane::from_image(x, 1.0);
    let taps = gaussian_window(SSIM_WINDOW, SSIM_SIGMA);
    let mu_a = filter_valid(&a, &taps);
    let mu_b = filter_valid(&b, &taps);
    let aa = filter_valid(&a.zip(&a, |p, q| p * q), &taps);
    let bb = filter_valid(&b.zip(&b, |p, q| p * q), &taps);
    let ab = filter_valid(&a.zip(&b, |p, q| p * q), &taps);
    let n = mu_a.data.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a.data[i], mu_b.data[i]);
            let va = aa.data[i] - ma * ma;
            let vb = bb.data[i] - mb * mb;
            let cov = ab.data[i] - ma * mb;
            ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2))
        })
        .sum();
    Ok(total / n as f64)
}
