//! No-reference sharpness measures on the `[0, 255]` scale, plus the signed
//! over/under-enhancement index built from Tenengrad.

use crate::error::{Error, Result};
use crate::imagecore::Image;

fn check_min(img: &Image, what: &str) -> Result<()> {
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return Err(Error::Precondition(format!("{what} needs at least 3x3 pixels, got {w}x{h}")));
    }
    Ok(())
}

/// Applies a 3x3 stencil at every interior pixel (`1..w-1`, `1..h-1`).
fn interior_responses(img: &Image, f: impl Fn(&dyn Fn(isize, isize) -> f64) -> f64) -> Vec<f64> {
    let (w, h) = img.dims();
    let mut out = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let at = |dx: isize, dy: isize| {
                img.get((x as isize + dx) as usize, (y as isize + dy) as usize) as f64 * 255.0
            };
            out.push(f(&at));
        }
    }
    out
}

/// Mean of `Gx^2 + Gy^2` with 3x3 Sobel kernels over interior pixels.
pub fn tenengrad(img: &Image) -> Result<f64> {
    check_min(img, "tenengrad")?;
    let r = interior_responses(img, |p| {
        let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
        let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        gx * gx + gy * gy
    });
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

/// Population variance of the 4-neighbour Laplacian over interior pixels.
pub fn laplacian_variance(img: &Image) -> Result<f64> {
    check_min(img, "laplacian variance")?;
    let r = interior_responses(img, |p| p(0, -1) + p(-1, 0) + p(1, 0) + p(0, 1) - 4.0 * p(0, 0));
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    Ok(r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

/// Mean over pixels with both `x + 2` and `y + 2` in range of
/// `((I(x+2,y) - I)^2 + (I(x,y+2) - I)^2) / 2`.
pub fn brenner(img: &Image) -> Result<f64> {
    check_min(img, "brenner")?;
    let (w, h) = img.dims();
    let v = |x: usize, y: usize| img.get(x, y) as f64 * 255.0;
    let mut total = 0.0;
    for y in 0..h - 2 {
        for x in 0..w - 2 {
            let c = v(x, y);
            total += ((v(x + 2, y) - c).powi(2) + (v(x, y + 2) - c).powi(2)) / 2.0;
        }
    }
    Ok(total / ((w - 2) * (h - 2)) as f64)
}

/// `(T_x - T_ref) / max(T_x, T_ref, 1e-9)` with `T` = Tenengrad; negative
/// when `x` is softer than the reference, positive when it is sharper.
pub fn odi(reference: &Image, x: &Image) -> Result<f64> {
    reference.ensure_same_dims(x)?;
    let (tr, tx) = (tenengrad(reference)?, tenengrad(x)?);
    Ok((tx - tr) / tx.max(tr).max(1e-9))
}
