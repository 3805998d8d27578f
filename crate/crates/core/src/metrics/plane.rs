//! `f64` planes and the separable Gaussian filtering shared by SSIM and VIF.

use crate::imagecore::Image;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub w: usize,
    pub h: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn from_image(img: &Image, scale: f64) -> Self {
        Self { w: img.width(), h: img.height(), data: img.to_f64_scaled(scale) }
    }

    pub fn zip(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Every `step`-th sample in both directions, starting at the origin.
    pub fn subsample(&self, step: usize) -> Plane {
        let (w, h) = (self.w.div_ceil(step), self.h.div_ceil(step));
        let mut data = Vec::with_capacity(w * h);
        for y in (0..self.h).step_by(step) {
            for x in (0..self.w).step_by(step) {
                data.push(self.data[y * self.w + x]);
            }
        }
        Plane { w, h, data }
    }
}

/// Normalized 1D Gaussian with `n` taps centered on the middle one. Its outer
/// product equals the normalized 2D window.
pub(crate) fn gaussian_window(n: usize, sigma: f64) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..n).map(|i| (-(i as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable filtering keeping only positions where the window fits; the
/// result is empty when it never does.
pub(crate) fn filter_valid(p: &Plane, taps: &[f64]) -> Plane {
    let n = taps.len();
    if p.w < n || p.h < n {
        return Plane { w: 0, h: 0, data: Vec::new() };
    }
    let (ow, oh) = (p.w - n + 1, p.h - n + 1);
    let mut rows = vec![0.0; ow * p.h];
    for y in 0..p.h {
        let src = &p.data[y * p.w..(y + 1) * p.w];
        for x in 0..ow {
            rows[y * ow + x] = taps.iter().zip(&src[x..x + n]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for (i, t) in taps.iter().enumerate() {
            let src = &rows[(y + i) * ow..(y + i + 1) * ow];
            for (o, v) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *o += t * v;
            }
        }
    }
    Plane { w: ow, h: oh, data: out }
}
