//! Separable resampling with imresize-style coordinate mapping and optional
//! antialiasing on downscale.
//!
//! Output sample `d` maps to source coordinate `(d + 0.5) * in / out - 0.5`.
//! When antialiasing a downscale by factor `s > 1`, the kernel is stretched to
//! `k(x / s)`, widening its support by `s`. Weights are renormalized to sum to
//! one and out-of-range taps clamp to the edge sample.

use serde::{Deserialize, Serialize};

use super::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleKernel {
    Nearest,
    Bilinear,
    /// Catmull-Rom cubic, `a = -0.5`.
    Bicubic,
}

impl ResampleKernel {
    fn support(self) -> f64 {
        match self {
            ResampleKernel::Nearest => 0.5,
            ResampleKernel::Bilinear => 1.0,
            ResampleKernel::Bicubic => 2.0,
        }
    }

    pub(crate) fn weight(self, x: f64) -> f64 {
        let ax = x.abs();
        match self {
            ResampleKernel::Nearest => {
                if ax < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            ResampleKernel::Bilinear => (1.0 - ax).max(0.0),
            ResampleKernel::Bicubic => {
                const A: f64 = -0.5;
                if ax <= 1.0 {
                    ((A + 2.0) * ax - (A + 3.0)) * ax * ax + 1.0
                } else if ax < 2.0 {
                    ((A * ax - 5.0 * A) * ax + 8.0 * A) * ax - 4.0 * A
                } else {
                    0.0
                }
            }
        }
    }
}

/// Source taps for one output sample.
struct Taps {
    index: Vec<usize>,
    weight: Vec<f64>,
}

fn axis_taps(in_len: usize, out_len: usize, kernel: ResampleKernel, antialias: bool) -> Vec<Taps> {
    let scale = in_len as f64 / out_len as f64;
    if kernel == ResampleKernel::Nearest {
        // point sampling; antialias has no meaning for it
        return (0..out_len)
            .map(|d| {
                let s = (((d as f64 + 0.5) * scale).floor() as usize).min(in_len - 1);
                Taps {
                    index: vec![s],
                    weight: vec![1.0],
                }
            })
            .collect();
    }
    let stretch = if antialias && scale > 1.0 { scale } else { 1.0 };
    let support = kernel.support() * stretch;
    (0..out_len)
        .map(|d| {
            let center = (d as f64 + 0.5) * scale - 0.5;
            let lo = (center - support).floor() as isize;
            let hi = (center + support).ceil() as isize;
            let mut index = Vec::with_capacity((hi - lo + 1) as usize);
            let mut weight = Vec::with_capacity(index.capacity());
            for i in lo..=hi {
                let w = kernel.weight((i as f64 - center) / stretch);
                if w != 0.0 {
                    index.push(i.clamp(0, in_len as isize - 1) as usize);
                    weight.push(w);
                }
            }
            let total: f64 = weight.iter().sum();
            if total != 0.0 {
                weight.iter_mut().for_each(|w| *w /= total);
            }
            Taps { index, weight }
        })
        .collect()
}

/// Resizes `img` to `out_w x out_h`. Output is not clamped, so cubic
/// overshoot near edges is preserved.
pub fn resample(
    img: &Image,
    out_w: usize,
    out_h: usize,
    kernel: ResampleKernel,
    antialias: bool,
) -> Image {
    assert!(out_w > 0 && out_h > 0, "output dimensions must be positive");
    let (w, h) = img.dims();
    let xt = axis_taps(w, out_w, kernel, antialias);
    let yt = axis_taps(h, out_h, kernel, antialias);
    let src = img.data();

    // horizontal pass into f64 scratch
    let mut tmp = vec![0.0f64; out_w * h];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for (x, t) in xt.iter().enumerate() {
            tmp[y * out_w + x] = t
                .index
                .iter()
                .zip(&t.weight)
                .map(|(&i, &wt)| line[i] as f64 * wt)
                .sum();
        }
    }
    let mut out = vec![0.0f32; out_w * out_h];
    for (y, t) in yt.iter().enumerate() {
        let row = &mut out[y * out_w..(y + 1) * out_w];
        for (x, o) in row.iter_mut().enumerate() {
            *o = t
                .index
                .iter()
                .zip(&t.weight)
                .map(|(&i, &wt)| tmp[i * out_w + x] * wt)
                .sum::<f64>() as f32;
        }
    }
    Image::from_vec(out_w, out_h, out)
}
