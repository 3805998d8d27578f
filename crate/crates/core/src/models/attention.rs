//! Window multi-head self-attention with a learned relative position bias,
//! optionally on a cyclically shifted grid.
//!
//! Per window and head: `softmax(q k^T / sqrt(d) + B + mask) v`. In the
//! shifted variant the grid is rolled by `-window/2` before partitioning;
//! tokens that came from different regions of the unrolled grid get a mask
//! of `-inf`, so they receive exactly zero weight.

use super::ops::{from_tokens, linear, reflect_pad, to_tokens, Fmap};
use super::{ModelWeights, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct AttnParams {
    pub dim: usize,
    pub heads: usize,
    pub window: usize,
    qkv_w: Vec<f32>,
    qkv_b: Vec<f32>,
    proj_w: Vec<f32>,
    proj_b: Vec<f32>,
    /// `[(2M-1)^2, heads]`
    bias_table: Vec<f32>,
}

impl AttnParams {
    /// Reads `{prefix}qkv.*`, `{prefix}proj.*` and
    /// `{prefix}relative_position_bias_table`.
    pub fn load(w: &ModelWeights, prefix: &str, dim: usize, heads: usize, window: usize) -> Result<Self> {
        if heads == 0 || dim % heads != 0 {
            return Err(Error::Model(format!("dim {dim} is not divisible by {heads} heads")));
        }
        if window < 2 {
            return Err(Error::Model(format!("window must be >= 2, got {window}")));
        }
        let span = 2 * window - 1;
        Ok(Self {
            dim,
            heads,
            window,
            qkv_w: w.expect(&format!("{prefix}qkv.weight"), &[3 * dim, dim])?.to_vec(),
            qkv_b: w.expect(&format!("{prefix}qkv.bias"), &[3 * dim])?.to_vec(),
            proj_w: w.expect(&format!("{prefix}proj.weight"), &[dim, dim])?.to_vec(),
            proj_b: w.expect(&format!("{prefix}proj.bias"), &[dim])?.to_vec(),
            bias_table: w
                .expect(&format!("{prefix}relative_position_bias_table"), &[span * span, heads])?
                .to_vec(),
        })
    }
}

/// Index into the bias table for tokens at in-window offsets `a` and `b`.
pub fn relative_position_index(a: (usize, usize), b: (usize, usize), window: usize) -> usize {
    let dh = a.0 as isize - b.0 as isize + window as isize - 1;
    let dw = a.1 as isize - b.1 as isize + window as isize - 1;
    (dh * (2 * window as isize - 1) + dw) as usize
}

/// Softmax weights of one window and head, for inspection.
#[derive(Debug, Clone)]
pub struct WindowTrace {
    /// Window row/column in the (possibly shifted) partition.
    pub window: (usize, usize),
    pub head: usize,
    /// Grid position `(y, x)` of every token, in the unshifted frame.
    pub positions: Vec<(usize, usize)>,
    /// Region label of every token; differing labels must not interact.
    pub regions: Vec<u8>,
    /// Row-major `n x n` attention probabilities.
    pub probs: Vec<f32>,
}

/// Which of the three bands along one axis a shifted-frame coordinate falls in.
fn band(i: usize, n: usize, window: usize, shift: usize) -> u8 {
    if i < n - window {
        0
    } else if i < n - shift {
        1
    } else {
        2
    }
}

/// Attention over token rows `x` (`h*w` rows of `dim`) on an `h x w` grid whose
/// sides are multiples of the window.
pub(crate) fn window_msa_tokens(
    x: &[f32],
    h: usize,
    w: usize,
    p: &AttnParams,
    shifted: bool,
    mut trace: Option<&mut Vec<WindowTrace>>,
) -> Vec<f32> {
    let (c, m, heads) = (p.dim, p.window, p.heads);
    debug_assert!(h % m == 0 && w % m == 0);
    let d = c / heads;
    let scale = (d as f32).powf(-0.5);
    let shift = if shifted { m / 2 } else { 0 };
    let qkv = linear(x, c, &p.qkv_w, &p.qkv_b, 3 * c);
    let n = m * m;
    let mut attended = vec![0.0f32; h * w * c];

    let mut idx = vec![0usize; n];
    let mut regions = vec![0u8; n];
    let mut positions = vec![(0usize, 0usize); n];
    let mut logits = vec![0.0f32; n * n];
    for wy in 0..h / m {
        for wx in 0..w / m {
            for a in 0..m {
                for b in 0..m {
                    let (sy, sx) = (wy * m + a, wx * m + b);
                    let (oy, ox) = ((sy + shift) % h, (sx + shift) % w);
                    let t = a * m + b;
                    idx[t] = oy * w + ox;
                    positions[t] = (oy, ox);
                    regions[t] = if shifted { band(sy, h, m, shift) * 3 + band(sx, w, m, shift) } else { 0 };
                }
            }
            for hd in 0..heads {
                for i in 0..n {
                    let q = &qkv[idx[i] * 3 * c + hd * d..][..d];
                    for j in 0..n {
                        let logit = if regions[i] != regions[j] {
                            f32::NEG_INFINITY
                        } else {
                            let k = &qkv[idx[j] * 3 * c + c + hd * d..][..d];
                            let dot: f32 = q.iter().zip(k).map(|(a, b)| a * b).sum();
                            let rel = relative_position_index((i / m, i % m), (j / m, j % m), m);
                            dot * scale + p.bias_table[rel * heads + hd]
                        };
                        logits[i * n + j] = logit;
                    }
                    let row = &mut logits[i * n..(i + 1) * n];
                    let mx = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
                    let mut total = 0.0f64;
                    for v in row.iter_mut() {
                        *v = (*v - mx).exp();
                        total += *v as f64;
                    }
                    let inv = (1.0 / total) as f32;
                    row.iter_mut().for_each(|v| *v *= inv);
                    let out = &mut attended[idx[i] * c + hd * d..][..d];
                    for (j, &pr) in row.iter().enumerate() {
                        if pr == 0.0 {
                            continue;
                        }
                        let v = &qkv[idx[j] * 3 * c + 2 * c + hd * d..][..d];
                        for (o, &vv) in out.iter_mut().zip(v) {
                            *o += pr * vv;
                        }
                    }
                }
                if let Some(tr) = trace.as_deref_mut() {
                    tr.push(WindowTrace {
                        window: (wy, wx),
                        head: hd,
                        positions: positions.clone(),
                        regions: regions.clone(),
                        probs: logits.clone(),
                    });
                }
            }
        }
    }
    linear(&attended, c, &p.proj_w, &p.proj_b, c)
}

/// Attention on an arbitrary-size map: reflect-padded on the bottom/right to a
/// multiple of the window, then cropped back.
pub(crate) fn window_msa_fmap(
    x: &Fmap<f32>,
    p: &AttnParams,
    shifted: bool,
    trace: Option<&mut Vec<WindowTrace>>,
) -> Fmap<f32> {
    let m = p.window;
    let (ph, pw) = (x.h.div_ceil(m) * m, x.w.div_ceil(m) * m);
    let padded = if (ph, pw) == (x.h, x.w) { x.clone() } else { pad_bottom_right(x, ph, pw) };
    let out = window_msa_tokens(&to_tokens(&padded), ph, pw, p, shifted, trace);
    let full = from_tokens(&out, x.c, ph, pw);
    crop_top_left(&full, x.h, x.w)
}

pub(crate) fn pad_bottom_right(x: &Fmap<f32>, ph: usize, pw: usize) -> Fmap<f32> {
    // a symmetric reflect pad large enough, then keep the top-left corner shifted
    let extra = (ph - x.h).max(pw - x.w);
    let big = reflect_pad(x, extra);
    let mut out = Fmap::zeros(x.c, ph, pw);
    for c in 0..x.c {
        for y in 0..ph {
            for xx in 0..pw {
                out.data[(c * ph + y) * pw + xx] = big.at(c, y + extra, xx + extra);
            }
        }
    }
    out
}

pub(crate) fn crop_top_left(x: &Fmap<f32>, h: usize, w: usize) -> Fmap<f32> {
    if (x.h, x.w) == (h, w) {
        return x.clone();
    }
    let mut out = Fmap::zeros(x.c, h, w);
    for c in 0..x.c {
        for y in 0..h {
            out.data[(c * h + y) * w..][..w].copy_from_slice(&x.data[(c * x.h + y) * x.w..][..w]);
        }
    }
    out
}

/// Window attention on a `[1, C, H, W]` tensor with weights named `qkv.*`,
/// `proj.*` and `relative_position_bias_table`.
pub fn window_attention(x: &Tensor, w: &ModelWeights, window: usize, heads: usize, shifted: bool) -> Result<Tensor> {
    window_attention_traced(x, w, window, heads, shifted).map(|(t, _)| t)
}

/// [`window_attention`] that also returns every window's softmax matrix.
pub fn window_attention_traced(
    x: &Tensor,
    w: &ModelWeights,
    window: usize,
    heads: usize,
    shifted: bool,
) -> Result<(Tensor, Vec<WindowTrace>)> {
    let (c, h, wd) = x.chw()?;
    let p = AttnParams::load(w, "", c, heads, window)?;
    let fm = Fmap::from_vec(c, h, wd, x.data().to_vec());
    let mut trace = Vec::new();
    let out = window_msa_fmap(&fm, &p, shifted, Some(&mut trace));
    Ok((Tensor::from_parts(vec![1, c, h, wd], out.data), trace))
}

/// Randomly initialized attention weights under `prefix`.
pub fn init_attention(w: &mut ModelWeights, rng: &mut crate::rng::Prng, prefix: &str, dim: usize, heads: usize, window: usize, std: f64) {
    use super::ops::gaussian_vec;
    let span = 2 * window - 1;
    w.put(format!("{prefix}qkv.weight"), &[3 * dim, dim], gaussian_vec(rng, 3 * dim * dim, std));
    w.put(format!("{prefix}qkv.bias"), &[3 * dim], vec![0.0; 3 * dim]);
    w.put(format!("{prefix}proj.weight"), &[dim, dim], gaussian_vec(rng, dim * dim, std));
    w.put(format!("{prefix}proj.bias"), &[dim], vec![0.0; dim]);
    w.put(
        format!("{prefix}relative_position_bias_table"),
        &[span * span, heads],
        gaussian_vec(rng, span * span * heads, std),
    );
}
