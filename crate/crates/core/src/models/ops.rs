//! Layer kernels shared by the networks. Activations are single-sample
//! `(C, H, W)` maps; convolutions use reflect padding of `k / 2`.

use num_traits::Float;

use super::ModelWeights;
use crate::error::{Error, Result};
use crate::imagecore::reflect_index;
use crate::rng::Prng;

pub trait Scalar: Float + std::ops::AddAssign + std::iter::Sum + Send + Sync + 'static {}
impl<T: Float + std::ops::AddAssign + std::iter::Sum + Send + Sync + 'static> Scalar for T {}

#[derive(Debug, Clone, PartialEq)]
pub struct Fmap<T> {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Fmap<T> {
    pub fn zeros(c: usize, h: usize, w: usize) -> Self {
        Self { c, h, w, data: vec![T::zero(); c * h * w] }
    }

    pub fn from_vec(c: usize, h: usize, w: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), c * h * w, "feature map size");
        Self { c, h, w, data }
    }

    pub fn plane(&self, c: usize) -> &[T] {
        &self.data[c * self.h * self.w..(c + 1) * self.h * self.w]
    }

    pub fn at(&self, c: usize, y: usize, x: usize) -> T {
        self.data[(c * self.h + y) * self.w + x]
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!((self.c, self.h, self.w), (other.c, other.h, other.w));
        self.data.iter_mut().zip(&other.data).for_each(|(a, &b)| *a += b);
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Self, scale: T) {
        assert_eq!((self.c, self.h, self.w), (other.c, other.h, other.w));
        self.data.iter_mut().zip(&other.data).for_each(|(a, &b)| *a += scale * b);
    }

    /// Channel concatenation; planes are contiguous so this is an append.
    pub fn concat(parts: &[&Self]) -> Self {
        let (h, w) = (parts[0].h, parts[0].w);
        let mut data = Vec::with_capacity(parts.iter().map(|p| p.data.len()).sum());
        for p in parts {
            assert_eq!((p.h, p.w), (h, w), "concat spatial dims");
            data.extend_from_slice(&p.data);
        }
        Self { c: parts.iter().map(|p| p.c).sum(), h, w, data }
    }

    pub fn cast<U: Scalar>(&self) -> Fmap<U> {
        Fmap {
            c: self.c,
            h: self.h,
            w: self.w,
            data: self.data.iter().map(|&v| U::from(v).unwrap()).collect(),
        }
    }
}

pub fn reflect_pad<T: Scalar>(x: &Fmap<T>, p: usize) -> Fmap<T> {
    if p == 0 {
        return x.clone();
    }
    let (hp, wp) = (x.h + 2 * p, x.w + 2 * p);
    let cols: Vec<usize> = (0..wp).map(|i| reflect_index(i as isize - p as isize, x.w)).collect();
    let mut out = Fmap::zeros(x.c, hp, wp);
    for c in 0..x.c {
        let src = x.plane(c);
        for py in 0..hp {
            let sy = reflect_index(py as isize - p as isize, x.h);
            let row = &src[sy * x.w..(sy + 1) * x.w];
            let dst = &mut out.data[(c * hp + py) * wp..(c * hp + py + 1) * wp];
            for (d, &sx) in dst.iter_mut().zip(&cols) {
                *d = row[sx];
            }
        }
    }
    out
}

/// Cross-correlation (deep-learning convention) with weights `[c_out, c_in, k, k]`.
pub fn conv2d<T: Scalar>(
    x: &Fmap<T>,
    weight: &[T],
    bias: &[T],
    c_out: usize,
    k: usize,
    stride: usize,
) -> Fmap<T> {
    assert_eq!(weight.len(), c_out * x.c * k * k, "conv weight size");
    assert_eq!(bias.len(), c_out, "conv bias size");
    let xp = reflect_pad(x, k / 2);
    let (hp, wp) = (xp.h, xp.w);
    let oh = (hp - k) / stride + 1;
    let ow = (wp - k) / stride + 1;
    let mut out = Fmap::zeros(c_out, oh, ow);
    for co in 0..c_out {
        let dst = &mut out.data[co * oh * ow..(co + 1) * oh * ow];
        dst.iter_mut().for_each(|v| *v = bias[co]);
        for ci in 0..x.c {
            let src = xp.plane(ci);
            for ky in 0..k {
                for kx in 0..k {
                    let wv = weight[((co * x.c + ci) * k + ky) * k + kx];
                    if wv == T::zero() {
                        continue;
                    }
                    for oy in 0..oh {
                        let row = &src[(oy * stride + ky) * wp..(oy * stride + ky + 1) * wp];
                        let drow = &mut dst[oy * ow..(oy + 1) * ow];
                        if stride == 1 {
                            for (d, &s) in drow.iter_mut().zip(&row[kx..kx + ow]) {
                                *d += wv * s;
                            }
                        } else {
                            for (ox, d) in drow.iter_mut().enumerate() {
                                *d += wv * row[ox * stride + kx];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

pub struct ConvGrads<T> {
    pub input: Option<Fmap<T>>,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

/// Backward pass of a stride-1 [`conv2d`]. Gradients reaching the reflected
/// border copies are folded back onto the pixels they were copied from.
pub fn conv2d_backward<T: Scalar>(
    x: &Fmap<T>,
    weight: &[T],
    c_out: usize,
    k: usize,
    grad_out: &Fmap<T>,
    want_input: bool,
) -> ConvGrads<T> {
    let p = k / 2;
    let xp = reflect_pad(x, p);
    let (hp, wp) = (xp.h, xp.w);
    let (oh, ow) = (x.h, x.w);
    assert_eq!((grad_out.c, grad_out.h, grad_out.w), (c_out, oh, ow), "grad shape");

    let mut gw = vec![T::zero(); weight.len()];
    let mut gb = vec![T::zero(); c_out];
    let mut gxp = want_input.then(|| Fmap::<T>::zeros(x.c, hp, wp));
    for co in 0..c_out {
        let g = grad_out.plane(co);
        gb[co] = g.iter().copied().sum();
        for ci in 0..x.c {
            let src = xp.plane(ci);
            for ky in 0..k {
                for kx in 0..k {
                    let widx = ((co * x.c + ci) * k + ky) * k + kx;
                    let mut acc = T::zero();
                    for oy in 0..oh {
                        let row = &src[(oy + ky) * wp + kx..(oy + ky) * wp + kx + ow];
                        let grow = &g[oy * ow..(oy + 1) * ow];
                        for (&a, &b) in row.iter().zip(grow) {
                            acc += a * b;
                        }
                    }
                    gw[widx] = acc;
                    if let Some(gxp) = gxp.as_mut() {
                        let wv = weight[widx];
                        let plane = &mut gxp.data[ci * hp * wp..(ci + 1) * hp * wp];
                        for oy in 0..oh {
                            let drow = &mut plane[(oy + ky) * wp + kx..(oy + ky) * wp + kx + ow];
                            let grow = &g[oy * ow..(oy + 1) * ow];
                            for (d, &b) in drow.iter_mut().zip(grow) {
                                *d += wv * b;
                            }
                        }
                    }
                }
            }
        }
    }

    let input = gxp.map(|gxp| {
        let mut gx = Fmap::zeros(x.c, x.h, x.w);
        let cols: Vec<usize> = (0..wp).map(|i| reflect_index(i as isize - p as isize, x.w)).collect();
        for c in 0..x.c {
            for py in 0..hp {
                let sy = reflect_index(py as isize - p as isize, x.h);
                for (px, &sx) in cols.iter().enumerate() {
                    gx.data[(c * x.h + sy) * x.w + sx] += gxp.data[(c * hp + py) * wp + px];
                }
            }
        }
        gx
    });
    ConvGrads { input, weight: gw, bias: gb }
}

pub fn relu_inplace<T: Scalar>(x: &mut Fmap<T>) {
    x.data.iter_mut().for_each(|v| *v = v.max(T::zero()));
}

pub fn leaky_relu_inplace<T: Scalar>(x: &mut Fmap<T>, slope: T) {
    x.data.iter_mut().for_each(|v| {
        if *v < T::zero() {
            *v = *v * slope;
        }
    });
}

pub fn upsample_nearest<T: Scalar>(x: &Fmap<T>, factor: usize) -> Fmap<T> {
    let (oh, ow) = (x.h * factor, x.w * factor);
    let mut out = Fmap::zeros(x.c, oh, ow);
    for c in 0..x.c {
        for oy in 0..oh {
            let src = &x.data[(c * x.h + oy / factor) * x.w..][..x.w];
            let dst = &mut out.data[(c * oh + oy) * ow..][..ow];
            for (ox, d) in dst.iter_mut().enumerate() {
                *d = src[ox / factor];
            }
        }
    }
    out
}

/// 2x2 mean pooling with stride 2; a trailing odd row/column is dropped.
pub fn avg_pool2<T: Scalar>(x: &Fmap<T>) -> Fmap<T> {
    let (oh, ow) = (x.h / 2, x.w / 2);
    let quarter = T::from(0.25).unwrap();
    let mut out = Fmap::zeros(x.c, oh, ow);
    for c in 0..x.c {
        for oy in 0..oh {
            for ox in 0..ow {
                let s = x.at(c, 2 * oy, 2 * ox)
                    + x.at(c, 2 * oy, 2 * ox + 1)
                    + x.at(c, 2 * oy + 1, 2 * ox)
                    + x.at(c, 2 * oy + 1, 2 * ox + 1);
                out.data[(c * oh + oy) * ow + ox] = s * quarter;
            }
        }
    }
    out
}

/// `y[n] = W x[n] + b` for `n` row vectors; `W` is `[c_out, c_in]`.
pub fn linear(x: &[f32], c_in: usize, weight: &[f32], bias: &[f32], c_out: usize) -> Vec<f32> {
    let n = x.len() / c_in;
    let mut out = vec![0.0f32; n * c_out];
    for (xi, yi) in x.chunks_exact(c_in).zip(out.chunks_exact_mut(c_out)) {
        for (o, y) in yi.iter_mut().enumerate() {
            let wrow = &weight[o * c_in..(o + 1) * c_in];
            *y = bias[o] + wrow.iter().zip(xi).map(|(a, b)| a * b).sum::<f32>();
        }
    }
    out
}

pub const LAYER_NORM_EPS: f32 = 1e-5;

/// Per-row normalization with biased variance, then affine.
pub fn layer_norm(x: &[f32], c: usize, gamma: &[f32], beta: &[f32]) -> Vec<f32> {
    let mut out = vec![0.0f32; x.len()];
    for (xi, yi) in x.chunks_exact(c).zip(out.chunks_exact_mut(c)) {
        let mean = xi.iter().map(|&v| v as f64).sum::<f64>() / c as f64;
        let var = xi.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / c as f64;
        let inv = 1.0 / (var + LAYER_NORM_EPS as f64).sqrt();
        for j in 0..c {
            yi[j] = ((xi[j] as f64 - mean) * inv) as f32 * gamma[j] + beta[j];
        }
    }
    out
}

/// Tanh approximation of GELU.
pub fn gelu(v: f32) -> f32 {
    const K: f32 = 0.797_884_6; // sqrt(2 / pi)
    0.5 * v * (1.0 + (K * (v + 0.044715 * v * v * v)).tanh())
}

/// `(C, H, W)` map to `(H*W, C)` token rows.
pub fn to_tokens(x: &Fmap<f32>) -> Vec<f32> {
    let n = x.h * x.w;
    let mut out = vec![0.0; n * x.c];
    for c in 0..x.c {
        for (i, &v) in x.plane(c).iter().enumerate() {
            out[i * x.c + c] = v;
        }
    }
    out
}

pub fn from_tokens(t: &[f32], c: usize, h: usize, w: usize) -> Fmap<f32> {
    let mut out = Fmap::zeros(c, h, w);
    for (i, row) in t.chunks_exact(c).enumerate() {
        for (ch, &v) in row.iter().enumerate() {
            out.data[ch * h * w + i] = v;
        }
    }
    out
}

/// Convolution layer whose parameters live under `{name}.weight` / `{name}.bias`.
#[derive(Debug, Clone)]
pub struct Conv {
    pub c_in: usize,
    pub c_out: usize,
    pub k: usize,
    pub weight: Vec<f32>,
    pub bias: Vec<f32>,
}

impl Conv {
    pub fn load(w: &ModelWeights, name: &str, c_in: usize, c_out: usize, k: usize) -> Result<Self> {
        Ok(Self {
            c_in,
            c_out,
            k,
            weight: w.expect(&format!("{name}.weight"), &[c_out, c_in, k, k])?.to_vec(),
            bias: w.expect(&format!("{name}.bias"), &[c_out])?.to_vec(),
        })
    }

    pub fn forward(&self, x: &Fmap<f32>) -> Fmap<f32> {
        self.forward_strided(x, 1)
    }

    pub fn forward_strided(&self, x: &Fmap<f32>, stride: usize) -> Fmap<f32> {
        debug_assert_eq!(x.c, self.c_in);
        conv2d(x, &self.weight, &self.bias, self.c_out, self.k, stride)
    }
}

pub fn linear_params(w: &ModelWeights, name: &str, c_in: usize, c_out: usize) -> Result<(Vec<f32>, Vec<f32>)> {
    Ok((
        w.expect(&format!("{name}.weight"), &[c_out, c_in])?.to_vec(),
        w.expect(&format!("{name}.bias"), &[c_out])?.to_vec(),
    ))
}

pub fn norm_params(w: &ModelWeights, name: &str, c: usize) -> Result<(Vec<f32>, Vec<f32>)> {
    Ok((
        w.expect(&format!("{name}.weight"), &[c])?.to_vec(),
        w.expect(&format!("{name}.bias"), &[c])?.to_vec(),
    ))
}

/// Gaussian draws `N(0, std^2)` in storage order.
pub fn gaussian_vec(rng: &mut Prng, n: usize, std: f64) -> Vec<f32> {
    (0..n).map(|_| (rng.normal() * std) as f32).collect()
}

/// Adds a convolution with He-scaled Gaussian weights and zero bias.
pub fn init_conv(w: &mut ModelWeights, rng: &mut Prng, name: &str, c_in: usize, c_out: usize, k: usize, gain: f64) {
    let std = gain * (2.0 / (c_in * k * k) as f64).sqrt();
    w.put(format!("{name}.weight"), &[c_out, c_in, k, k], gaussian_vec(rng, c_out * c_in * k * k, std));
    w.put(format!("{name}.bias"), &[c_out], vec![0.0; c_out]);
}

pub fn check_image_input(h: usize, w: usize, what: &str) -> Result<()> {
    if h == 0 || w == 0 {
        return Err(Error::Shape(format!("{what}: empty input")));
    }
    Ok(())
}
