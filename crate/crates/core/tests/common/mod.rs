//! Straight-line reference implementations used as test oracles. They share
//! no code with the library beyond the `Image` container.

#![allow(dead_code)]

use std::f64::consts::PI;

use medsr::imagecore::BorderMode;
use medsr::models::{ModelWeights, Tensor};
use medsr::rng::Prng;
use medsr::Image;

pub fn random_image(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = Prng::new(seed);
    Image::from_fn(w, h, |_, _| rng.next_f64() as f32)
}

/// Smooth blobs plus a checkerboard and mild texture, in `[0, 1]`.
pub fn structured_image(n: usize, seed: u64) -> Image {
    let mut rng = Prng::new(seed);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| (rng.uniform(0.0, n as f64), rng.uniform(0.0, n as f64), rng.uniform(3.0, n as f64 / 5.0), rng.uniform(-0.3, 0.3)))
        .collect();
    Image::from_fn(n, n, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut v = if (x / 8 + y / 8) % 2 == 0 { 0.35 } else { 0.6 };
        for &(cx, cy, r, a) in &blobs {
            v += a * (-((xf - cx).powi(2) + (yf - cy).powi(2)) / (2.0 * r * r)).exp();
        }
        v += 0.05 * (xf * 0.7).sin() * (yf * 0.45).cos();
        v.clamp(0.0, 1.0) as f32
    })
}

fn border_index(i: isize, n: usize, mode: BorderMode) -> Option<usize> {
    let n = n as isize;
    match mode {
        BorderMode::Zero => (0..n).contains(&i).then_some(i as usize),
        BorderMode::Clamp => Some(i.clamp(0, n - 1) as usize),
        BorderMode::Reflect if n == 1 => Some(0),
        BorderMode::Reflect => {
            let mut j = i;
            while j < 0 || j >= n {
                if j < 0 {
                    j = -j;
                }
                if j >= n {
                    j = 2 * (n - 1) - j;
                }
            }
            Some(j as usize)
        }
    }
}

/// Textbook same-size convolution over a row-major `kw x kh` kernel.
pub fn naive_convolve(img: &Image, taps: &[f64], kw: usize, kh: usize, mode: BorderMode) -> Vec<f64> {
    let (w, h) = img.dims();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for j in 0..kh {
                for i in 0..kw {
                    let sx = x as isize - i as isize + (kw / 2) as isize;
                    let sy = y as isize - j as isize + (kh / 2) as isize;
                    if let (Some(px), Some(py)) = (border_index(sx, w, mode), border_index(sy, h, mode)) {
                        acc += taps[j * kw + i] * img.get(px, py) as f64;
                    }
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Direct 2D DFT with the `exp(-2 pi i (ux/W + vy/H))` sign, as `(re, im)` pairs.
pub fn naive_dft(img: &Image) -> Vec<(f64, f64)> {
    let (w, h) = img.dims();
    let mut out = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -2.0 * PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    let p = img.get(x, y) as f64;
                    re += p * phase.cos();
                    im += p * phase.sin();
                }
            }
            out.push((re, im));
        }
    }
    out
}

/// Keys cubic with `a = -0.5`.
pub fn keys_cubic(t: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        1.5 * t.powi(3) - 2.5 * t.powi(2) + 1.0
    } else if t < 2.0 {
        -0.5 * t.powi(3) + 2.5 * t.powi(2) - 4.0 * t + 2.0
    } else {
        0.0
    }
}

pub fn triangle(t: f64) -> f64 {
    (1.0 - t.abs()).max(0.0)
}

/// Normalized weights of every source sample for one output coordinate.
fn axis_weights(d: usize, n_in: usize, n_out: usize, kernel: fn(f64) -> f64, antialias: bool) -> Vec<(usize, f64)> {
    let ratio = n_in as f64 / n_out as f64;
    let stretch = if antialias && ratio > 1.0 { ratio } else { 1.0 };
    let center = (d as f64 + 0.5) * ratio - 0.5;
    let mut raw = Vec::new();
    for i in -(4 * n_in as isize)..(5 * n_in as isize) {
        let wgt = kernel((i as f64 - center) / stretch);
        if wgt != 0.0 {
            raw.push((i.clamp(0, n_in as isize - 1) as usize, wgt));
        }
    }
    let total: f64 = raw.iter().map(|r| r.1).sum();
    raw.into_iter().map(|(i, w)| (i, w / total)).collect()
}

/// Resampling written as one double sum per output pixel.
pub fn kernel_sum_resample(img: &Image, ow: usize, oh: usize, kernel: fn(f64) -> f64, antialias: bool) -> Vec<f64> {
    let (w, h) = img.dims();
    let mut out = Vec::with_capacity(ow * oh);
    for oy in 0..oh {
        let wy = axis_weights(oy, h, oh, kernel, antialias);
        for ox in 0..ow {
            let wx = axis_weights(ox, w, ow, kernel, antialias);
            let mut acc = 0.0;
            for &(sy, a) in &wy {
                for &(sx, b) in &wx {
                    acc += a * b * img.get(sx, sy) as f64;
                }
            }
            out.push(acc);
        }
    }
    out
}

// ---------------------------------------------------------------- FSIM

/// Complex buffer as separate real and imaginary planes.
#[derive(Clone)]
struct Cplx {
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Row-then-column direct DFT; `inverse` uses the positive sign and divides by `w * h`.
fn dft2(src: &Cplx, w: usize, h: usize, inverse: bool) -> Cplx {
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut rows = Cplx { re: vec![0.0; w * h], im: vec![0.0; w * h] };
    for y in 0..h {
        for u in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for x in 0..w {
                let a = sign * 2.0 * PI * ((u * x) % w) as f64 / w as f64;
                let (s, c) = a.sin_cos();
                let (pr, pi) = (src.re[y * w + x], src.im[y * w + x]);
                re += pr * c - pi * s;
                im += pr * s + pi * c;
            }
            rows.re[y * w + u] = re;
            rows.im[y * w + u] = im;
        }
    }
    let mut out = Cplx { re: vec![0.0; w * h], im: vec![0.0; w * h] };
    let norm = if inverse { 1.0 / (w * h) as f64 } else { 1.0 };
    for u in 0..w {
        for v in 0..h {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                let a = sign * 2.0 * PI * ((v * y) % h) as f64 / h as f64;
                let (s, c) = a.sin_cos();
                let (pr, pi) = (rows.re[y * w + u], rows.im[y * w + u]);
                re += pr * c - pi * s;
                im += pr * s + pi * c;
            }
            out.re[v * w + u] = re * norm;
            out.im[v * w + u] = im * norm;
        }
    }
    out
}

/// Kovesi phase congruency (4 scales, 4 orientations) of an even-sized image.
fn oracle_phase_congruency(img: &[f64], w: usize, h: usize) -> Vec<f64> {
    assert!(w % 2 == 0 && h % 2 == 0, "oracle handles even sizes only");
    let (nscale, norient) = (4usize, 4usize);
    let (min_wl, mult, sigma_onf, d_theta_on_sigma, k, eps): (f64, f64, f64, f64, f64, f64) = (6.0, 2.0, 0.55, 1.2, 2.0, 1e-4);
    let n = w * h;
    let spectrum = dft2(&Cplx { re: img.to_vec(), im: vec![0.0; n] }, w, h, false);

    let freq = |i: usize, len: usize| if i < len / 2 { i as f64 / len as f64 } else { (i as f64 - len as f64) / len as f64 };
    let mut radius = vec![0.0; n];
    let mut theta = vec![0.0; n];
    let mut lowpass = vec![0.0; n];
    for v in 0..h {
        for u in 0..w {
            let (fx, fy) = (freq(u, w), freq(v, h));
            let r = (fx * fx + fy * fy).sqrt();
            radius[v * w + u] = r;
            theta[v * w + u] = (-fy).atan2(fx);
            lowpass[v * w + u] = 1.0 / (1.0 + (r / 0.45).powi(30));
        }
    }
    radius[0] = 1.0;

    let theta_sigma = PI / norient as f64 / d_theta_on_sigma;
    let mut energy_all = vec![0.0; n];
    let mut an_all = vec![0.0; n];
    for o in 0..norient {
        let angl = o as f64 * PI / norient as f64;
        let mut sum_e = vec![0.0; n];
        let mut sum_o = vec![0.0; n];
        let mut sum_an = vec![0.0; n];
        let mut eo_all: Vec<Cplx> = Vec::new();
        let mut ifft_filters: Vec<Vec<f64>> = Vec::new();
        let mut em_n = 0.0;
        for s in 0..nscale {
            let wavelength = min_wl * f64::powi(mult, s as i32);
            let fo = 1.0 / wavelength;
            let mut filter = vec![0.0; n];
            for i in 0..n {
                let log_gabor = if i == 0 {
                    0.0
                } else {
                    (-((radius[i] / fo).ln().powi(2)) / (2.0 * sigma_onf.ln().powi(2))).exp() * lowpass[i]
                };
                let ds = theta[i].sin() * angl.cos() - theta[i].cos() * angl.sin();
                let dc = theta[i].cos() * angl.cos() + theta[i].sin() * angl.sin();
                let dtheta = ds.atan2(dc).abs();
                let spread = (-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma)).exp();
                filter[i] = log_gabor * spread;
            }
            if s == 0 {
                em_n = filter.iter().map(|f| f * f).sum();
            }
            let spatial = dft2(&Cplx { re: filter.clone(), im: vec![0.0; n] }, w, h, true);
            ifft_filters.push(spatial.re.iter().map(|v| v * (n as f64).sqrt()).collect());
            let product = Cplx {
                re: (0..n).map(|i| spectrum.re[i] * filter[i]).collect(),
                im: (0..n).map(|i| spectrum.im[i] * filter[i]).collect(),
            };
            let eo = dft2(&product, w, h, true);
            for i in 0..n {
                sum_e[i] += eo.re[i];
                sum_o[i] += eo.im[i];
                sum_an[i] += eo.re[i].hypot(eo.im[i]);
            }
            eo_all.push(eo);
        }

        let mut energy = vec![0.0; n];
        for i in 0..n {
            let xe = (sum_e[i].powi(2) + sum_o[i].powi(2)).sqrt() + eps;
            let (me, mo) = (sum_e[i] / xe, sum_o[i] / xe);
            for eo in &eo_all {
                let (e, od) = (eo.re[i], eo.im[i]);
                energy[i] += e * me + od * mo - (e * mo - od * me).abs();
            }
        }

        let mut sq: Vec<f64> = (0..n).map(|i| eo_all[0].re[i].powi(2) + eo_all[0].im[i].powi(2)).collect();
        sq.sort_by(f64::total_cmp);
        let median = (sq[n / 2 - 1] + sq[n / 2]) / 2.0;
        let mean_e2n = -median / 0.5f64.ln();
        let noise_power = mean_e2n / em_n;

        let mut est_sum_an2 = vec![0.0; n];
        let mut est_sum_ai_aj = vec![0.0; n];
        for s in 0..nscale {
            for i in 0..n {
                est_sum_an2[i] += ifft_filters[s][i].powi(2);
            }
            for t in s + 1..nscale {
                for i in 0..n {
                    est_sum_ai_aj[i] += ifft_filters[s][i] * ifft_filters[t][i];
                }
            }
        }
        let sum_an2: f64 = est_sum_an2.iter().sum();
        let sum_ai_aj: f64 = est_sum_ai_aj.iter().sum();
        let est_noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_ai_aj;
        let tau = (est_noise_energy2 / 2.0).sqrt();
        let est_noise_energy = tau * (PI / 2.0).sqrt();
        let est_noise_energy_sigma = ((2.0 - PI / 2.0) * tau * tau).sqrt();
        let threshold = (est_noise_energy + k * est_noise_energy_sigma) / 1.7;

        for i in 0..n {
            energy_all[i] += (energy[i] - threshold).max(0.0);
            an_all[i] += sum_an[i];
        }
    }
    (0..n).map(|i| energy_all[i] / an_all[i]).collect()
}

/// Scharr magnitude via explicit zero-padded convolution.
fn oracle_gradient(img: &[f64], w: usize, h: usize) -> Vec<f64> {
    let dx = [[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]];
    let at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            img[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..3isize {
                for i in 0..3isize {
                    let p = at(x - i + 1, y - j + 1);
                    gx += dx[j as usize][i as usize] / 16.0 * p;
                    // the vertical kernel is the transpose
                    gy += dx[i as usize][j as usize] / 16.0 * p;
                }
            }
            out[y as usize * w + x as usize] = gx.hypot(gy);
        }
    }
    out
}

/// FSIM for images whose short side is under 384 pixels (no pre-reduction).
pub fn oracle_fsim(reference: &Image, x: &Image) -> f64 {
    let (w, h) = reference.dims();
    assert!(w.min(h) < 384);
    let a: Vec<f64> = reference.data().iter().map(|&v| v as f64 * 255.0).collect();
    let b: Vec<f64> = x.data().iter().map(|&v| v as f64 * 255.0).collect();
    let (pc1, pc2) = (oracle_phase_congruency(&a, w, h), oracle_phase_congruency(&b, w, h));
    let (g1, g2) = (oracle_gradient(&a, w, h), oracle_gradient(&b, w, h));
    let (t1, t2) = (0.85, 160.0);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..w * h {
        let s_pc = (2.0 * pc1[i] * pc2[i] + t1) / (pc1[i].powi(2) + pc2[i].powi(2) + t1);
        let s_g = (2.0 * g1[i] * g2[i] + t2) / (g1[i].powi(2) + g2[i].powi(2) + t2);
        let pcm = pc1[i].max(pc2[i]);
        num += s_pc * s_g * pcm;
        den += pcm;
    }
    num / den
}

// ---------------------------------------------------------------- VIF

fn gaussian_kernel_2d(n: usize, sigma: f64) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    let mut k = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            k.push((-((i as f64 - c).powi(2) + (j as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = k.iter().sum();
    k.into_iter().map(|v| v / total).collect()
}

/// 2D "valid" correlation with an `n x n` kernel.
fn filter_valid_2d(img: &[f64], w: usize, h: usize, k: &[f64], n: usize) -> (Vec<f64>, usize, usize) {
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for j in 0..n {
                for i in 0..n {
                    acc += k[j * n + i] * img[(y + j) * w + x + i];
                }
            }
            out[y * ow + x] = acc;
        }
    }
    (out, ow, oh)
}

/// Pixel-domain VIF on the `[0, 255]` scale.
pub fn oracle_vif(reference: &Image, x: &Image) -> f64 {
    let sigma_nsq = 2.0;
    let tiny = 1e-10;
    let (mut w, mut h) = reference.dims();
    let mut r: Vec<f64> = reference.data().iter().map(|&v| v as f64 * 255.0).collect();
    let mut d: Vec<f64> = x.data().iter().map(|&v| v as f64 * 255.0).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for scale in 1..=4u32 {
        let n = (1usize << (4 - scale + 1)) + 1;
        let win = gaussian_kernel_2d(n, n as f64 / 5.0);
        if scale > 1 {
            let (rf, fw, fh) = filter_valid_2d(&r, w, h, &win, n);
            let (df, _, _) = filter_valid_2d(&d, w, h, &win, n);
            let keep = |p: &[f64]| -> Vec<f64> {
                let mut out = Vec::new();
                for y in (0..fh).step_by(2) {
                    for x in (0..fw).step_by(2) {
                        out.push(p[y * fw + x]);
                    }
                }
                out
            };
            r = keep(&rf);
            d = keep(&df);
            w = fw.div_ceil(2);
            h = fh.div_ceil(2);
        }
        let sq = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).collect::<Vec<f64>>();
        let (mu1, ..) = filter_valid_2d(&r, w, h, &win, n);
        let (mu2, ..) = filter_valid_2d(&d, w, h, &win, n);
        let (s11, ..) = filter_valid_2d(&sq(&r, &r), w, h, &win, n);
        let (s22, ..) = filter_valid_2d(&sq(&d, &d), w, h, &win, n);
        let (s12, ..) = filter_valid_2d(&sq(&r, &d), w, h, &win, n);
        for i in 0..mu1.len() {
            let mut sigma1_sq = (s11[i] - mu1[i] * mu1[i]).max(0.0);
            let sigma2_sq = (s22[i] - mu2[i] * mu2[i]).max(0.0);
            let sigma12 = s12[i] - mu1[i] * mu2[i];
            let mut g = sigma12 / (sigma1_sq + tiny);
            let mut sv_sq = sigma2_sq - g * sigma12;
            if sigma1_sq < tiny {
                g = 0.0;
                sv_sq = sigma2_sq;
                sigma1_sq = 0.0;
            }
            if sigma2_sq < tiny {
                g = 0.0;
                sv_sq = 0.0;
            }
            if g < 0.0 {
                sv_sq = sigma2_sq;
                g = 0.0;
            }
            if sv_sq <= tiny {
                sv_sq = tiny;
            }
            num += (1.0 + g * g * sigma1_sq / (sv_sq + sigma_nsq)).log2();
            den += (1.0 + sigma1_sq / sigma_nsq).log2();
        }
    }
    num / den
}

// ---------------------------------------------------------------- attention

pub fn seeded_tensor(dims: &[usize], seed: u64, amp: f64) -> Tensor {
    let mut rng = Prng::new(seed);
    let n = dims.iter().product();
    Tensor::new(dims.to_vec(), (0..n).map(|_| rng.uniform(-amp, amp) as f32).collect()).unwrap()
}

pub fn attention_weights(c: usize, heads: usize, window: usize, seed: u64) -> ModelWeights {
    let span = 2 * window - 1;
    let mut w = ModelWeights::new();
    w.insert("qkv.weight", seeded_tensor(&[3 * c, c], seed, 0.5)).unwrap();
    w.insert("qkv.bias", seeded_tensor(&[3 * c], seed + 1, 0.1)).unwrap();
    w.insert("proj.weight", seeded_tensor(&[c, c], seed + 2, 0.5)).unwrap();
    w.insert("proj.bias", seeded_tensor(&[c], seed + 3, 0.1)).unwrap();
    w.insert("relative_position_bias_table", seeded_tensor(&[span * span, heads], seed + 4, 1.0)).unwrap();
    w
}

/// Window attention written the long way over `h*w` token rows: roll the grid
/// by `-window/2` when shifted, label regions with the slice construction,
/// attend inside each window with an additive `-100` mask, roll back.
pub fn brute_window_attention(
    tokens: &[Vec<f64>],
    h: usize,
    wd: usize,
    w: &ModelWeights,
    prefix: &str,
    window: usize,
    heads: usize,
    shifted: bool,
) -> Vec<Vec<f64>> {
    assert!(h % window == 0 && wd % window == 0);
    let c = tokens[0].len();
    let m = window;
    let s = if shifted { m / 2 } else { 0 };
    let d = c / heads;
    let px = |name: &str| -> Vec<f64> {
        w.get(&format!("{prefix}{name}")).unwrap().data().iter().map(|&v| v as f64).collect()
    };
    let (qkv_w, qkv_b, proj_w, proj_b, table) =
        (px("qkv.weight"), px("qkv.bias"), px("proj.weight"), px("proj.bias"), px("relative_position_bias_table"));

    let rolled: Vec<&Vec<f64>> = (0..h * wd).map(|i| &tokens[((i / wd + s) % h) * wd + (i % wd + s) % wd]).collect();
    let mut label = vec![0usize; h * wd];
    if shifted {
        let slices = |n: usize| [(0, n - m), (n - m, n - s), (n - s, n)];
        let mut cnt = 0;
        for (y0, y1) in slices(h) {
            for (x0, x1) in slices(wd) {
                for y in y0..y1 {
                    for xx in x0..x1 {
                        label[y * wd + xx] = cnt;
                    }
                }
                cnt += 1;
            }
        }
    }

    let project = |t: &[f64], o: usize| -> f64 { qkv_b[o] + (0..c).map(|i| qkv_w[o * c + i] * t[i]).sum::<f64>() };
    let mut attended = vec![vec![0.0; c]; h * wd];
    for wy in (0..h).step_by(m) {
        for wx in (0..wd).step_by(m) {
            let toks: Vec<(usize, usize)> = (0..m * m).map(|t| (wy + t / m, wx + t % m)).collect();
            for hd in 0..heads {
                for &(qy, qx) in &toks {
                    let qi = qy * wd + qx;
                    let q: Vec<f64> = (0..d).map(|j| project(rolled[qi], hd * d + j)).collect();
                    let mut logits = Vec::new();
                    for &(ky, kx) in &toks {
                        let ki = ky * wd + kx;
                        let k: Vec<f64> = (0..d).map(|j| project(rolled[ki], c + hd * d + j)).collect();
                        let dot: f64 = q.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>() / (d as f64).sqrt();
                        let (dy, dx) = (qy - wy + m - 1 - (ky - wy), qx - wx + m - 1 - (kx - wx));
                        let bias = table[(dy * (2 * m - 1) + dx) * heads + hd];
                        let mask = if label[qi] == label[ki] { 0.0 } else { -100.0 };
                        logits.push(dot + bias + mask);
                    }
                    let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let e: Vec<f64> = logits.iter().map(|l| (l - mx).exp()).collect();
                    let z: f64 = e.iter().sum();
                    for (t, &(ky, kx)) in toks.iter().enumerate() {
                        let ki = ky * wd + kx;
                        for j in 0..d {
                            attended[qi][hd * d + j] += e[t] / z * project(rolled[ki], 2 * c + hd * d + j);
                        }
                    }
                }
            }
        }
    }

    let mut out = vec![vec![0.0; c]; h * wd];
    for y in 0..h {
        for xx in 0..wd {
            let t = &attended[y * wd + xx];
            let dst = &mut out[((y + s) % h) * wd + (xx + s) % wd];
            for o in 0..c {
                dst[o] = proj_b[o] + (0..c).map(|i| proj_w[o * c + i] * t[i]).sum::<f64>();
            }
        }
    }
    out
}

/// `[1, C, H, W]` tensor to `H*W` token rows of `C` values.
pub fn tensor_tokens(x: &Tensor) -> (Vec<Vec<f64>>, usize, usize) {
    let (c, h, w) = (x.dims()[1], x.dims()[2], x.dims()[3]);
    let tokens = (0..h * w).map(|i| (0..c).map(|ch| x.data()[ch * h * w + i] as f64).collect()).collect();
    (tokens, h, w)
}

/// Token rows back to channel-major order.
pub fn tokens_chw(t: &[Vec<f64>]) -> Vec<f64> {
    let c = t[0].len();
    (0..c).flat_map(|ch| t.iter().map(move |row| row[ch])).collect()
}

pub fn brute_shifted_attention(x: &Tensor, w: &ModelWeights, window: usize, heads: usize) -> Vec<f64> {
    let (tokens, h, wd) = tensor_tokens(x);
    tokens_chw(&brute_window_attention(&tokens, h, wd, w, "", window, heads, true))
}

// ---------------------------------------------------------------- networks

pub fn weights64(w: &ModelWeights, name: &str) -> Vec<f64> {
    w.get(name).unwrap().data().iter().map(|&v| v as f64).collect()
}

/// Reflect-padded cross-correlation, one plane per channel, weights `[out, in, k, k]`.
pub fn oracle_conv(input: &[Vec<f64>], h: usize, wd: usize, wt: &[f64], b: &[f64], k: usize) -> Vec<Vec<f64>> {
    let c_in = input.len();
    let c_out = b.len();
    let r = (k / 2) as isize;
    let reflect = |i: isize, n: usize| border_index(i, n, BorderMode::Reflect).unwrap();
    let mut out = vec![vec![0.0; wd * h]; c_out];
    for (o, plane) in out.iter_mut().enumerate() {
        for y in 0..h {
            for x in 0..wd {
                let mut acc = b[o];
                for (i, src) in input.iter().enumerate() {
                    for ky in 0..k {
                        for kx in 0..k {
                            let sy = reflect(y as isize + ky as isize - r, h);
                            let sx = reflect(x as isize + kx as isize - r, wd);
                            acc += wt[((o * c_in + i) * k + ky) * k + kx] * src[sy * wd + sx];
                        }
                    }
                }
                plane[y * wd + x] = acc;
            }
        }
    }
    out
}

fn relu(planes: &mut [Vec<f64>]) {
    planes.iter_mut().flatten().for_each(|v| *v = v.max(0.0));
}

/// Three-layer SRCNN forward in double precision.
pub fn oracle_srcnn(img: &Image, w: &ModelWeights, k: [usize; 3]) -> Vec<f64> {
    let (wd, ht) = img.dims();
    let conv = |x: &[Vec<f64>], layer: usize, k: usize| {
        let name = format!("conv{layer}");
        oracle_conv(x, ht, wd, &weights64(w, &format!("{name}.weight")), &weights64(w, &format!("{name}.bias")), k)
    };
    let x0 = vec![img.data().iter().map(|&v| v as f64).collect::<Vec<f64>>()];
    let mut a1 = conv(&x0, 1, k[0]);
    relu(&mut a1);
    let mut a2 = conv(&a1, 2, k[1]);
    relu(&mut a2);
    conv(&a2, 3, k[2]).remove(0)
}

fn planes_to_tokens(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..p[0].len()).map(|i| p.iter().map(|pl| pl[i]).collect()).collect()
}

fn tokens_to_planes(t: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..t[0].len()).map(|c| t.iter().map(|row| row[c]).collect()).collect()
}

fn oracle_layer_norm(t: &[f64], gamma: &[f64], beta: &[f64]) -> Vec<f64> {
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    t.iter().enumerate().map(|(i, v)| (v - mean) / (var + 1e-5).sqrt() * gamma[i] + beta[i]).collect()
}

fn oracle_linear(t: &[f64], wt: &[f64], b: &[f64]) -> Vec<f64> {
    let c_in = t.len();
    (0..b.len()).map(|o| b[o] + (0..c_in).map(|i| wt[o * c_in + i] * t[i]).sum::<f64>()).collect()
}

fn oracle_gelu(v: f64) -> f64 {
    0.5 * v * (1.0 + ((2.0 / PI).sqrt() * (v + 0.044715 * v.powi(3))).tanh())
}

/// Window-aligned SwinIR-lite forward in double precision, following the
/// published layer order: shallow conv, residual Swin groups, norm, conv,
/// long skip, then nearest x2 + conv + LeakyReLU stages and a last conv.
#[allow(clippy::too_many_arguments)]
pub fn oracle_swinlite(img: &Image, w: &ModelWeights, embed: usize, groups: usize, depth: usize, window: usize, heads: usize, scale: usize) -> Vec<f64> {
    let (mut wd, mut ht) = img.dims();
    assert!(wd % window == 0 && ht % window == 0);
    let g = |n: &str| weights64(w, n);
    let conv = |x: &[Vec<f64>], name: &str, h: usize, wd: usize| {
        oracle_conv(x, h, wd, &g(&format!("{name}.weight")), &g(&format!("{name}.bias")), 3)
    };
    let x0 = vec![img.data().iter().map(|&v| v as f64).collect::<Vec<f64>>()];
    let f0 = conv(&x0, "conv_first", ht, wd);
    assert_eq!(f0.len(), embed);

    let mut feat = f0.clone();
    for i in 0..groups {
        let mut t = planes_to_tokens(&feat);
        for j in 0..depth {
            let p = format!("layers.{i}.residual_group.blocks.{j}.");
            let normed: Vec<Vec<f64>> =
                t.iter().map(|r| oracle_layer_norm(r, &g(&format!("{p}norm1.weight")), &g(&format!("{p}norm1.bias")))).collect();
            let att = brute_window_attention(&normed, ht, wd, w, &format!("{p}attn."), window, heads, j % 2 == 1);
            for (r, a) in t.iter_mut().zip(&att) {
                r.iter_mut().zip(a).for_each(|(x, y)| *x += y);
            }
            for r in t.iter_mut() {
                let n = oracle_layer_norm(r, &g(&format!("{p}norm2.weight")), &g(&format!("{p}norm2.bias")));
                let hidden: Vec<f64> = oracle_linear(&n, &g(&format!("{p}mlp.fc1.weight")), &g(&format!("{p}mlp.fc1.bias")))
                    .into_iter()
                    .map(oracle_gelu)
                    .collect();
                let out = oracle_linear(&hidden, &g(&format!("{p}mlp.fc2.weight")), &g(&format!("{p}mlp.fc2.bias")));
                r.iter_mut().zip(&out).for_each(|(x, y)| *x += y);
            }
        }
        let mut y = conv(&tokens_to_planes(&t), &format!("layers.{i}.conv"), ht, wd);
        for (yp, fp) in y.iter_mut().zip(&feat) {
            yp.iter_mut().zip(fp).for_each(|(a, b)| *a += b);
        }
        feat = y;
    }
    let normed: Vec<Vec<f64>> =
        planes_to_tokens(&feat).iter().map(|r| oracle_layer_norm(r, &g("norm.weight"), &g("norm.bias"))).collect();
    let mut deep = conv(&tokens_to_planes(&normed), "conv_after_body", ht, wd);
    for (dp, fp) in deep.iter_mut().zip(&f0) {
        dp.iter_mut().zip(fp).for_each(|(a, b)| *a += b);
    }

    let mut x = deep;
    for s in 0..scale.trailing_zeros() as usize {
        let (nh, nw) = (ht * 2, wd * 2);
        let up: Vec<Vec<f64>> = x
            .iter()
            .map(|pl| (0..nh * nw).map(|i| pl[(i / nw / 2) * wd + (i % nw) / 2]).collect())
            .collect();
        (ht, wd) = (nh, nw);
        x = conv(&up, &format!("upsample.{s}"), ht, wd);
        x.iter_mut().flatten().for_each(|v| {
            if *v < 0.0 {
                *v *= 0.2
            }
        });
    }
    conv(&x, "conv_last", ht, wd).remove(0)
}
