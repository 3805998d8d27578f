//! Feature similarity: phase congruency from a log-Gabor bank weights the
//! product of phase-congruency and gradient-magnitude similarity maps.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::imagecore::{convolve2d, fft2d_complex, BorderMode, Image, Kernel2D};

pub const FSIM_MIN_DIM: usize = 32;
const T1: f64 = 0.85;
const T2: f64 = 160.0;

/// Log-Gabor bank and noise model settings.
#[derive(Debug, Clone, Copy)]
pub struct PhaseCongruencyParams {
    pub scales: usize,
    pub orientations: usize,
    pub min_wavelength: f64,
    pub mult: f64,
    pub sigma_on_f: f64,
    pub d_theta_on_sigma: f64,
    /// Noise threshold in standard deviations above the mean noise energy.
    pub k: f64,
    pub epsilon: f64,
    pub lowpass_cutoff: f64,
    pub lowpass_order: i32,
    /// Extra divisor applied to the noise threshold.
    pub threshold_divisor: f64,
}

impl Default for PhaseCongruencyParams {
    fn default() -> Self {
        Self {
            scales: 4,
            orientations: 4,
            min_wavelength: 6.0,
            mult: 2.0,
            sigma_on_f: 0.55,
            d_theta_on_sigma: 1.2,
            k: 2.0,
            epsilon: 1e-4,
            lowpass_cutoff: 0.45,
            lowpass_order: 15,
            threshold_divisor: 1.7,
        }
    }
}

/// Frequency coordinates in unshifted FFT order: `[-n/2, n/2)` scaled by `1/n`
/// for even `n`, `[-(n-1)/2, (n-1)/2]` scaled by `1/(n-1)` for odd `n`,
/// then rotated so zero frequency sits at index 0.
fn freq_axis(n: usize) -> Vec<f64> {
    let centered: Vec<f64> = if n % 2 == 1 {
        let half = (n as f64 - 1.0) / 2.0;
        (0..n).map(|i| (i as f64 - half) / (n as f64 - 1.0).max(1.0)).collect()
    } else {
        (0..n).map(|i| (i as f64 - (n / 2) as f64) / n as f64).collect()
    };
    // inverse of the centering shift: output[i] = centered[(i + n/2) % n]
    (0..n).map(|i| centered[(i + n / 2) % n]).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    let n = v.len();
    v.sort_by(|a, b| a.total_cmp(b));
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Phase congruency map of a `[0, 255]`-scaled image, row-major.
pub fn phase_congruency(values: &[f64], width: usize, height: usize, p: &PhaseCongruencyParams) -> Vec<f64> {
    let n = width * height;
    let mut image_fft: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2d_complex(&mut image_fft, width, height, false);

    let xs = freq_axis(width);
    let ys = freq_axis(height);
    let mut radius = vec![0.0; n];
    let mut sin_t = vec![0.0; n];
    let mut cos_t = vec![0.0; n];
    let mut lowpass = vec![0.0; n];
    for r in 0..height {
        for c in 0..width {
            let (x, y) = (xs[c], ys[r]);
            let rad = (x * x + y * y).sqrt();
            let theta = (-y).atan2(x);
            let i = r * width + c;
            lowpass[i] = 1.0 / (1.0 + (rad / p.lowpass_cutoff).powi(2 * p.lowpass_order));
            radius[i] = rad;
            sin_t[i] = theta.sin();
            cos_t[i] = theta.cos();
        }
    }
    radius[0] = 1.0;

    let log_gabor: Vec<Vec<f64>> = (0..p.scales)
        .map(|s| {
            let fo = 1.0 / (p.min_wavelength * p.mult.powi(s as i32));
            let denom = 2.0 * p.sigma_on_f.ln().powi(2);
            let mut g: Vec<f64> = radius
                .iter()
                .zip(&lowpass)
                .map(|(&r, &lp)| (-(r / fo).ln().powi(2) / denom).exp() * lp)
                .collect();
            g[0] = 0.0;
            g
        })
        .collect();

    let theta_sigma = PI / p.orientations as f64 / p.d_theta_on_sigma;
    let mut energy_all = vec![0.0; n];
    let mut an_all = vec![0.0; n];
    for o in 0..p.orientations {
        let angle = o as f64 * PI / p.orientations as f64;
        let (ca, sa) = (angle.cos(), angle.sin());
        let spread: Vec<f64> = (0..n)
            .map(|i| {
                let ds = sin_t[i] * ca - cos_t[i] * sa;
                let dc = cos_t[i] * ca + sin_t[i] * sa;
                let dtheta = ds.atan2(dc).abs();
                (-dtheta * dtheta / (2.0 * theta_sigma * theta_sigma)).exp()
            })
            .collect();

        let mut sum_e = vec![0.0; n];
        let mut sum_o = vec![0.0; n];
        let mut sum_an = vec![0.0; n];
        let mut responses: Vec<Vec<Complex64>> = Vec::with_capacity(p.scales);
        let mut spatial_filters: Vec<Vec<f64>> = Vec::with_capacity(p.scales);
        let mut em_n = 0.0;
        for (s, lg) in log_gabor.iter().enumerate() {
            let filter: Vec<f64> = lg.iter().zip(&spread).map(|(a, b)| a * b).collect();
            if s == 0 {
                em_n = filter.iter().map(|f| f * f).sum();
            }
            let mut spatial: Vec<Complex64> = filter.iter().map(|&f| Complex64::new(f, 0.0)).collect();
            fft2d_complex(&mut spatial, width, height, true);
            let root_n = (n as f64).sqrt();
            spatial_filters.push(spatial.iter().map(|c| c.re * root_n).collect());

            let mut eo: Vec<Complex64> = image_fft.iter().zip(&filter).map(|(z, &f)| z * f).collect();
            fft2d_complex(&mut eo, width, height, true);
            for i in 0..n {
                sum_an[i] += eo[i].norm();
                sum_e[i] += eo[i].re;
                sum_o[i] += eo[i].im;
            }
            responses.push(eo);
        }

        let mut energy = vec![0.0; n];
        for i in 0..n {
            let x_energy = (sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]).sqrt() + p.epsilon;
            let (me, mo) = (sum_e[i] / x_energy, sum_o[i] / x_energy);
            for eo in &responses {
                let (e, od) = (eo[i].re, eo[i].im);
                energy[i] += e * me + od * mo - (e * mo - od * me).abs();
            }
        }

        // noise energy estimated from the smallest-scale response amplitude
        let median_e2n = median(responses[0].iter().map(|c| c.norm_sqr()).collect());
        let mean_e2n = -median_e2n / 0.5f64.ln();
        let noise_power = mean_e2n / em_n;
        let mut sum_an2 = 0.0;
        let mut sum_ai_aj = 0.0;
        for i in 0..n {
            for si in 0..p.scales {
                let a = spatial_filters[si][i];
                sum_an2 += a * a;
                for sj in si + 1..p.scales {
                    sum_ai_aj += a * spatial_filters[sj][i];
                }
            }
        }
        let noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_ai_aj;
        let tau = (noise_energy2 / 2.0).sqrt();
        let noise_mean = tau * (PI / 2.0).sqrt();
        let noise_sigma = ((2.0 - PI / 2.0) * tau * tau).sqrt();
        let threshold = (noise_mean + p.k * noise_sigma) / p.threshold_divisor;

        for i in 0..n {
            energy_all[i] += (energy[i] - threshold).max(0.0);
            an_all[i] += sum_an[i];
        }
    }
    energy_all
        .iter()
        .zip(&an_all)
        .map(|(&e, &a)| if a > 0.0 { e / a } else { 0.0 })
        .collect()
}

/// Scharr gradient magnitude with zero padding.
fn gradient_magnitude(img: &Image) -> Vec<f64> {
    let dx = Kernel2D::new(3, 3, [3.0, 0.0, -3.0, 10.0, 0.0, -10.0, 3.0, 0.0, -3.0].map(|v| v / 16.0).to_vec())
        .expect("3x3 kernel");
    let dy = Kernel2D::new(3, 3, [3.0, 10.0, 3.0, 0.0, 0.0, 0.0, -3.0, -10.0, -3.0].map(|v| v / 16.0).to_vec())
        .expect("3x3 kernel");
    let gx = convolve2d(img, &dx, BorderMode::Zero);
    let gy = convolve2d(img, &dy, BorderMode::Zero);
    gx.data()
        .iter()
        .zip(gy.data())
        .map(|(&a, &b)| ((a as f64).powi(2) + (b as f64).powi(2)).sqrt())
        .collect()
}

/// Box average over `f x f` blocks (zero padded, anchored as a centered
/// filter), then every `f`-th sample. Identity for `f == 1`.
fn reduce(img: &Image, f: usize) -> Image {
    if f == 1 {
        return img.clone();
    }
    // an even box occupies the top-left f x f taps of an odd kernel, which
    // averages rows/columns i - f/2 + 1 ..= i + f/2 like a "same" convolution
    let n = f | 1;
    let k = Kernel2D::new(n, n, {
        let mut taps = vec![0.0; n * n];
        for y in 0..f {
            for x in 0..f {
                taps[y * n + x] = 1.0 / (f * f) as f32;
            }
        }
        taps
    })
    .expect("odd kernel");
    let filtered = convolve2d(img, &k, BorderMode::Zero);
    let (w, h) = (img.width().div_ceil(f), img.height().div_ceil(f));
    Image::from_fn(w, h, |x, y| filtered.get(x * f, y * f))
}

pub fn fsim(reference: &Image, x: &Image) -> Result<f64> {
    reference.ensure_same_dims(x)?;
    let (w, h) = x.dims();
    if w.min(h) < FSIM_MIN_DIM {
        return Err(Error::Precondition(format!(
            "FSIM needs images of at least {FSIM_MIN_DIM}x{FSIM_MIN_DIM}, got {w}x{h}"
        )));
    }
    let f = ((w.min(h) as f64 / 256.0).round() as usize).max(1);
    let a = reduce(&reference.map(|v| v * 255.0), f);
    let b = reduce(&x.map(|v| v * 255.0), f);
    let params = PhaseCongruencyParams::default();
    let pc_a = phase_congruency(&a.to_f64_scaled(1.0), a.width(), a.height(), &params);
    let pc_b = phase_congruency(&b.to_f64_scaled(1.0), b.width(), b.height(), &params);
    let g_a = gradient_magnitude(&a);
    let g_b = gradient_magnitude(&b);

    let (mut num, mut den, mut grad_only) = (0.0, 0.0, 0.0);
    for i in 0..pc_a.len() {
        let s_pc = (2.0 * pc_a[i] * pc_b[i] + T1) / (pc_a[i].powi(2) + pc_b[i].powi(2) + T1);
        let s_g = (2.0 * g_a[i] * g_b[i] + T2) / (g_a[i].powi(2) + g_b[i].powi(2) + T2);
        let pcm = pc_a[i].max(pc_b[i]);
        num += s_pc * s_g * pcm;
        den += pcm;
        grad_only += s_g;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        // featureless images: every location weighs the same
        Ok(grad_only / pc_a.len() as f64)
    }
}
