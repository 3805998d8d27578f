//! Individual degradation stages.

use crate::imagecore::{convolve2d, BorderMode, Image, Kernel2D};
use crate::rng::Prng;

/// Taps of the 1D Gaussian used by [`gaussian_blur`]: radius `ceil(3 sigma)`,
/// renormalized to sum to one.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|t| t / total).collect()
}

/// Separable Gaussian blur with reflected borders. `sigma == 0` is the identity.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    assert!(sigma >= 0.0 && sigma.is_finite(), "blur sigma must be finite and >= 0");
    if sigma == 0.0 {
        return img.clone();
    }
    let taps: Vec<f32> = gaussian_taps(sigma).into_iter().map(|t| t as f32).collect();
    let row = Kernel2D::row(taps.clone()).expect("odd tap count");
    let col = Kernel2D::column(taps).expect("odd tap count");
    let tmp = convolve2d(img, &row, BorderMode::Reflect);
    convolve2d(&tmp, &col, BorderMode::Reflect)
}

/// Adds `N(0, sigma255^2)` noise expressed on the 0-255 scale, one draw per
/// pixel in row-major order, then clamps to `[0, 1]`.
pub fn add_gaussian_noise(img: &Image, sigma255: f64, rng: &mut Prng) -> Image {
    assert!(sigma255 >= 0.0 && sigma255.is_finite(), "noise sigma must be finite and >= 0");
    if sigma255 == 0.0 {
        return img.clone();
    }
    let data = img
        .data()
        .iter()
        .map(|&v| (v as f64 + rng.normal() * sigma255 / 255.0).clamp(0.0, 1.0) as f32)
        .collect();
    Image::from_vec(img.width(), img.height(), data)
}

/// Baseline luminance quantization table, row-major over `(v, u)`.
pub const LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Quality-scaled table: `scale = 5000/q` below 50, `200 - 2q` otherwise,
/// entries `(T * scale + 50) / 100` clamped to `1..=255`.
pub fn quant_table(quality: u8) -> [u16; 64] {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u16; 64];
    for (o, &t) in out.iter_mut().zip(&LUMA_QUANT) {
        *o = ((t as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    out
}

fn dct_basis() -> [[f64; 8]; 8] {
    let mut b = [[0.0; 8]; 8];
    for (u, row) in b.iter_mut().enumerate() {
        let c = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        for (x, v) in row.iter_mut().enumerate() {
            *v = 0.5 * c * (((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI) / 16.0).cos();
        }
    }
    b
}

/// JPEG-like compression artifact: level-shifted 8x8 DCT-II, quantize with
/// [`quant_table`], dequantize, inverse DCT, clamp. Edge blocks are padded by
/// replicating the last row/column.
pub fn dct_compress(img: &Image, quality: u8) -> Image {
    assert!((1..=100).contains(&quality), "quality must be in 1..=100");
    let table = quant_table(quality);
    let basis = dct_basis();
    let (w, h) = img.dims();
    let mut out = vec![0.0f32; w * h];

    let mut block = [[0.0f64; 8]; 8];
    let mut tmp = [[0.0f64; 8]; 8];
    let mut coef = [[0.0f64; 8]; 8];
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            for (y, row) in block.iter_mut().enumerate() {
                let sy = (by + y).min(h - 1);
                for (x, v) in row.iter_mut().enumerate() {
                    let sx = (bx + x).min(w - 1);
                    *v = img.get(sx, sy) as f64 * 255.0 - 128.0;
                }
            }
            // rows then columns: coef[v][u] = sum_y sum_x B[v][y] B[u][x] f[y][x]
            for y in 0..8 {
                for u in 0..8 {
                    tmp[y][u] = (0..8).map(|x| basis[u][x] * block[y][x]).sum();
                }
            }
            for v in 0..8 {
                for u in 0..8 {
                    let c: f64 = (0..8).map(|y| basis[v][y] * tmp[y][u]).sum();
                    let q = table[v * 8 + u] as f64;
                    coef[v][u] = (c / q).round() * q;
                }
            }
            for v in 0..8 {
                for x in 0..8 {
                    tmp[v][x] = (0..8).map(|u| basis[u][x] * coef[v][u]).sum();
                }
            }
            for y in 0..8 {
                if by + y >= h {
                    break;
                }
                for x in 0..8 {
                    if bx + x >= w {
                        break;
                    }
                    let f: f64 = (0..8).map(|v| basis[v][y] * tmp[v][x]).sum();
                    out[(by + y) * w + bx + x] = ((f + 128.0) / 255.0).clamp(0.0, 1.0) as f32;
                }
            }
        }
    }
    Image::from_vec(w, h, out)
}
