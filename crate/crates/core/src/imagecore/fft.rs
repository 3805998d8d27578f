//! Separable 2D DFT on top of `rustfft`, which covers arbitrary lengths
//! (mixed radix with a Bluestein fallback for large primes).
//!
//! Forward transform uses the `exp(-2*pi*i*k*n/N)` sign and is unnormalized;
//! the inverse divides by `width * height`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::Image;

/// Complex `width x height` array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Complex64>,
}

impl Spectrum {
    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.data[v * self.width + u]
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.re).collect()
    }
}

pub fn fft2d(img: &Image) -> Spectrum {
    let data = img
        .data()
        .iter()
        .map(|&v| Complex64::new(v as f64, 0.0))
        .collect();
    let mut s = Spectrum {
        width: img.width(),
        height: img.height(),
        data,
    };
    fft2d_complex(&mut s.data, s.width, s.height, false);
    s
}

pub fn ifft2d(spec: &Spectrum) -> Spectrum {
    let mut out = spec.clone();
    fft2d_complex(&mut out.data, out.width, out.height, true);
    out
}

/// In-place 2D transform of a row-major buffer. `inverse` applies the
/// `1 / (width * height)` normalization.
pub fn fft2d_complex(data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    assert_eq!(data.len(), width * height);
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = if inverse {
        planner.plan_fft_inverse(width)
    } else {
        planner.plan_fft_forward(width)
    };
    row_fft.process(data);

    let col_fft = if inverse {
        planner.plan_fft_inverse(height)
    } else {
        planner.plan_fft_forward(height)
    };
    let mut transposed = vec![Complex64::default(); data.len()];
    transpose(data, &mut transposed, width, height);
    col_fft.process(&mut transposed);
    transpose(&transposed, data, height, width);

    if inverse {
        let norm = 1.0 / (width * height) as f64;
        data.iter_mut().for_each(|c| *c *= norm);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], width: usize, height: usize) {
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
}
