//! Single-channel raster, file I/O and the numerical kernels shared by every
//! other module: convolution, 2D FFT and resampling.
//!
//! Pixel values are `f32` luma in the nominal range `[0, 1]`, stored row-major.
//! Reductions accumulate in `f64`.

mod convolve;
mod fft;
mod io;
mod resample;

pub use convolve::convolve2d;
pub use fft::{fft2d, fft2d_complex, ifft2d, Spectrum};
pub use io::{load_msrf, load_pgm, read_pgm, save_msrf, save_pgm, write_pgm};
pub use resample::{resample, ResampleKernel};

use crate::error::{Error, Result};

/// Grayscale raster, row-major, `data.len() == width * height`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Image {
    /// Builds an image, rejecting empty dimensions, length mismatches and
    /// non-finite samples.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} image needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Internal constructor for buffers produced by our own kernels.
    pub(crate) fn from_vec(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert!(width > 0 && height > 0);
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert!(value.is_finite());
        Self::from_vec(width, height, vec![value; width * height])
    }

    /// Evaluates `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                assert!(v.is_finite(), "from_fn produced a non-finite value at ({x}, {y})");
                data.push(v);
            }
        }
        Self::from_vec(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Sample with out-of-range coordinates resolved by `border`.
    #[inline]
    pub fn sample(&self, x: isize, y: isize, border: BorderMode) -> f32 {
        match (
            border.resolve(x, self.width),
            border.resolve(y, self.height),
        ) {
            (Some(x), Some(y)) => self.get(x, y),
            _ => 0.0,
        }
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Image {
        Image::from_vec(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn clamp01(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Copies the `w x h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::Shape(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + x0..row + x0 + w]);
        }
        Ok(Image::from_vec(w, h, data))
    }

    /// Center crop to the largest dimensions divisible by `multiple`.
    pub fn center_crop_to_multiple(&self, multiple: usize) -> Result<Image> {
        let w = self.width - self.width % multiple;
        let h = self.height - self.height % multiple;
        if w == 0 || h == 0 {
            return Err(Error::Shape(format!(
                "{}x{} image is smaller than {multiple}",
                self.width, self.height
            )));
        }
        self.crop((self.width - w) / 2, (self.height - h) / 2, w, h)
    }

    pub(crate) fn ensure_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// Sample values as `f64`, scaled by `scale`.
    pub(crate) fn to_f64_scaled(&self, scale: f64) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64 * scale).collect()
    }
}

/// Linear rescale from `[0, 1]` to `[0, 255]`, without rounding.
pub fn to_byte_range(img: &Image) -> Image {
    img.map(|v| v * 255.0)
}

/// How samples outside the raster are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorderMode {
    /// Repeat the nearest edge sample.
    Clamp,
    /// Mirror about the edge sample without repeating it (`-1 -> 1`).
    Reflect,
    /// Treat outside samples as zero.
    Zero,
}

impl BorderMode {
    /// Maps a possibly out-of-range index onto `0..n`, or `None` for zero padding.
    #[inline]
    pub fn resolve(self, i: isize, n: usize) -> Option<usize> {
        let last = n as isize - 1;
        match self {
            BorderMode::Clamp => Some(i.clamp(0, last) as usize),
            BorderMode::Reflect => Some(reflect_index(i, n)),
            BorderMode::Zero => (0..=last).contains(&i).then_some(i as usize),
        }
    }
}

/// Mirror-101 reflection, periodic so any offset resolves.
#[inline]
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Convolution kernel with odd width and height, taps row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    width: usize,
    height: usize,
    taps: Vec<f32>,
}

impl Kernel2D {
    pub fn new(width: usize, height: usize, taps: Vec<f32>) -> Result<Self> {
        if width % 2 == 0 || height % 2 == 0 {
            return Err(Error::Shape(format!(
                "kernel dimensions must be odd, got {width}x{height}"
            )));
        }
        if taps.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} kernel needs {} taps, got {}",
                width * height,
                taps.len()
            )));
        }
        Ok(Self {
            width,
            height,
            taps,
        })
    }

    pub fn identity() -> Self {
        Self {
            width: 1,
            height: 1,
            taps: vec![1.0],
        }
    }

    /// 1 x n horizontal kernel.
    pub fn row(taps: Vec<f32>) -> Result<Self> {
        Self::new(taps.len(), 1, taps)
    }

    /// n x 1 vertical kernel.
    pub fn column(taps: Vec<f32>) -> Result<Self> {
        Self::new(1, taps.len(), taps)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn taps(&self) -> &[f32] {
        &self.taps
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.taps[j * self.width + i]
    }

    /// Kernel rotated by 180 degrees. Correlating with `k` equals convolving
    /// with `k.flipped()`.
    pub fn flipped(&self) -> Self {
        let mut taps = self.taps.clone();
        taps.reverse();
        Self {
            width: self.width,
            height: self.height,
            taps,
        }
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().map(|&t| t as f64).sum()
    }
}
