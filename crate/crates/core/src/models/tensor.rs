use crate::error::{Error, Result};
use crate::imagecore::Image;

/// Dense `f32` tensor, row-major. Activations use `(N, C, H, W)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Shape(format!("tensor dims must be positive, got {dims:?}")));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} need {n} values, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("tensor holds non-finite values".into()));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self::new(dims.to_vec(), vec![0.0; n]).expect("positive dims")
    }

    pub(crate) fn from_parts(dims: Vec<usize>, data: Vec<f32>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Self { dims, data }
    }

    /// `[1, 1, H, W]` view of an image.
    pub fn from_image(img: &Image) -> Self {
        Self::from_parts(vec![1, 1, img.height(), img.width()], img.data().to_vec())
    }

    /// Inverse of [`Tensor::from_image`].
    pub fn to_image(&self) -> Result<Image> {
        match self.dims.as_slice() {
            [1, 1, h, w] => Image::new(*w, *h, self.data.clone()),
            other => Err(Error::Shape(format!("expected [1, 1, H, W], got {other:?}"))),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// `(C, H, W)` of a single-sample 4D tensor.
    pub fn chw(&self) -> Result<(usize, usize, usize)> {
        match self.dims.as_slice() {
            [1, c, h, w] => Ok((*c, *h, *w)),
            other => Err(Error::Shape(format!("expected [1, C, H, W], got {other:?}"))),
        }
    }
}
