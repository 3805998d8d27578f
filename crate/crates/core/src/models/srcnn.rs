//! Three-layer SRCNN on the bicubic-upscaled input:
//! conv(k1) -> ReLU -> conv(k2) -> ReLU -> conv(k3), same-size output.
//!
//! Training minimizes `(1/N) sum_i ||F(Y_i) - X_i||^2` (squared norm summed
//! over pixels, averaged over the batch) with hand-derived backprop.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ops::{conv2d, conv2d_backward, relu_inplace, Fmap, Scalar};
use super::{ModelWeights, Tensor};
use crate::degrade::list_corpus;
use crate::error::{Error, Result};
use crate::imagecore::{load_pgm, resample, Image, ResampleKernel};
use crate::rng::Prng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrcnnConfig {
    pub c1: usize,
    pub c2: usize,
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub scale: u32,
}

impl SrcnnConfig {
    pub fn new(scale: u32) -> Self {
        Self { c1: 64, c2: 32, k1: 9, k2: 1, k3: 5, scale }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.k1, self.k2, self.k3].iter().any(|k| k % 2 == 0) {
            return Err(Error::Config("SRCNN kernel sizes must be odd".into()));
        }
        if self.c1 == 0 || self.c2 == 0 {
            return Err(Error::Config("SRCNN channel counts must be >= 1".into()));
        }
        Ok(())
    }

    /// Parameter names and shapes in storage order.
    pub fn param_shapes(&self) -> [(&'static str, Vec<usize>); 6] {
        [
            ("conv1.weight", vec![self.c1, 1, self.k1, self.k1]),
            ("conv1.bias", vec![self.c1]),
            ("conv2.weight", vec![self.c2, self.c1, self.k2, self.k2]),
            ("conv2.bias", vec![self.c2]),
            ("conv3.weight", vec![1, self.c2, self.k3, self.k3]),
            ("conv3.bias", vec![1]),
        ]
    }
}

/// SRCNN parameters in a chosen precision, ordered as [`SrcnnConfig::param_shapes`].
#[derive(Debug, Clone, PartialEq)]
pub struct Srcnn<T> {
    pub cfg: SrcnnConfig,
    pub params: [Vec<T>; 6],
}

struct Activations<T> {
    a1: Fmap<T>,
    a2: Fmap<T>,
    out: Fmap<T>,
}

impl<T: Scalar> Srcnn<T> {
    pub fn from_weights(w: &ModelWeights, cfg: SrcnnConfig) -> Result<Self> {
        cfg.validate()?;
        let shapes = cfg.param_shapes();
        let mut params: [Vec<T>; 6] = Default::default();
        for (p, (name, dims)) in params.iter_mut().zip(&shapes) {
            *p = w.expect(name, dims)?.iter().map(|&v| T::from(v).unwrap()).collect();
        }
        Ok(Self { cfg, params })
    }

    pub fn to_weights(&self) -> ModelWeights {
        let mut w = ModelWeights::new();
        for (p, (name, dims)) in self.params.iter().zip(self.cfg.param_shapes()) {
            w.put(name, &dims, p.iter().map(|v| v.to_f32().unwrap()).collect());
        }
        w
    }

    fn run(&self, y: &Fmap<T>) -> Activations<T> {
        let c = &self.cfg;
        let [w1, b1, w2, b2, w3, b3] = &self.params;
        let mut a1 = conv2d(y, w1, b1, c.c1, c.k1, 1);
        relu_inplace(&mut a1);
        let mut a2 = conv2d(&a1, w2, b2, c.c2, c.k2, 1);
        relu_inplace(&mut a2);
        let out = conv2d(&a2, w3, b3, 1, c.k3, 1);
        Activations { a1, a2, out }
    }

    pub fn forward(&self, y: &Fmap<T>) -> Fmap<T> {
        self.run(y).out
    }

    /// Batch loss `(1/N) sum_i ||F(Y_i) - X_i||^2`.
    pub fn loss(&self, batch: &[(Fmap<T>, Fmap<T>)]) -> T {
        let n = T::from(batch.len()).unwrap();
        batch
            .iter()
            .map(|(y, x)| {
                self.forward(y)
                    .data
                    .iter()
                    .zip(&x.data)
                    .map(|(&o, &t)| (o - t) * (o - t))
                    .sum::<T>()
            })
            .sum::<T>()
            / n
    }

    pub fn loss_and_grad(&self, batch: &[(Fmap<T>, Fmap<T>)]) -> (T, [Vec<T>; 6]) {
        let c = &self.cfg;
        let n = T::from(batch.len()).unwrap();
        let two = T::from(2.0).unwrap();
        let mut grads: [Vec<T>; 6] = self.params.clone().map(|p| vec![T::zero(); p.len()]);
        let mut loss = T::zero();
        for (y, x) in batch {
            let act = self.run(y);
            let mut g_out = act.out.clone();
            for (g, &t) in g_out.data.iter_mut().zip(&x.data) {
                let r = *g - t;
                loss += r * r;
                *g = two * r / n;
            }
            let g3 = conv2d_backward(&act.a2, &self.params[4], 1, c.k3, &g_out, true);
            let mut g_a2 = g3.input.unwrap();
            mask_relu(&mut g_a2, &act.a2);
            let g2 = conv2d_backward(&act.a1, &self.params[2], c.c2, c.k2, &g_a2, true);
            let mut g_a1 = g2.input.unwrap();
            mask_relu(&mut g_a1, &act.a1);
            let g1 = conv2d_backward(y, &self.params[0], c.c1, c.k1, &g_a1, false);
            for (acc, part) in grads.iter_mut().zip([g1.weight, g1.bias, g2.weight, g2.bias, g3.weight, g3.bias]) {
                acc.iter_mut().zip(part).for_each(|(a, b)| *a += b);
            }
        }
        (loss / n, grads)
    }
}

/// ReLU derivative expressed through the activation: zero where the output is zero.
fn mask_relu<T: Scalar>(grad: &mut Fmap<T>, activation: &Fmap<T>) {
    for (g, &a) in grad.data.iter_mut().zip(&activation.data) {
        if a <= T::zero() {
            *g = T::zero();
        }
    }
}

fn image_fmap<T: Scalar>(img: &Image) -> Fmap<T> {
    Fmap::from_vec(1, img.height(), img.width(), img.data().iter().map(|&v| T::from(v).unwrap()).collect())
}

/// Refines a bicubic-upscaled image; output is not clamped here.
pub fn srcnn_forward(y_upscaled: &Image, w: &ModelWeights, cfg: &SrcnnConfig) -> Result<Image> {
    let net = Srcnn::<f32>::from_weights(w, *cfg)?;
    let out = net.forward(&image_fmap(y_upscaled));
    Image::new(out.w, out.h, out.data)
        .map_err(|_| Error::Model("SRCNN produced non-finite output".into()))
}

fn tensor_batch(t: &Tensor, what: &str) -> Result<Vec<Fmap<f64>>> {
    let [n, c, h, w] = t.dims() else {
        return Err(Error::Shape(format!("{what}: expected [N, 1, H, W], got {:?}", t.dims())));
    };
    if *c != 1 {
        return Err(Error::Shape(format!("{what}: expected one channel, got {c}")));
    }
    Ok(t.data()
        .chunks_exact(h * w)
        .take(*n)
        .map(|s| Fmap::from_vec(1, *h, *w, s.iter().map(|&v| v as f64).collect()))
        .collect())
}

/// Loss and parameter gradients for a `[N, 1, H, W]` batch, evaluated in
/// double precision.
pub fn srcnn_loss_and_grad(y: &Tensor, x: &Tensor, w: &ModelWeights, cfg: &SrcnnConfig) -> Result<(f64, ModelWeights)> {
    if y.dims() != x.dims() {
        return Err(Error::Shape(format!("batch shape mismatch: {:?} vs {:?}", y.dims(), x.dims())));
    }
    let ys = tensor_batch(y, "inputs")?;
    let xs = tensor_batch(x, "targets")?;
    let net = Srcnn::<f64>::from_weights(w, *cfg)?;
    let batch: Vec<_> = ys.into_iter().zip(xs).collect();
    let (loss, grads) = net.loss_and_grad(&batch);
    let g = Srcnn { cfg: *cfg, params: grads };
    Ok((loss, g.to_weights()))
}

/// Gaussian `N(0, 0.01^2)` weights drawn layer by layer, zero biases.
pub fn srcnn_init(cfg: &SrcnnConfig, seed: u64) -> ModelWeights {
    let mut rng = Prng::new(seed);
    let mut w = ModelWeights::new();
    for (name, dims) in cfg.param_shapes() {
        let n = dims.iter().product();
        let data = if name.ends_with("weight") {
            super::ops::gaussian_vec(&mut rng, n, 0.01)
        } else {
            vec![0.0; n]
        };
        w.put(name, &dims, data);
    }
    w
}

/// Weights whose forward pass reproduces the input exactly for inputs in `[0, 1]`:
/// one channel carries the pixel through centered delta kernels.
pub fn srcnn_identity(cfg: &SrcnnConfig) -> ModelWeights {
    let mut w = ModelWeights::new();
    for (name, dims) in cfg.param_shapes() {
        let mut data = vec![0.0f32; dims.iter().product()];
        if name.ends_with("weight") {
            let k = dims[2];
            data[(k / 2) * k + k / 2] = 1.0;
        }
        w.put(name, &dims, data);
    }
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub iters: usize,
    pub lr: f64,
    pub momentum: f64,
    pub batch: usize,
    pub patch: usize,
    pub seed: u64,
    /// Optional CSV of `iter,loss` written after training.
    pub loss_log: Option<PathBuf>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { iters: 500, lr: 1e-4, momentum: 0.9, batch: 16, patch: 33, seed: 0, loss_log: None }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: ModelWeights,
    /// Batch loss before each update.
    pub losses: Vec<f64>,
}

/// Bicubic upscale clamped to `[0, 1]`: the SRCNN input for a given LR image.
pub fn bicubic_input(lr: &Image, width: usize, height: usize) -> Image {
    resample(lr, width, height, ResampleKernel::Bicubic, false).clamp01()
}

/// Loads `pairs_dir/{hr,lr}/*.pgm` as (bicubic-upscaled LR, HR) training pairs.
pub fn load_training_pairs(pairs_dir: &Path) -> Result<Vec<(Image, Image)>> {
    let hr_files = list_corpus(&pairs_dir.join("hr"))?;
    if hr_files.is_empty() {
        return Err(Error::Config(format!("no training pairs under {}", pairs_dir.display())));
    }
    hr_files
        .iter()
        .map(|hr_path| {
            let name = hr_path.file_name().unwrap().to_string_lossy().into_owned();
            let hr = load_pgm(hr_path)?;
            let lr = load_pgm(pairs_dir.join("lr").join(&name))?;
            Ok((bicubic_input(&lr, hr.width(), hr.height()), hr))
        })
        .collect()
}

pub fn srcnn_train(pairs_dir: &Path, cfg: &SrcnnConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    let pairs = load_training_pairs(pairs_dir)?;
    srcnn_train_on(&pairs, cfg, opts)
}

/// SGD with momentum on random patches. Patch positions come from the seeded
/// generator only, so the run is reproducible.
pub fn srcnn_train_on(pairs: &[(Image, Image)], cfg: &SrcnnConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::Config("empty training corpus".into()));
    }
    if opts.batch == 0 || opts.patch == 0 || !(opts.lr.is_finite() && opts.lr >= 0.0) {
        return Err(Error::Config("batch, patch and lr must be positive".into()));
    }
    for (y, x) in pairs {
        if y.dims() != x.dims() {
            return Err(Error::Shape(format!("pair dims differ: {:?} vs {:?}", y.dims(), x.dims())));
        }
    }
    let patch = pairs
        .iter()
        .map(|(_, x)| x.width().min(x.height()))
        .min()
        .unwrap()
        .min(opts.patch);

    let mut rng = Prng::new(opts.seed);
    let init = srcnn_init(cfg, opts.seed);
    let mut net = Srcnn::<f32>::from_weights(&init, *cfg)?;
    let mut velocity: [Vec<f32>; 6] = net.params.clone().map(|p| vec![0.0; p.len()]);
    let (lr, mu) = (opts.lr as f32, opts.momentum as f32);
    let mut losses = Vec::with_capacity(opts.iters);

    for _ in 0..opts.iters {
        let batch: Vec<(Fmap<f32>, Fmap<f32>)> = (0..opts.batch)
            .map(|_| {
                let (y, x) = &pairs[rng.int_inclusive(0, pairs.len() as i64 - 1) as usize];
                let x0 = rng.int_inclusive(0, (x.width() - patch) as i64) as usize;
                let y0 = rng.int_inclusive(0, (x.height() - patch) as i64) as usize;
                let crop = |img: &Image| image_fmap(&img.crop(x0, y0, patch, patch).unwrap());
                (crop(y), crop(x))
            })
            .collect();
        let (loss, grads) = net.loss_and_grad(&batch);
        if !loss.is_finite() {
            return Err(Error::Model(format!("training diverged at iteration {}", losses.len())));
        }
        losses.push(loss as f64);
        for ((p, v), g) in net.params.iter_mut().zip(&mut velocity).zip(&grads) {
            for ((pi, vi), &gi) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                *vi = mu * *vi - lr * gi;
                *pi += *vi;
            }
        }
    }

    if let Some(path) = &opts.loss_log {
        let mut text = String::from("iter,loss\n");
        for (i, l) in losses.iter().enumerate() {
            text.push_str(&format!("{i},{l}\n"));
        }
        fs::write(path, text).map_err(Error::io(path))?;
    }
    Ok(TrainOutcome { weights: net.to_weights(), losses })
}
