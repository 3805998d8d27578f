//! Small ESRGAN-style generator.
//!
//! ```text
//! feat = conv_first(Y)
//! feat = feat + conv_body(RRDB_n(...RRDB_1(feat)))
//! RRDB(x) = x + beta * RDB3(RDB2(RDB1(x)))
//! RDB(x)  = x + beta * conv5([x, x1..x4]),  xi = lrelu(conv_i([x, x1..x(i-1)]))
//! up: [nearest x2 -> conv -> lrelu] per factor 2, or one [nearest x3 -> conv -> lrelu]
//! X^ = conv_last(lrelu(conv_hr(up)))
//! ```

use serde::{Deserialize, Serialize};

use super::ops::{init_conv, leaky_relu_inplace, upsample_nearest, Conv, Fmap};
use super::swinlite::{add_center_delta, LEAKY_SLOPE};
use super::ModelWeights;
use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::rng::Prng;

pub const RDBS_PER_RRDB: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrdbLiteConfig {
    pub features: usize,
    pub rrdb_count: usize,
    pub dense_convs: usize,
    pub growth: usize,
    pub residual_scale: f32,
    pub scale: u32,
}

impl RrdbLiteConfig {
    pub fn new(scale: u32) -> Self {
        Self { features: 16, rrdb_count: 2, dense_convs: 5, growth: 8, residual_scale: 0.2, scale }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.residual_scale) {
            return Err(Error::Config(format!("residual scale must be in [0, 1], got {}", self.residual_scale)));
        }
        if self.features == 0 || self.growth == 0 || self.dense_convs < 2 {
            return Err(Error::Config("rrdb features, growth must be >= 1 and dense_convs >= 2".into()));
        }
        if !(2..=4).contains(&self.scale) {
            return Err(Error::Config(format!("rrdblite supports scales 2, 3 and 4, not {}", self.scale)));
        }
        Ok(())
    }

    /// Upsampling factor of each stage.
    fn up_factors(&self) -> Vec<usize> {
        match self.scale {
            3 => vec![3],
            s => vec![2; s.trailing_zeros() as usize],
        }
    }

    fn dense_conv_shape(&self, i: usize) -> (usize, usize) {
        let c_in = self.features + i * self.growth;
        let c_out = if i + 1 == self.dense_convs { self.features } else { self.growth };
        (c_in, c_out)
    }
}

pub struct RrdbLite {
    pub cfg: RrdbLiteConfig,
    conv_first: Conv,
    body: Vec<Vec<Vec<Conv>>>,
    conv_body: Conv,
    upsample: Vec<Conv>,
    conv_hr: Conv,
    conv_last: Conv,
}

impl RrdbLite {
    pub fn load(w: &ModelWeights, cfg: RrdbLiteConfig) -> Result<Self> {
        cfg.validate()?;
        let f = cfg.features;
        let body = (0..cfg.rrdb_count)
            .map(|r| {
                (1..=RDBS_PER_RRDB)
                    .map(|b| {
                        (0..cfg.dense_convs)
                            .map(|i| {
                                let (ci, co) = cfg.dense_conv_shape(i);
                                Conv::load(w, &format!("body.{r}.rdb{b}.conv{}", i + 1), ci, co, 3)
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg,
            conv_first: Conv::load(w, "conv_first", 1, f, 3)?,
            body,
            conv_body: Conv::load(w, "conv_body", f, f, 3)?,
            upsample: (0..cfg.up_factors().len())
                .map(|s| Conv::load(w, &format!("conv_up{}", s + 1), f, f, 3))
                .collect::<Result<_>>()?,
            conv_hr: Conv::load(w, "conv_hr", f, f, 3)?,
            conv_last: Conv::load(w, "conv_last", f, 1, 3)?,
        })
    }

    fn rdb(&self, convs: &[Conv], x: &Fmap<f32>) -> Fmap<f32> {
        let mut parts = vec![x.clone()];
        let mut out = x.clone();
        for (i, conv) in convs.iter().enumerate() {
            let refs: Vec<&Fmap<f32>> = parts.iter().collect();
            let mut y = conv.forward(&Fmap::concat(&refs));
            if i + 1 < convs.len() {
                leaky_relu_inplace(&mut y, LEAKY_SLOPE);
                parts.push(y);
            } else {
                out.add_scaled(&y, self.cfg.residual_scale);
            }
        }
        out
    }

    /// The RRDB stack alone, between `conv_first` and `conv_body`.
    pub fn trunk(&self, feat: &Fmap<f32>) -> Fmap<f32> {
        let mut x = feat.clone();
        for rrdb in &self.body {
            let mut y = x.clone();
            for convs in rrdb {
                y = self.rdb(convs, &y);
            }
            let mut out = x;
            out.add_scaled(&y, self.cfg.residual_scale);
            x = out;
        }
        x
    }

    pub fn head(&self, y: &Fmap<f32>) -> Fmap<f32> {
        self.conv_first.forward(y)
    }

    pub fn tail(&self, feat: &Fmap<f32>) -> Fmap<f32> {
        let mut x = feat.clone();
        for (conv, factor) in self.upsample.iter().zip(self.cfg.up_factors()) {
            x = conv.forward(&upsample_nearest(&x, factor));
            leaky_relu_inplace(&mut x, LEAKY_SLOPE);
        }
        let mut x = self.conv_hr.forward(&x);
        leaky_relu_inplace(&mut x, LEAKY_SLOPE);
        self.conv_last.forward(&x)
    }

    pub fn forward_fmap(&self, y: &Fmap<f32>) -> Fmap<f32> {
        let feat = self.head(y);
        let mut body = self.conv_body.forward(&self.trunk(&feat));
        body.add_assign(&feat);
        self.tail(&body)
    }

    pub fn conv_body(&self, x: &Fmap<f32>) -> Fmap<f32> {
        self.conv_body.forward(x)
    }
}

/// Upscales `y` by `cfg.scale`; output is not clamped here.
pub fn rrdb_forward(y: &Image, w: &ModelWeights, cfg: &RrdbLiteConfig) -> Result<Image> {
    let net = RrdbLite::load(w, *cfg)?;
    let out = net.forward_fmap(&Fmap::from_vec(1, y.height(), y.width(), y.data().to_vec()));
    Image::new(out.w, out.h, out.data).map_err(|_| Error::Model("rrdblite produced non-finite output".into()))
}

/// Seeded weights biased toward nearest-neighbour upscaling (see
/// [`super::swinlite_init`]); dense convolutions keep a larger 0.1 gain.
pub fn rrdb_init(cfg: &RrdbLiteConfig, seed: u64) -> Result<ModelWeights> {
    cfg.validate()?;
    let f = cfg.features;
    let mut rng = Prng::new(seed);
    let mut w = ModelWeights::new();
    let gain = 0.1;
    let outer = 0.02;
    init_conv(&mut w, &mut rng, "conv_first", 1, f, 3, outer);
    for r in 0..cfg.rrdb_count {
        for b in 1..=RDBS_PER_RRDB {
            for i in 0..cfg.dense_convs {
                let (ci, co) = cfg.dense_conv_shape(i);
                init_conv(&mut w, &mut rng, &format!("body.{r}.rdb{b}.conv{}", i + 1), ci, co, 3, gain);
            }
        }
    }
    init_conv(&mut w, &mut rng, "conv_body", f, f, 3, gain * 0.1);
    for s in 0..cfg.up_factors().len() {
        init_conv(&mut w, &mut rng, &format!("conv_up{}", s + 1), f, f, 3, outer);
    }
    init_conv(&mut w, &mut rng, "conv_hr", f, f, 3, outer);
    init_conv(&mut w, &mut rng, "conv_last", f, 1, 3, outer);

    let mut names: Vec<String> = ["conv_first", "conv_hr", "conv_last"].iter().map(|n| format!("{n}.weight")).collect();
    names.extend((0..cfg.up_factors().len()).map(|s| format!("conv_up{}.weight", s + 1)));
    for name in names {
        add_center_delta(w.get_mut(&name)?.data_mut(), 3);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| 0.5 + 0.3 * ((x as f32 * 0.9).cos() * (y as f32 * 0.5).sin()))
    }

    fn fmap(img: &Image) -> Fmap<f32> {
        Fmap::from_vec(1, img.height(), img.width(), img.data().to_vec())
    }

    #[test]
    fn output_is_scale_times_input() {
        for s in [2, 3, 4] {
            let cfg = RrdbLiteConfig::new(s);
            let w = rrdb_init(&cfg, 2).unwrap();
            let out = rrdb_forward(&input(11, 7), &w, &cfg).unwrap();
            assert_eq!(out.dims(), (11 * s as usize, 7 * s as usize));
        }
    }

    #[test]
    fn zero_residual_scale_makes_trunk_identity() {
        let cfg = RrdbLiteConfig { residual_scale: 0.0, ..RrdbLiteConfig::new(2) };
        let net = RrdbLite::load(&rrdb_init(&cfg, 5).unwrap(), cfg).unwrap();
        let feat = net.head(&fmap(&input(9, 9)));
        assert_eq!(net.trunk(&feat), feat);
    }

    #[test]
    fn zeroed_dense_convs_reduce_trunk_to_scaling() {
        let cfg = RrdbLiteConfig::new(4);
        let mut w = rrdb_init(&cfg, 6).unwrap();
        w.zero_matching(&["body."]);
        let img = input(8, 6);
        let out = rrdb_forward(&img, &w, &cfg).unwrap();
        let net = RrdbLite::load(&w, cfg).unwrap();
        let feat = net.head(&fmap(&img));
        // every RDB is the identity, so each RRDB scales by (1 + beta)
        let mut trunk = feat.clone();
        for _ in 0..cfg.rrdb_count {
            let mut next = trunk.clone();
            next.add_scaled(&trunk, cfg.residual_scale);
            trunk = next;
        }
        let mut body = net.conv_body(&trunk);
        body.add_assign(&feat);
        assert_eq!(out.data(), &net.tail(&body).data[..]);
    }

    #[test]
    fn rejects_bad_residual_scale() {
        let cfg = RrdbLiteConfig { residual_scale: 1.5, ..RrdbLiteConfig::new(2) };
        assert!(cfg.validate().is_err());
    }
}
