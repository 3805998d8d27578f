//! Small U-Net discriminator producing a per-pixel realism logit.
//!
//! ```text
//! x0 = lrelu(conv0(x))                    F,  H x W
//! x1 = lrelu(conv1(x0), stride 2)         2F, H/2
//! x2 = lrelu(conv2(x1), stride 2)         4F, H/4
//! x3 = lrelu(conv3(x2))                   4F, H/4   bottleneck
//! x4 = lrelu(conv4(up2(x3))) + x1         2F, H/2
//! x5 = lrelu(conv5(up2(x4))) + x0         F,  H
//! out = conv_out(lrelu(conv6(x5)))        1,  H
//! ```

use super::ops::{init_conv, leaky_relu_inplace, upsample_nearest, Conv, Fmap};
use super::swinlite::LEAKY_SLOPE;
use super::{ModelWeights, Tensor};
use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::rng::Prng;

pub const UNET_FEATURES: usize = 16;

fn layer_shapes(f: usize) -> [(&'static str, usize, usize); 8] {
    [
        ("conv0", 1, f),
        ("conv1", f, 2 * f),
        ("conv2", 2 * f, 4 * f),
        ("conv3", 4 * f, 4 * f),
        ("conv4", 4 * f, 2 * f),
        ("conv5", 2 * f, f),
        ("conv6", f, f),
        ("conv_out", f, 1),
    ]
}

fn act(mut x: Fmap<f32>) -> Fmap<f32> {
    leaky_relu_inplace(&mut x, LEAKY_SLOPE);
    x
}

/// Logit map `[1, 1, H, W]` for an image whose sides are multiples of 4.
pub fn unet_discriminator_forward(x: &Image, w: &ModelWeights) -> Result<Tensor> {
    let (width, height) = x.dims();
    if width % 4 != 0 || height % 4 != 0 {
        return Err(Error::Shape(format!("discriminator input {width}x{height} must be divisible by 4")));
    }
    let f = w.get("conv0.bias")?.numel();
    let convs = layer_shapes(f)
        .iter()
        .map(|&(name, ci, co)| Conv::load(w, name, ci, co, 3))
        .collect::<Result<Vec<_>>>()?;
    let input = Fmap::from_vec(1, height, width, x.data().to_vec());
    let x0 = act(convs[0].forward(&input));
    let x1 = act(convs[1].forward_strided(&x0, 2));
    let x2 = act(convs[2].forward_strided(&x1, 2));
    let x3 = act(convs[3].forward(&x2));
    let mut x4 = act(convs[4].forward(&upsample_nearest(&x3, 2)));
    x4.add_assign(&x1);
    let mut x5 = act(convs[5].forward(&upsample_nearest(&x4, 2)));
    x5.add_assign(&x0);
    let out = convs[7].forward(&act(convs[6].forward(&x5)));
    Ok(Tensor::from_parts(vec![1, 1, height, width], out.data))
}

pub fn unet_init(features: usize, seed: u64) -> ModelWeights {
    let mut rng = Prng::new(seed);
    let mut w = ModelWeights::new();
    for (name, ci, co) in layer_shapes(features) {
        init_conv(&mut w, &mut rng, name, ci, co, 3, 1.0);
    }
    w
}
