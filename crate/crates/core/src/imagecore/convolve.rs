use super::{BorderMode, Image, Kernel2D};

/// Same-size 2D convolution (kernel flipped, not correlation):
///
/// `out(x, y) = sum_{i,j} k(i, j) * img(x - i + cx, y - j + cy)`
///
/// where `(cx, cy)` is the kernel centre. To correlate with `k`, convolve with
/// `k.flipped()`.
pub fn convolve2d(img: &Image, k: &Kernel2D, border: BorderMode) -> Image {
    let (w, h) = img.dims();
    let (kw, kh) = (k.width(), k.height());
    let (cx, cy) = ((kw / 2) as isize, (kh / 2) as isize);

    // Resolve border indices once per axis.
    let col_idx: Vec<Vec<Option<usize>>> = (0..w as isize)
        .map(|x| {
            (0..kw as isize)
                .map(|i| border.resolve(x - i + cx, w))
                .collect()
        })
        .collect();
    let row_idx: Vec<Vec<Option<usize>>> = (0..h as isize)
        .map(|y| {
            (0..kh as isize)
                .map(|j| border.resolve(y - j + cy, h))
                .collect()
        })
        .collect();

    let src = img.data();
    let taps = k.taps();
    let mut out = Vec::with_capacity(w * h);
    for rows in &row_idx {
        for cols in &col_idx {
            let mut acc = 0.0f64;
            for (j, sy) in rows.iter().enumerate() {
                let Some(sy) = sy else { continue };
                let line = &src[sy * w..(sy + 1) * w];
                let ktaps = &taps[j * kw..(j + 1) * kw];
                for (t, sx) in ktaps.iter().zip(cols) {
                    if let Some(sx) = sx {
                        acc += *t as f64 * line[*sx] as f64;
                    }
                }
            }
            out.push(acc as f32);
        }
    }
    Image::from_vec(w, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MODES: [BorderMode; 3] = [BorderMode::Clamp, BorderMode::Reflect, BorderMode::Zero];

    #[test]
    fn identity_kernel_is_identity_for_every_border() {
        let img = Image::from_fn(5, 4, |x, y| (x * 7 + y * 3) as f32 / 40.0);
        for mode in MODES {
            assert_eq!(convolve2d(&img, &Kernel2D::identity(), mode), img);
        }
    }

    #[test]
    fn constant_image_scales_by_kernel_sum() {
        let img = Image::filled(6, 6, 0.4);
        let k = Kernel2D::new(3, 3, vec![0.1, 0.2, 0.0, 0.3, 0.5, 0.1, 0.0, 0.2, 0.1]).unwrap();
        let out = convolve2d(&img, &k, BorderMode::Clamp);
        for &v in out.data() {
            assert!((v - 0.4 * 1.5).abs() < 1e-6);
        }
    }

    #[test]
    fn kernel_is_flipped_relative_to_correlation() {
        // impulse response of a convolution reproduces the kernel itself
        let mut data = vec![0.0; 25];
        data[12] = 1.0;
        let img = Image::new(5, 5, data).unwrap();
        let k = Kernel2D::new(3, 3, (1..=9).map(|v| v as f32).collect()).unwrap();
        let out = convolve2d(&img, &k, BorderMode::Zero);
        let patch = out.crop(1, 1, 3, 3).unwrap();
        assert_eq!(patch.data(), k.taps());
    }

    proptest! {
        #[test]
        fn convolution_is_linear(
            a in -2.0f32..2.0, b in -2.0f32..2.0,
            xs in prop::collection::vec(0.0f32..1.0, 30),
            ys in prop::collection::vec(0.0f32..1.0, 30),
            ks in prop::collection::vec(-1.0f32..1.0, 9),
            mode in 0usize..3,
        ) {
            let x = Image::new(6, 5, xs).unwrap();
            let y = Image::new(6, 5, ys).unwrap();
            let k = Kernel2D::new(3, 3, ks).unwrap();
            let mode = MODES[mode];
            let combo = Image::from_fn(6, 5, |i, j| a * x.get(i, j) + b * y.get(i, j));
            let lhs = convolve2d(&combo, &k, mode);
            let cx = convolve2d(&x, &k, mode);
            let cy = convolve2d(&y, &k, mode);
            for j in 0..5 {
                for i in 0..6 {
                    let rhs = a * cx.get(i, j) + b * cy.get(i, j);
                    let mag = (a * cx.get(i, j)).abs() + (b * cy.get(i, j)).abs();
                    prop_assert!((lhs.get(i, j) - rhs).abs() <= 1e-6 * mag.max(1.0));
                }
            }
        }
    }
}
