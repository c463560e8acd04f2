use crate::error::{Error, Result};
use crate::raster::{Mask, Raster, RgbImage};

/// Reported PSNR for identical images.
pub const PSNR_CAP: f64 = 99.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// `10 log10(1 / MSE)` over all channels of the selected pixels, for images
/// on the unit range. Identical inputs report [`PSNR_CAP`].
pub fn psnr(pred: &RgbImage, gt: &RgbImage, mask: Option<&Mask>) -> Result<f64> {
    gt.ensure_dims(pred.width(), pred.height())?;
    if let Some(m) = mask {
        m.ensure_dims(pred.width(), pred.height())?;
    }
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for (i, (p, g)) in pred.as_slice().iter().zip(gt.as_slice()).enumerate() {
        if mask.map_or(true, |m| m.as_slice()[i]) {
            for k in 0..3 {
                let e = p[k] as f64 - g[k] as f64;
                sum += e * e;
            }
            count += 3;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(psnr_from_mse(sum / count as f64))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP)
    }
}

/// Luma `0.299 R + 0.587 G + 0.114 B`.
pub fn luma(img: &RgbImage) -> Raster<f64> {
    img.map(|c| 0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64)
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, slot) in k.iter_mut().enumerate() {
        let x = i as f64 - c;
        *slot = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.map(|x| x / s)
}

/// Separable "valid" filtering: output is `(w - 10) × (h - 10)`.
fn filter_valid(img: &Raster<f64>, k: &[f64; SSIM_WINDOW]) -> Raster<f64> {
    let (w, h) = img.dims();
    let (ow, oh) = (w + 1 - SSIM_WINDOW, h + 1 - SSIM_WINDOW);
    let horiz = Raster::from_fn(ow, h, |u, v| (0..SSIM_WINDOW).map(|i| k[i] * img.get(u + i, v)).sum::<f64>());
    Raster::from_fn(ow, oh, |u, v| (0..SSIM_WINDOW).map(|i| k[i] * horiz.get(u, v + i)).sum())
}

/// Mean structural similarity of the luma channels.
///
/// 11×11 Gaussian window with σ = 1.5, constants for unit dynamic range,
/// windows fully inside the image only.
pub fn ssim(pred: &RgbImage, gt: &RgbImage) -> Result<f64> {
    gt.ensure_dims(pred.width(), pred.height())?;
    let (w, h) = pred.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: SSIM_WINDOW,
        });
    }
    let (x, y) = (luma(pred), luma(gt));
    let k = gaussian_kernel();
    let mu_x = filter_valid(&x, &k);
    let mu_y = filter_valid(&y, &k);
    let xx = filter_valid(&x.map(|a| a * a), &k);
    let yy = filter_valid(&y.map(|a| a * a), &k);
    let xy_img = Raster::from_fn(w, h, |u, v| x.get(u, v) * y.get(u, v));
    let xy = filter_valid(&xy_img, &k);

    let n = mu_x.len();
    let mut total = 0.0;
    for i in 0..n {
        let (mx, my) = (mu_x.as_slice()[i], mu_y.as_slice()[i]);
        let sx = xx.as_slice()[i] - mx * mx;
        let sy = yy.as_slice()[i] - my * my;
        let sxy = xy.as_slice()[i] - mx * my;
        let num = (2.0 * mx * my + SSIM_C1) * (2.0 * sxy + SSIM_C2);
        let den = (mx * mx + my * my + SSIM_C1) * (sx + sy + SSIM_C2);
        total += num / den;
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_image(rng: &mut StdRng, w: usize, h: usize) -> RgbImage {
        Raster::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()])
    }

    #[test]
    fn psnr_cap_and_closed_form() {
        let mut rng = StdRng::seed_from_u64(1);
        let a = random_image(&mut rng, 8, 8);
        assert_eq!(psnr(&a, &a, None).unwrap(), PSNR_CAP);
        let b = a.map(|c| c.map(|x| x + 0.1));
        let p = psnr(&a, &b, None).unwrap();
        assert!((p - 20.0).abs() < 1e-5, "{p}");
    }

    #[test]
    fn psnr_masked_and_empty_mask() {
        let a = Raster::filled(4, 4, [0.5f32; 3]);
        let mut b = a.clone();
        *b.get_mut(0, 0) = [0.0; 3];
        let mut m = Raster::filled(4, 4, true);
        *m.get_mut(0, 0) = false;
        assert_eq!(psnr(&a, &b, Some(&m)).unwrap(), PSNR_CAP);
        let none = Raster::filled(4, 4, false);
        assert!(matches!(psnr(&a, &b, Some(&none)), Err(Error::EmptyMask)));
    }

    #[test]
    fn ssim_identity_and_size() {
        let mut rng = StdRng::seed_from_u64(2);
        let a = random_image(&mut rng, 16, 13);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let small = random_image(&mut rng, 10, 20);
        assert!(matches!(ssim(&small, &small), Err(Error::ImageTooSmall { .. })));
    }

    #[test]
    fn ssim_constant_images_closed_form() {
        let (v1, v2) = (0.3f32, 0.7f32);
        let a = Raster::filled(12, 12, [v1; 3]);
        let b = Raster::filled(12, 12, [v2; 3]);
        // Luma of a gray pixel is the gray value (weights sum to one).
        let l1 = 0.299 * v1 as f64 + 0.587 * v1 as f64 + 0.114 * v1 as f64;
        let l2 = 0.299 * v2 as f64 + 0.587 * v2 as f64 + 0.114 * v2 as f64;
        let expected = (2.0 * l1 * l2 + SSIM_C1) / (l1 * l1 + l2 * l2 + SSIM_C1);
        assert!((ssim(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn ssim_negative_of_zero_mean_texture() {
        // Checkerboard around 0.5 and its negative.
        let a = Raster::from_fn(24, 24, |u, v| [if (u + v) % 2 == 0 { 0.8f32 } else { 0.2 }; 3]);
        let b = a.map(|c| c.map(|x| 1.0 - x));
        assert!(ssim(&a, &b).unwrap() <= 0.0);
    }
}
