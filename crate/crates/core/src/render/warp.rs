use rayon::prelude::*;

use crate::camera::Camera;
use crate::geometry::{depth_along_ray, plane_homography, Homography2D};
use crate::plane::Plane;
use crate::raster::{AlphaMap, Raster, Rgb, RgbImage};
use crate::smpi::{Proxy, Smpi};

/// One proxy's RGBα content resampled into a target view (straight alpha).
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedLayer {
    pub color: RgbImage,
    pub alpha: AlphaMap,
}

impl WarpedLayer {
    pub fn dims(&self) -> (usize, usize) {
        self.color.dims()
    }
}

const TRANSPARENT: (Rgb, f32) = ([0.0; 3], 0.0);

/// Bilinear RGBα lookup at a continuous source position.
///
/// Taps outside the canvas are fully transparent. Colors are interpolated
/// premultiplied so that content under zero alpha never bleeds in, and
/// returned straight.
#[inline(always)]
pub fn sample_bilinear(color: &RgbImage, alpha: &AlphaMap, x: f64, y: f64) -> (Rgb, f32) {
    let (w, h) = (color.width() as i64, color.height() as i64);
    if !(x > -1.0 && y > -1.0 && x < w as f64 && y < h as f64) {
        return TRANSPARENT;
    }
    // Both coordinates exceed -1, so truncation is the floor except on (-1, 0).
    let x0: i64 = if x < 0.0 { -1 } else { x as i64 };
    let y0: i64 = if y < 0.0 { -1 } else { y as i64 };
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    if fx == 0.0 && fy == 0.0 {
        // Exact pixel hit, only reachable in-canvas.
        let (u, v) = (x0 as usize, y0 as usize);
        return (*color.get(u, v), *alpha.get(u, v));
    }
    let wts = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
    let (cs, al) = (color.as_slice(), alpha.as_slice());
    let mut premul = [0.0f64; 3];
    let mut acc = 0.0f64;
    let mut add = |i: usize, wt: f64| {
        let a = al[i] as f64 * wt;
        let c = &cs[i];
        premul[0] += a * c[0] as f64;
        premul[1] += a * c[1] as f64;
        premul[2] += a * c[2] as f64;
        acc += a;
    };
    if x0 >= 0 && y0 >= 0 && x0 + 1 < w && y0 + 1 < h {
        let i = y0 as usize * w as usize + x0 as usize;
        let below = i + w as usize;
        add(i, wts[0]);
        add(i + 1, wts[1]);
        add(below, wts[2]);
        add(below + 1, wts[3]);
    } else {
        let taps = [(x0, y0), (x0 + 1, y0), (x0, y0 + 1), (x0 + 1, y0 + 1)];
        for ((tx, ty), wt) in taps.into_iter().zip(wts) {
            if tx >= 0 && ty >= 0 && tx < w && ty < h {
                add(ty as usize * w as usize + tx as usize, wt);
            }
        }
    }
    if acc <= 0.0 {
        return TRANSPARENT;
    }
    (
        [
            (premul[0] / acc) as f32,
            (premul[1] / acc) as f32,
            (premul[2] / acc) as f32,
        ],
        acc as f32,
    )
}

/// A proxy prepared for rendering into one target camera.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProxyWarp {
    pub plane: Plane,
    /// `None` when the plane passes through the target's optical center.
    pub homography: Option<Homography2D>,
}

pub(crate) fn prepare_warps(smpi: &Smpi, target: &Camera) -> Vec<ProxyWarp> {
    smpi.planes_in(target)
        .into_iter()
        .map(|plane| ProxyWarp {
            plane,
            homography: plane_homography(&plane, smpi.reference_camera(), target).ok(),
        })
        .collect()
}

/// RGBα of `proxy` seen at target pixel `(u, v)`; `visible` is whether the
/// plane has a positive depth there.
#[inline]
pub(crate) fn sample_proxy(proxy: &Proxy, warp: &ProxyWarp, u: f64, v: f64, visible: bool) -> (Rgb, f32) {
    if !visible {
        return TRANSPARENT;
    }
    match warp.homography.as_ref().and_then(|h| h.apply(u, v)) {
        Some((x, y)) => sample_bilinear(proxy.color(), proxy.alpha(), x, y),
        None => TRANSPARENT,
    }
}

/// Inverse-homography warp of every proxy layer into `target`.
///
/// Pixels where a plane is invisible, and proxies whose plane runs through
/// the target's optical center, come out fully transparent.
pub fn warp_layers(smpi: &Smpi, target: &Camera) -> Vec<WarpedLayer> {
    let warps = prepare_warps(smpi, target);
    let (w, h) = (target.width, target.height);
    smpi.proxies()
        .par_iter()
        .zip(warps.par_iter())
        .map(|(proxy, warp)| {
            let mut color = Raster::filled(w, h, [0.0f32; 3]);
            let mut alpha = Raster::filled(w, h, 0.0f32);
            for v in 0..h {
                for u in 0..w {
                    let ray = target.intrinsics.ray(u as f64, v as f64);
                    let visible = depth_along_ray(&warp.plane, &ray).is_some();
                    let (c, a) = sample_proxy(proxy, warp, u as f64, v as f64, visible);
                    *color.get_mut(u, v) = c;
                    *alpha.get_mut(u, v) = a;
                }
            }
            WarpedLayer { color, alpha }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer() -> (RgbImage, AlphaMap) {
        let c = Raster::from_fn(3, 2, |u, v| [u as f32 * 0.25, v as f32 * 0.5, 1.0]);
        let a = Raster::from_fn(3, 2, |u, _| if u == 2 { 0.0 } else { 1.0 });
        (c, a)
    }

    #[test]
    fn exact_hits_return_stored_values() {
        let (c, a) = layer();
        assert_eq!(sample_bilinear(&c, &a, 1.0, 1.0), ([0.25, 0.5, 1.0], 1.0));
        assert_eq!(sample_bilinear(&c, &a, 2.0, 0.0), ([0.5, 0.0, 1.0], 0.0));
    }

    #[test]
    fn outside_canvas_is_transparent() {
        let (c, a) = layer();
        assert_eq!(sample_bilinear(&c, &a, -1.0, 0.0).1, 0.0);
        assert_eq!(sample_bilinear(&c, &a, 0.0, 2.0).1, 0.0);
        assert_eq!(sample_bilinear(&c, &a, f64::NAN, 0.0).1, 0.0);
        // Half a pixel past the left edge keeps half the coverage.
        let (col, al) = sample_bilinear(&c, &a, -0.5, 0.0);
        assert!((al - 0.5).abs() < 1e-7);
        assert_eq!(col, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn transparent_taps_do_not_bleed_color() {
        let (c, a) = layer();
        let (col, al) = sample_bilinear(&c, &a, 1.5, 0.0);
        assert!((al - 0.5).abs() < 1e-7);
        assert!((col[0] - 0.25).abs() < 1e-7);
    }

    #[test]
    fn interpolates_midpoints() {
        let (c, a) = layer();
        let (col, al) = sample_bilinear(&c, &a, 0.5, 0.5);
        assert_eq!(al, 1.0);
        assert!((col[0] - 0.125).abs() < 1e-7 && (col[1] - 0.25).abs() < 1e-7);
    }
}
