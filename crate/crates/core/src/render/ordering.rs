use std::cmp::Ordering;

use rayon::prelude::*;

use crate::camera::{Camera, Intrinsics};
use crate::geometry::{depth_along_ray, EPS_DENOM};
use crate::plane::Plane;
use crate::smpi::Smpi;

/// Sentinel stored in the depth stack for proxies invisible at a pixel.
pub const INVISIBLE: f64 = f64::NEG_INFINITY;

/// Back-to-front proxy order for every pixel, with the per-proxy depths it
/// was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelOrdering {
    width: usize,
    height: usize,
    layers: usize,
    order: Vec<u32>,
    depth: Vec<f64>,
}

impl PixelOrdering {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Number of proxies `N`.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// `σ(q)`: proxy indices, back to front.
    #[inline]
    pub fn order_at(&self, u: usize, v: usize) -> &[u32] {
        let i = (v * self.width + u) * self.layers;
        &self.order[i..i + self.layers]
    }

    /// Depth of every proxy at the pixel, indexed by proxy;
    /// [`INVISIBLE`] marks planes behind the camera or seen edge-on.
    #[inline]
    pub fn depths_at(&self, u: usize, v: usize) -> &[f64] {
        let i = (v * self.width + u) * self.layers;
        &self.depth[i..i + self.layers]
    }

    pub fn depth_of(&self, u: usize, v: usize, proxy: usize) -> Option<f64> {
        let d = self.depths_at(u, v)[proxy];
        (d != INVISIBLE).then_some(d)
    }
}

/// Back-to-front comparison: larger depth first, ties by ascending index.
/// Invisible entries carry `-inf` and therefore sort last.
#[inline]
pub(crate) fn back_to_front(depth: &[f64], a: u32, b: u32) -> Ordering {
    depth[b as usize]
        .partial_cmp(&depth[a as usize])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

/// Insertion sort; `N` is small and orders are coherent between neighbors.
#[inline]
pub(crate) fn sort_back_to_front(order: &mut [u32], depth: &[f64]) {
    for i in 1..order.len() {
        let cur = order[i];
        let mut j = i;
        while j > 0 && back_to_front(depth, order[j - 1], cur) == Ordering::Greater {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = cur;
    }
}

/// Per-proxy depths along `ray`, written into `out`.
#[inline]
pub(crate) fn depths_along(planes: &[Plane], ray: &nalgebra::Vector3<f64>, out: &mut [f64]) {
    for (slot, plane) in out.iter_mut().zip(planes) {
        *slot = depth_along_ray(plane, ray).unwrap_or(INVISIBLE);
    }
}

/// Returns a single back-to-front order valid at every pixel of the
/// `width`×`height` image, when one exists and can be certified.
///
/// For planes `i`, `j` seen along ray `r`, `D_i > D_j` iff
/// `d_i (n_j · r) − d_j (n_i · r) > 0` (both denominators positive). Both
/// this difference and the denominators are affine in the pixel
/// coordinates, so their signs over the image rectangle are fixed by the
/// four corners. A relative margin keeps rounding from flipping any
/// comparison in the interior, which makes the result identical to a
/// per-pixel sort.
pub fn global_order(planes: &[Plane], intrinsics: &Intrinsics, width: usize, height: usize) -> Option<Vec<u32>> {
    const MARGIN: f64 = 1e-7;
    let (umax, vmax) = ((width.max(1) - 1) as f64, (height.max(1) - 1) as f64);
    let corners = [
        intrinsics.ray(0.0, 0.0),
        intrinsics.ray(umax, 0.0),
        intrinsics.ray(0.0, vmax),
        intrinsics.ray(umax, vmax),
    ];
    for p in planes {
        if !(p.offset() > 0.0) {
            return None;
        }
        if corners.iter().any(|r| !(p.normal().dot(r) > 2.0 * EPS_DENOM)) {
            return None;
        }
    }
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let (pi, pj) = (&planes[i], &planes[j]);
            let mut sign = 0.0f64;
            let mut min_abs = f64::INFINITY;
            let mut max_scale = 0.0f64;
            for r in &corners {
                let a = pi.offset() * pj.normal().dot(r);
                let b = pj.offset() * pi.normal().dot(r);
                let f = a - b;
                if f == 0.0 || (sign != 0.0 && f.signum() != sign) {
                    return None;
                }
                sign = f.signum();
                min_abs = min_abs.min(f.abs());
                max_scale = max_scale.max(a.abs() + b.abs());
            }
            if !(min_abs > MARGIN * max_scale) {
                return None;
            }
        }
    }
    let center = intrinsics.ray(0.5 * umax, 0.5 * vmax);
    let mut depth = vec![0.0; planes.len()];
    depths_along(planes, &center, &mut depth);
    let mut order: Vec<u32> = (0..planes.len() as u32).collect();
    order.sort_by(|&a, &b| back_to_front(&depth, a, b));
    Some(order)
}

/// Ordering for planes already expressed in the camera frame.
///
/// With `allow_global` set, scenes with a certified global order skip the
/// per-pixel sort; the result is identical either way.
pub fn compute_ordering_for_planes(
    planes: &[Plane],
    intrinsics: &Intrinsics,
    width: usize,
    height: usize,
    allow_global: bool,
) -> PixelOrdering {
    let n = planes.len();
    let mut order = vec![0u32; width * height * n];
    let mut depth = vec![INVISIBLE; width * height * n];
    let global = if allow_global {
        global_order(planes, intrinsics, width, height)
    } else {
        None
    };
    if n > 0 {
        let row_len = width * n;
        order
            .par_chunks_mut(row_len)
            .zip(depth.par_chunks_mut(row_len))
            .enumerate()
            .for_each(|(v, (order_row, depth_row))| {
                for u in 0..width {
                    let ray = intrinsics.ray(u as f64, v as f64);
                    let d = &mut depth_row[u * n..(u + 1) * n];
                    depths_along(planes, &ray, d);
                    let o = &mut order_row[u * n..(u + 1) * n];
                    match &global {
                        Some(g) => o.copy_from_slice(g),
                        None => {
                            for (k, slot) in o.iter_mut().enumerate() {
                                *slot = k as u32;
                            }
                            sort_back_to_front(o, d);
                        }
                    }
                }
            });
    }
    PixelOrdering {
        width,
        height,
        layers: n,
        order,
        depth,
    }
}

/// `σ(q)` for every pixel of `camera`, from the proxies' planes in its frame.
pub fn compute_ordering(smpi: &Smpi, camera: &Camera) -> PixelOrdering {
    let planes = smpi.planes_in(camera);
    compute_ordering_for_planes(&planes, &camera.intrinsics, camera.width, camera.height, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn plane(n: [f64; 3], d: f64) -> Plane {
        Plane::new(Vector3::from(n), d).unwrap()
    }

    #[test]
    fn parallel_planes_share_one_order() {
        let planes = [plane([0.0, 0.0, 1.0], 1.0), plane([0.0, 0.0, 1.0], 2.0)];
        let k = Intrinsics::new(10.0, 10.0, 4.0, 4.0).unwrap();
        assert_eq!(global_order(&planes, &k, 9, 9), Some(vec![1, 0]));
        let o = compute_ordering_for_planes(&planes, &k, 9, 9, false);
        for v in 0..9 {
            for u in 0..9 {
                assert_eq!(o.order_at(u, v), &[1, 0]);
            }
        }
    }

    #[test]
    fn intersecting_planes_flip_order() {
        let a = plane([0.0, 0.0, 1.0], 2.0);
        let b = plane([0.6, 0.0, 0.8], 1.6);
        let k = Intrinsics::identity();
        // Pixels (1, 0) and (-1, 0) sit at u = 1 and u = -1; shift the
        // principal point so both are inside a 3×1 raster.
        let k = Intrinsics { cx: 1.0, ..k };
        assert!(global_order(&[a, b], &k, 3, 1).is_none());
        let o = compute_ordering_for_planes(&[a, b], &k, 3, 1, true);
        // u = 2 is x = 1: A at 2.0, B at 1.6 / 1.4.
        assert_eq!(o.order_at(2, 0), &[0, 1]);
        assert!((o.depth_of(2, 0, 1).unwrap() - 1.6 / 1.4).abs() < 1e-12);
        // u = 0 is x = -1: B at 1.6 / 0.2 = 8.
        assert_eq!(o.order_at(0, 0), &[1, 0]);
        assert!((o.depth_of(0, 0, 1).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn invisible_planes_go_last() {
        let planes = [plane([0.0, 0.0, -1.0], 1.0), plane([0.0, 0.0, 1.0], 3.0)];
        let o = compute_ordering_for_planes(&planes, &Intrinsics::identity(), 2, 2, true);
        assert_eq!(o.order_at(1, 1), &[1, 0]);
        assert_eq!(o.depth_of(1, 1, 0), None);
    }

    #[test]
    fn ties_break_by_index() {
        let p = plane([0.0, 0.0, 1.0], 2.0);
        let o = compute_ordering_for_planes(&[p, p, p], &Intrinsics::identity(), 2, 2, true);
        assert_eq!(o.order_at(0, 0), &[0, 1, 2]);
    }

    #[test]
    fn single_plane() {
        let o = compute_ordering_for_planes(&[plane([0.1, 0.2, 1.0], 2.0)], &Intrinsics::identity(), 3, 3, true);
        assert!((0..3).all(|v| (0..3).all(|u| o.order_at(u, v) == [0])));
    }
}
