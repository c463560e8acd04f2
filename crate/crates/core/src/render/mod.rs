//! Rendering: per-pixel back-to-front ordering, alpha compositing of color
//! and depth, and novel views through plane-induced homographies.
//!
//! [`render_novel_view`] is the fused fast path. The same result can be
//! assembled from the pieces ([`compute_ordering`], [`warp_layers`],
//! [`composite`], [`composite_depth`]); both share one per-pixel kernel and
//! agree bit for bit. Every output pixel depends only on its own inputs, so
//! results do not depend on how rows are scheduled across threads.

mod composite;
mod ordering;
mod standard;
mod warp;

use rayon::prelude::*;

use crate::camera::Camera;
use crate::plane::Plane;
use crate::raster::{DepthMap, ImageBuffer, Raster};
use crate::smpi::Smpi;

pub use composite::{composite, composite_depth, CONF_MIN};
pub use ordering::{compute_ordering, compute_ordering_for_planes, global_order, PixelOrdering, INVISIBLE};
pub use standard::{render_standard_mpi, MpiLayer};
pub use warp::{sample_bilinear, warp_layers, WarpedLayer};

use composite::{composite_pixel, depth_value};
use ordering::{depths_along, sort_back_to_front};
use warp::{prepare_warps, sample_proxy};

/// Renders color, confidence and soft depth of `smpi` seen from `target`.
///
/// Planes are moved into the target frame, each layer is pulled from the
/// reference view through its inverse homography, and the samples are
/// composited in per-pixel depth order. Proxies whose plane passes through
/// the target's optical center contribute nothing.
pub fn render_novel_view(smpi: &Smpi, target: &Camera) -> (ImageBuffer, DepthMap) {
    let (w, h) = (target.width, target.height);
    let n = smpi.len();
    let warps = prepare_warps(smpi, target);
    let planes: Vec<Plane> = warps.iter().map(|p| p.plane).collect();
    let global = global_order(&planes, &target.intrinsics, w, h);
    let proxies = smpi.proxies();

    let mut color = vec![[0.0f32; 3]; w * h];
    let mut confidence = vec![0.0f32; w * h];
    let mut depth = vec![DepthMap::INVALID; w * h];

    color
        .par_chunks_mut(w)
        .zip(confidence.par_chunks_mut(w))
        .zip(depth.par_chunks_mut(w))
        .enumerate()
        .for_each_init(
            || (vec![0.0f64; n], (0..n as u32).collect::<Vec<u32>>()),
            |(stack, order), (v, ((color_row, conf_row), depth_row))| {
                for u in 0..w {
                    let (uf, vf) = (u as f64, v as f64);
                    depths_along(&planes, &target.intrinsics.ray(uf, vf), stack);
                    match &global {
                        Some(g) => order.copy_from_slice(g),
                        // The comparison is a total order, so starting from the
                        // neighbor's (nearly sorted) order gives the same result.
                        None => sort_back_to_front(order, stack),
                    }
                    let px = composite_pixel(order, stack, |i| sample_proxy(&proxies[i], &warps[i], uf, vf, true));
                    color_row[u] = px.color.map(|c| c as f32);
                    conf_row[u] = px.confidence as f32;
                    depth_row[u] = depth_value(&px);
                }
            },
        );

    let image = ImageBuffer {
        color: Raster::from_vec(w, h, color).expect("sized above"),
        confidence: Raster::from_vec(w, h, confidence).expect("sized above"),
    };
    let depth = DepthMap::new(Raster::from_vec(w, h, depth).expect("sized above"));
    (image, depth)
}

/// Color and confidence only; see [`render_novel_view`].
pub fn render_image(smpi: &Smpi, camera: &Camera) -> ImageBuffer {
    render_novel_view(smpi, camera).0
}

/// Soft depth map: per-plane depths blended with the compositing weights.
/// Pixels with accumulated opacity below [`CONF_MIN`] are invalid.
pub fn render_depth(smpi: &Smpi, camera: &Camera) -> DepthMap {
    render_novel_view(smpi, camera).1
}
