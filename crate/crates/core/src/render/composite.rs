use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{DepthMap, ImageBuffer, Raster, Rgb};

use super::ordering::{PixelOrdering, INVISIBLE};
use super::warp::WarpedLayer;

/// Accumulated opacity below which a rendered depth pixel is reported invalid.
pub const CONF_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct PixelResult {
    pub color: [f64; 3],
    pub confidence: f64,
    pub depth: f64,
}

/// Back-to-front "over" accumulation along `order`.
///
/// Unrolling the recursion gives `Σ_i x_i A_i Π_{j>i} (1 − A_j)` for color,
/// depth, and (with `x = 1`) the total weight. Invisible proxies get zero alpha.
#[inline]
pub(crate) fn composite_pixel<S>(order: &[u32], depth: &[f64], sample: S) -> PixelResult
where
    S: Fn(usize) -> (Rgb, f32),
{
    let mut out = PixelResult::default();
    for &i in order {
        let i = i as usize;
        let d = depth[i];
        if d == INVISIBLE {
            continue;
        }
        let (c, a) = sample(i);
        let a = a as f64;
        if a == 0.0 {
            continue;
        }
        let keep = 1.0 - a;
        out.color[0] = c[0] as f64 * a + keep * out.color[0];
        out.color[1] = c[1] as f64 * a + keep * out.color[1];
        out.color[2] = c[2] as f64 * a + keep * out.color[2];
        out.confidence = a + keep * out.confidence;
        out.depth = d * a + keep * out.depth;
    }
    out
}

#[inline]
pub(crate) fn depth_value(px: &PixelResult) -> f64 {
    if px.confidence >= CONF_MIN {
        px.depth
    } else {
        DepthMap::INVALID
    }
}

fn check_layers(ordering: &PixelOrdering, layers: &[WarpedLayer]) -> Result<()> {
    if layers.len() != ordering.layers() {
        return Err(Error::DimensionMismatch {
            expected: (ordering.layers(), 1),
            got: (layers.len(), 1),
        });
    }
    for l in layers {
        l.color.ensure_dims(ordering.width(), ordering.height())?;
        l.alpha.ensure_dims(ordering.width(), ordering.height())?;
    }
    Ok(())
}

fn composite_all(ordering: &PixelOrdering, layers: &[WarpedLayer]) -> Vec<PixelResult> {
    let (w, h) = ordering.dims();
    (0..w * h)
        .into_par_iter()
        .map(|p| {
            let (u, v) = (p % w, p / w);
            composite_pixel(ordering.order_at(u, v), ordering.depths_at(u, v), |i| {
                (*layers[i].color.get(u, v), *layers[i].alpha.get(u, v))
            })
        })
        .collect()
}

/// Alpha-composites target-view layers with the per-pixel order.
pub fn composite(ordering: &PixelOrdering, layers: &[WarpedLayer]) -> Result<ImageBuffer> {
    check_layers(ordering, layers)?;
    let (w, h) = ordering.dims();
    let px = composite_all(ordering, layers);
    let color = px
        .iter()
        .map(|p| p.color.map(|c| c as f32))
        .collect::<Vec<_>>();
    let confidence = px.iter().map(|p| p.confidence as f32).collect::<Vec<_>>();
    ImageBuffer::new(Raster::from_vec(w, h, color)?, Raster::from_vec(w, h, confidence)?)
}

/// Alpha-blends the per-proxy depth maps with the per-pixel order.
pub fn composite_depth(ordering: &PixelOrdering, layers: &[WarpedLayer]) -> Result<DepthMap> {
    check_layers(ordering, layers)?;
    let (w, h) = ordering.dims();
    let depth = composite_all(ordering, layers).iter().map(depth_value).collect();
    Ok(DepthMap::new(Raster::from_vec(w, h, depth)?))
}
