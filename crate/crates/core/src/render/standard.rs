use rayon::prelude::*;

use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::geometry::EPS_DENOM;
use crate::raster::{AlphaMap, ImageBuffer, Raster, RgbImage};

use super::warp::sample_bilinear;

/// A fronto-parallel layer of a classic MPI at `depth` in the reference frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MpiLayer {
    pub color: RgbImage,
    pub alpha: AlphaMap,
    pub depth: f64,
}

/// Renders a classic MPI (layers listed front to back) into `target`.
///
/// Each target ray is intersected directly with the planes `z = depth` of
/// the reference frame. All layers are parallel, so one back-to-front order
/// serves every pixel and no sorting or homographies are involved.
pub fn render_standard_mpi(layers: &[MpiLayer], reference: &Camera, target: &Camera) -> Result<ImageBuffer> {
    for (i, pair) in layers.windows(2).enumerate() {
        if !(pair[1].depth > pair[0].depth) {
            return Err(Error::NonMonotoneDepths { index: i + 1 });
        }
    }
    if let Some(first) = layers.first() {
        if !(first.depth > 0.0) {
            return Err(Error::NonMonotoneDepths { index: 0 });
        }
    }
    for l in layers {
        l.color.ensure_dims(reference.width, reference.height)?;
        l.alpha.ensure_dims(reference.width, reference.height)?;
    }

    let (w, h) = (target.width, target.height);
    let to_ref = target.relative_to(reference);
    let (rot, origin) = (to_ref.rotation(), to_ref.translation());
    let kr = &reference.intrinsics;

    let mut color = vec![[0.0f32; 3]; w * h];
    let mut confidence = vec![0.0f32; w * h];
    color
        .par_chunks_mut(w)
        .zip(confidence.par_chunks_mut(w))
        .enumerate()
        .for_each(|(v, (color_row, conf_row))| {
            for u in 0..w {
                // Target ray with unit z, expressed in the reference frame.
                let dir = rot * target.intrinsics.ray(u as f64, v as f64);
                let mut acc = [0.0f64; 3];
                let mut conf = 0.0f64;
                if dir.z.abs() > EPS_DENOM {
                    // Distance along the ray grows with layer depth when the
                    // ray heads away from the reference camera, shrinks otherwise.
                    let back_to_front: Box<dyn Iterator<Item = &MpiLayer>> = if dir.z > 0.0 {
                        Box::new(layers.iter().rev())
                    } else {
                        Box::new(layers.iter())
                    };
                    for layer in back_to_front {
                        let s = (layer.depth - origin.z) / dir.z;
                        if !(s > 0.0) {
                            continue;
                        }
                        let x = origin + dir * s;
                        let px = kr.fx * x.x / layer.depth + kr.cx;
                        let py = kr.fy * x.y / layer.depth + kr.cy;
                        let (c, a) = sample_bilinear(&layer.color, &layer.alpha, px, py);
                        let a = a as f64;
                        if a == 0.0 {
                            continue;
                        }
                        for k in 0..3 {
                            acc[k] = c[k] as f64 * a + (1.0 - a) * acc[k];
                        }
                        conf = a + (1.0 - a) * conf;
                    }
                }
                color_row[u] = acc.map(|c| c as f32);
                conf_row[u] = conf as f32;
            }
        });
    ImageBuffer::new(Raster::from_vec(w, h, color)?, Raster::from_vec(w, h, confidence)?)
}
