//! Confidence-weighted merging of renders of the same target view.
//!
//! Each render carries its accumulated compositing weight per pixel. Where
//! one input is occluded or falls off its source canvas its weight is low,
//! and the other inputs dominate the average.

use crate::error::{Error, Result};
use crate::raster::{ImageBuffer, Mask, Raster};

/// Denominator regularizer and hole threshold.
pub const MERGE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MergedView {
    /// Weighted color; confidence is the per-pixel maximum over inputs.
    pub image: ImageBuffer,
    /// Pixels whose summed confidence does not exceed [`MERGE_EPS`].
    pub holes: Mask,
}

impl MergedView {
    pub fn hole_count(&self) -> usize {
        self.holes.count()
    }
}

/// `Σ_t conf_t · color_t / (Σ_t conf_t + ε)`, confidence `max_t conf_t`.
///
/// A single input is returned unchanged. Sums run over inputs sorted by
/// `(confidence, color)` per pixel so the result does not depend on the
/// order of `renders`.
pub fn merge_views(renders: &[ImageBuffer]) -> Result<MergedView> {
    let first = renders.first().ok_or(Error::EmptyInput)?;
    let (w, h) = first.dims();
    for r in renders {
        r.color.ensure_dims(w, h)?;
        r.confidence.ensure_dims(w, h)?;
    }
    if renders.len() == 1 {
        let holes = first.confidence.map(|&c| c as f64 <= MERGE_EPS);
        return Ok(MergedView {
            image: first.clone(),
            holes,
        });
    }

    let mut color = Vec::with_capacity(w * h);
    let mut confidence = Vec::with_capacity(w * h);
    let mut holes = Vec::with_capacity(w * h);
    let mut samples = Vec::with_capacity(renders.len());
    for p in 0..w * h {
        samples.clear();
        samples.extend(
            renders
                .iter()
                .map(|r| (r.confidence.as_slice()[p], r.color.as_slice()[p])),
        );
        samples.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        }));
        let mut acc = [0.0f64; 3];
        let mut total = 0.0f64;
        let mut max_conf = 0.0f32;
        for &(c, rgb) in samples.iter() {
            let wgt = c as f64;
            total += wgt;
            max_conf = max_conf.max(c);
            for k in 0..3 {
                acc[k] += wgt * rgb[k] as f64;
            }
        }
        let norm = total + MERGE_EPS;
        color.push(acc.map(|a| (a / norm) as f32));
        confidence.push(max_conf);
        holes.push(total <= MERGE_EPS);
    }
    Ok(MergedView {
        image: ImageBuffer::new(Raster::from_vec(w, h, color)?, Raster::from_vec(w, h, confidence)?)?,
        holes: Raster::from_vec(w, h, holes)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buf(color: [f32; 3], conf: f32) -> ImageBuffer {
        ImageBuffer::new(Raster::filled(3, 2, color), Raster::filled(3, 2, conf)).unwrap()
    }

    #[test]
    fn single_input_is_copied() {
        let a = buf([0.2, 0.4, 0.6], 0.7);
        let m = merge_views(std::slice::from_ref(&a)).unwrap();
        assert_eq!(m.image, a);
        assert_eq!(m.hole_count(), 0);
    }

    #[test]
    fn identical_inputs_reproduce_themselves() {
        let a = buf([0.5, 0.25, 1.0], 1.0);
        let m = merge_views(&[a.clone(), a.clone()]).unwrap();
        for (x, y) in m.image.color.as_slice().iter().zip(a.color.as_slice()) {
            for k in 0..3 {
                assert!((x[k] - y[k]).abs() < 1e-6);
            }
        }
        assert_eq!(m.image.confidence, a.confidence);
    }

    #[test]
    fn zero_confidence_input_is_ignored() {
        let m = merge_views(&[buf([0.9, 0.9, 0.9], 0.0), buf([0.1, 0.2, 0.3], 0.8)]).unwrap();
        let c = m.image.color.get(1, 1);
        // c · 0.8 / (0.8 + 1e-6)
        assert!((c[0] - 0.1).abs() < 1e-6 && (c[2] - 0.3).abs() < 1e-6);
        assert_eq!(*m.image.confidence.get(0, 0), 0.8);
    }

    #[test]
    fn holes_where_nobody_sees() {
        let m = merge_views(&[buf([0.9; 3], 0.0), buf([0.1; 3], 0.0)]).unwrap();
        assert_eq!(m.hole_count(), 6);
        assert_eq!(*m.image.color.get(0, 0), [0.0; 3]);
    }

    #[test]
    fn errors() {
        assert!(matches!(merge_views(&[]), Err(Error::EmptyInput)));
        let odd = ImageBuffer::blank(2, 2);
        assert!(matches!(
            merge_views(&[buf([0.0; 3], 1.0), odd]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn order_invariant_and_convex() {
        use rand::{rngs::StdRng, Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        let views: Vec<ImageBuffer> = (0..4)
            .map(|_| {
                let color = Raster::from_fn(5, 4, |_, _| [rng.gen(), rng.gen(), rng.gen()]);
                let conf = Raster::from_fn(5, 4, |_, _| if rng.gen_bool(0.3) { 0.0 } else { rng.gen() });
                ImageBuffer::new(color, conf).unwrap()
            })
            .collect();
        let forward = merge_views(&views).unwrap();
        let mut rev = views.clone();
        rev.reverse();
        rev.swap(0, 2);
        assert_eq!(forward, merge_views(&rev).unwrap());
        for p in 0..20 {
            let out = forward.image.color.as_slice()[p];
            let live: Vec<_> = views.iter().filter(|v| v.confidence.as_slice()[p] > 0.0).collect();
            for k in 0..3 {
                let lo = live.iter().map(|v| v.color.as_slice()[p][k]).fold(f32::INFINITY, f32::min);
                let hi = live.iter().map(|v| v.color.as_slice()[p][k]).fold(f32::NEG_INFINITY, f32::max);
                if live.is_empty() {
                    assert_eq!(out[k], 0.0);
                } else {
                    // The ε in the denominator shrinks the hull toward zero by Σw / (Σw + ε).
                    let total: f64 = live.iter().map(|v| v.confidence.as_slice()[p] as f64).sum();
                    let shrink = (total / (total + MERGE_EPS)) as f32;
                    assert!(out[k] <= hi + 1e-6 && out[k] >= lo * shrink - 1e-6, "{out:?}");
                }
            }
        }
    }
}
