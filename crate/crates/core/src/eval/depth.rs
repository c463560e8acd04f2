use crate::error::{Error, Result};
use crate::raster::DepthMap;

/// Standard monocular depth error record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthMetrics {
    /// Mean absolute relative error `|p − g| / g`.
    pub rel: f64,
    /// Mean `|log10 p − log10 g|`.
    pub log10: f64,
    pub rmse: f64,
    /// Fraction of pixels with `max(p/g, g/p) < 1.25`.
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Pixels valid in both maps.
    pub count: usize,
}

/// Depth metrics over pixels valid in both maps. The threshold accuracies
/// use a strict inequality, so a ratio of exactly `1.25^k` fails `a_k`.
pub fn depth_metrics(pred: &DepthMap, gt: &DepthMap) -> Result<DepthMetrics> {
    gt.raw().ensure_dims(pred.width(), pred.height())?;
    let (mut rel, mut log, mut sq) = (0.0f64, 0.0f64, 0.0f64);
    let mut hits = [0usize; 3];
    let mut n = 0usize;
    let thresholds = [1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25];
    for (&p, &g) in pred.raw().as_slice().iter().zip(gt.raw().as_slice()) {
        if !DepthMap::is_valid_value(p) || !DepthMap::is_valid_value(g) {
            continue;
        }
        n += 1;
        rel += (p - g).abs() / g;
        log += (p.log10() - g.log10()).abs();
        sq += (p - g) * (p - g);
        let ratio = (p / g).max(g / p);
        for (hit, t) in hits.iter_mut().zip(thresholds) {
            if ratio < t {
                *hit += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::NoOverlap);
    }
    let nf = n as f64;
    Ok(DepthMetrics {
        rel: rel / nf,
        log10: log / nf,
        rmse: (sq / nf).sqrt(),
        a1: hits[0] as f64 / nf,
        a2: hits[1] as f64 / nf,
        a3: hits[2] as f64 / nf,
        count: n,
    })
}
