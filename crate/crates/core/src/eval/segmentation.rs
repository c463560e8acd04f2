use std::collections::HashMap;

use crate::error::Result;
use crate::raster::LabelMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationMetrics {
    /// Variation of information, in nats.
    pub vi: f64,
    /// Rand index.
    pub ri: f64,
    /// Segmentation covering of the ground truth by the prediction.
    pub sc: f64,
}

struct Contingency {
    n: f64,
    joint: HashMap<(u32, u32), f64>,
    pred: HashMap<u32, f64>,
    gt: HashMap<u32, f64>,
}

fn contingency(pred: &LabelMap, gt: &LabelMap) -> Contingency {
    let mut joint = HashMap::new();
    let mut pc = HashMap::new();
    let mut gc = HashMap::new();
    for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
        *joint.entry((p, g)).or_insert(0.0) += 1.0;
        *pc.entry(p).or_insert(0.0) += 1.0;
        *gc.entry(g).or_insert(0.0) += 1.0;
    }
    Contingency {
        n: pred.len() as f64,
        joint,
        pred: pc,
        gt: gc,
    }
}

fn entropy(counts: &HashMap<u32, f64>, n: f64) -> f64 {
    counts
        .values()
        .map(|&c| {
            let p = c / n;
            -p * p.ln()
        })
        .sum()
}

/// VI, RI and SC between two label rasters. Label ids are arbitrary; only
/// the induced partitions matter.
pub fn segmentation_metrics(pred: &LabelMap, gt: &LabelMap) -> Result<SegmentationMetrics> {
    gt.ensure_dims(pred.width(), pred.height())?;
    if pred.is_empty() {
        return Ok(SegmentationMetrics {
            vi: 0.0,
            ri: 1.0,
            sc: 1.0,
        });
    }
    let c = contingency(pred, gt);
    let n = c.n;

    let h_pred = entropy(&c.pred, n);
    let h_gt = entropy(&c.gt, n);
    let mutual: f64 = c
        .joint
        .iter()
        .map(|(&(p, g), &nij)| {
            let pij = nij / n;
            pij * (nij * n / (c.pred[&p] * c.gt[&g])).ln()
        })
        .sum();
    let vi = (h_pred + h_gt - 2.0 * mutual).max(0.0);

    // Disagreeing pairs: together in exactly one partition.
    let pairs = |x: f64| x * (x - 1.0) / 2.0;
    let total = pairs(n);
    let ri = if total == 0.0 {
        1.0
    } else {
        let same_joint: f64 = c.joint.values().map(|&x| pairs(x)).sum();
        let same_pred: f64 = c.pred.values().map(|&x| pairs(x)).sum();
        let same_gt: f64 = c.gt.values().map(|&x| pairs(x)).sum();
        let disagree = same_pred + same_gt - 2.0 * same_joint;
        (total - disagree) / total
    };

    let mut sc = 0.0;
    for (&g, &size_g) in &c.gt {
        let best = c
            .joint
            .iter()
            .filter(|((_, gg), _)| *gg == g)
            .map(|(&(p, _), &inter)| inter / (size_g + c.pred[&p] - inter))
            .fold(0.0f64, f64::max);
        sc += size_g / n * best;
    }

    Ok(SegmentationMetrics { vi, ri, sc })
}
