use crate::error::Result;
use crate::plane::Plane;
use crate::raster::{DepthMap, Mask};

/// A detected or annotated plane: its image support and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneInstance {
    pub mask: Mask,
    pub plane: Plane,
}

/// Recall per depth-error threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallCurve {
    pub thresholds: Vec<f64>,
    pub recall: Vec<f64>,
    /// `(gt, pred)` pairs kept by the one-to-one matching.
    pub matches: Vec<(usize, usize)>,
}

/// Depth-error thresholds (meters) for the default recall curve: 0 to 0.6 m.
pub fn default_depth_thresholds() -> Vec<f64> {
    (0..=12).map(|i| i as f64 * 0.05).collect()
}

pub fn mask_iou(a: &Mask, b: &Mask) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mean `|pred − gt|` over pixels in both masks where both depths are valid.
fn intersection_depth_error(a: &Mask, b: &Mask, pred: &DepthMap, gt: &DepthMap) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, (&x, &y)) in a.as_slice().iter().zip(b.as_slice()).enumerate() {
        if !(x && y) {
            continue;
        }
        let (p, g) = (pred.raw().as_slice()[i], gt.raw().as_slice()[i]);
        if DepthMap::is_valid_value(p) && DepthMap::is_valid_value(g) {
            sum += (p - g).abs();
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Plane recall at a fixed mask IoU and varying depth-error thresholds.
///
/// Candidate pairs with IoU ≥ `iou_threshold` are matched greedily by
/// descending IoU (ties by GT then prediction index), one to one. A matched
/// GT plane counts as recalled at `τ` when the mean absolute difference
/// between `pred_depth` and `gt_depth` over the mask intersection is at most
/// `τ`. Matching does not depend on `τ`, so recall is non-decreasing in it.
pub fn plane_recall(
    pred: &[PlaneInstance],
    gt: &[PlaneInstance],
    pred_depth: &DepthMap,
    gt_depth: &DepthMap,
    iou_threshold: f64,
    depth_thresholds: &[f64],
) -> Result<RecallCurve> {
    let dims = gt_depth.dims();
    pred_depth.raw().ensure_dims(dims.0, dims.1)?;
    for inst in pred.iter().chain(gt) {
        inst.mask.ensure_dims(dims.0, dims.1)?;
    }

    let mut candidates = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        for (pi, p) in pred.iter().enumerate() {
            let iou = mask_iou(&g.mask, &p.mask);
            if iou >= iou_threshold && iou > 0.0 {
                candidates.push((iou, gi, pi));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_used = vec![false; gt.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut matches = Vec::new();
    let mut errors = Vec::new();
    for (_, gi, pi) in candidates {
        if gt_used[gi] || pred_used[pi] {
            continue;
        }
        gt_used[gi] = true;
        pred_used[pi] = true;
        matches.push((gi, pi));
        errors.push(intersection_depth_error(&gt[gi].mask, &pred[pi].mask, pred_depth, gt_depth));
    }

    let recall = depth_thresholds
        .iter()
        .map(|&tau| {
            if gt.is_empty() {
                return 0.0;
            }
            let hit = errors.iter().filter(|e| e.map_or(false, |e| e <= tau)).count();
            hit as f64 / gt.len() as f64
        })
        .collect();
    Ok(RecallCurve {
        thresholds: depth_thresholds.to_vec(),
        recall,
        matches,
    })
}
