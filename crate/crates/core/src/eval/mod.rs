//! Evaluation metrics: image quality, depth accuracy, plane recall and
//! plane segmentation agreement.

mod depth;
mod image;
mod planes;
mod segmentation;

pub use depth::{depth_metrics, DepthMetrics};
pub use image::{luma, psnr, psnr_from_mse, ssim, PSNR_CAP};
pub use planes::{default_depth_thresholds, mask_iou, plane_recall, PlaneInstance, RecallCurve};
pub use segmentation::{segmentation_metrics, SegmentationMetrics};

/// Default mask IoU for a plane to count as detected.
pub const PLANE_IOU_THRESHOLD: f64 = 0.5;
