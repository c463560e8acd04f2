//! Structural multiplane images (S-MPI).
//!
//! A scene is a small set of arbitrarily posed planes, each carrying an RGBα
//! layer realized in a reference view. Because the planes may intersect, the
//! back-to-front compositing order is computed per pixel. Novel views are
//! produced by moving the planes into the target frame and pulling each
//! layer through its plane-induced homography.
//!
//! Modules:
//! - [`geometry`]: plane depth, plane transforms, homographies.
//! - [`render`]: ordering, compositing, novel-view and classic-MPI rendering.
//! - [`builder`]: S-MPI construction from ground-truth geometry and
//!   synthetic test scenes.
//! - [`fusion`]: confidence-weighted merging of several renders.
//! - [`eval`]: image, depth, plane and segmentation metrics.
//! - [`io`]: on-disk containers, depth maps, camera trajectories.

pub mod builder;
mod camera;
mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod io;
mod plane;
mod raster;
pub mod render;
mod smpi;

pub use camera::{Camera, Intrinsics, RigidTransform};
pub use error::{Error, Result};
pub use geometry::{backproject, plane_depth, plane_homography, transform_plane, Homography2D};
pub use plane::{normalize_plane, Plane};
pub use raster::{from_byte, to_byte, AlphaMap, DepthMap, ImageBuffer, LabelMap, Mask, Raster, Rgb, RgbImage};
pub use smpi::{Proxy, Smpi, StructureClass, DEFAULT_MASK_THRESHOLD};

pub use nalgebra;
