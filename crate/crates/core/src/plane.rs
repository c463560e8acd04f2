use nalgebra::Vector3;

use crate::error::{Error, Result};

const MIN_NORMAL_NORM: f64 = 1e-12;

/// A plane `{x : normal · x = offset}` with unit normal and non-negative offset.
///
/// The `(n, d)` / `(-n, -d)` ambiguity is resolved by requiring `offset >= 0`;
/// planes through the origin keep the normal whose first nonzero component is
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    normal: Vector3<f64>,
    offset: f64,
}

impl Plane {
    /// Canonicalizes a raw `(normal, offset)` pair describing `normal · x = offset`.
    pub fn new(raw_normal: Vector3<f64>, raw_offset: f64) -> Result<Self> {
        let norm = raw_normal.norm();
        if !(norm > MIN_NORMAL_NORM) || !raw_offset.is_finite() {
            return Err(Error::ZeroNormal);
        }
        let mut normal = raw_normal / norm;
        let mut offset = raw_offset / norm;
        // Already-unit normals are kept bit-for-bit so canonicalization is idempotent.
        if (norm - 1.0).abs() <= f64::EPSILON {
            normal = raw_normal;
            offset = raw_offset;
        }
        let flip = if offset != 0.0 {
            offset < 0.0
        } else {
            normal
                .iter()
                .find(|c| **c != 0.0)
                .map_or(false, |c| *c < 0.0)
        };
        if flip {
            normal = -normal;
            offset = -offset;
        }
        // Avoid a signed zero offset so equal planes compare equal.
        if offset == 0.0 {
            offset = 0.0;
        }
        Ok(Self { normal, offset })
    }

    /// The fronto-parallel plane `z = depth` in its own camera frame.
    pub fn fronto_parallel(depth: f64) -> Result<Self> {
        Self::new(Vector3::z(), depth)
    }

    #[inline]
    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed distance `normal · x − offset`.
    #[inline]
    pub fn signed_distance(&self, x: &Vector3<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }

    /// Smallest angle between the two normals, in radians, ignoring orientation.
    pub fn normal_angle(&self, other: &Plane) -> f64 {
        self.normal.dot(&other.normal).abs().min(1.0).acos()
    }
}

/// Canonicalizes a raw plane equation; see [`Plane::new`].
pub fn normalize_plane(raw_normal: Vector3<f64>, raw_offset: f64) -> Result<Plane> {
    Plane::new(raw_normal, raw_offset)
}
