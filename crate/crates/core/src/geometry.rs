//! Closed-form plane and camera math.

use nalgebra::{Matrix3, Vector3};

use crate::camera::{Camera, Intrinsics, RigidTransform};
use crate::error::{Error, Result};
use crate::plane::Plane;

/// Rays with `|n · K⁻¹q|` at or below this are treated as grazing the plane.
pub const EPS_DENOM: f64 = 1e-9;
/// Planes closer than this (meters) to the optical center have no usable homography.
pub const EPS_OFFSET: f64 = 1e-6;

/// Depth (z) at which the ray `K⁻¹q` meets `plane`, or `None` when the plane
/// is behind the camera or seen edge-on at this ray.
#[inline]
pub fn depth_along_ray(plane: &Plane, ray: &Vector3<f64>) -> Option<f64> {
    let denom = plane.normal().dot(ray);
    if denom.abs() <= EPS_DENOM {
        return None;
    }
    let depth = plane.offset() / denom;
    (depth > 0.0).then_some(depth)
}

/// Per-pixel plane depth `D = d / (n · K⁻¹q)` for `q = (u, v, 1)`.
///
/// Returns `None` (invisible) for grazing rays and non-positive depths.
#[inline]
pub fn plane_depth(plane: &Plane, intrinsics: &Intrinsics, u: f64, v: f64) -> Option<f64> {
    depth_along_ray(plane, &intrinsics.ray(u, v))
}

/// Re-expresses a plane after the points move by `x ↦ R x + t`.
pub fn transform_plane(plane: &Plane, transform: &RigidTransform) -> Plane {
    let normal = transform.rotation() * plane.normal();
    let offset = plane.offset() + normal.dot(transform.translation());
    // A rotated unit normal is never near zero.
    Plane::new(normal, offset).expect("rotated unit normal")
}

/// Point at `depth` along pixel `(u, v)`'s ray, in camera coordinates.
pub fn backproject(intrinsics: &Intrinsics, u: f64, v: f64, depth: f64) -> Result<Vector3<f64>> {
    if !(depth > 0.0) {
        return Err(Error::NonPositiveDepth(depth));
    }
    Ok(intrinsics.ray(u, v) * depth)
}

/// Invertible 3×3 map between homogeneous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography2D {
    matrix: Matrix3<f64>,
}

impl Homography2D {
    pub fn new(matrix: Matrix3<f64>) -> Result<Self> {
        let det = matrix.determinant();
        if !(det.abs() > 1e-12) {
            return Err(Error::Degenerate("singular homography"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    /// Maps a pixel; `None` when the image point lies at or behind infinity
    /// (non-positive homogeneous scale).
    #[inline]
    pub fn apply(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let m = &self.matrix;
        let w = m[(2, 0)] * u + m[(2, 1)] * v + m[(2, 2)];
        if !(w > 0.0) {
            return None;
        }
        let x = m[(0, 0)] * u + m[(0, 1)] * v + m[(0, 2)];
        let y = m[(1, 0)] * u + m[(1, 1)] * v + m[(1, 2)];
        Some((x / w, y / w))
    }
}

/// Plane-induced homography taking target pixels to source pixels.
///
/// `plane_in_target` is expressed in the target camera frame. With
/// `(R, t)` the motion taking target-frame points into the source frame,
/// a point `x` on the plane satisfies `nᵀx / d = 1`, so
/// `x_s = (R + t nᵀ / d) x` and the pixel map is
/// `K_s (R + t nᵀ / d) K_t⁻¹`. This is the familiar `K (R − t nᵀ / d) K⁻¹`
/// with the translation written in the opposite direction.
pub fn plane_homography(plane_in_target: &Plane, src: &Camera, tgt: &Camera) -> Result<Homography2D> {
    let d = plane_in_target.offset();
    if d.abs() <= EPS_OFFSET {
        return Err(Error::DegeneratePlane {
            offset: d,
            eps: EPS_OFFSET,
        });
    }
    let tgt_to_src = tgt.relative_to(src);
    let m = tgt_to_src.rotation()
        + tgt_to_src.translation() * plane_in_target.normal().transpose() / d;
    let h = src.intrinsics.matrix() * m * tgt.intrinsics.inverse_matrix();
    Homography2D::new(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plane(n: [f64; 3], d: f64) -> Plane {
        Plane::new(Vector3::from(n), d).unwrap()
    }

    fn cam(k: Intrinsics, pose: RigidTransform) -> Camera {
        Camera::new(k, pose, 64, 48).unwrap()
    }

    /// Backproject on the target plane, move to the source frame, project.
    fn oracle_pixel(plane_t: &Plane, src: &Camera, tgt: &Camera, u: f64, v: f64) -> Option<(f64, f64)> {
        let ray = tgt.intrinsics.ray(u, v);
        let s = plane_t.offset() / plane_t.normal().dot(&ray);
        let x_t = ray * s;
        let x_s = tgt.relative_to(src).apply(&x_t);
        src.intrinsics.project(&x_s).map(|p| (p.x, p.y))
    }

    #[test]
    fn fronto_parallel_depth_is_offset() {
        let p = plane([0.0, 0.0, 1.0], 2.0);
        let k = Intrinsics::identity();
        assert_eq!(plane_depth(&p, &k, 0.0, 0.0), Some(2.0));
        assert_eq!(plane_depth(&p, &k, 3.0, 4.0), Some(2.0));
    }

    #[test]
    fn slanted_depth_matches_ray_intersection() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = plane([s, 0.0, s], 2f64.sqrt());
        let d = plane_depth(&p, &Intrinsics::identity(), 1.0, 0.0).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let x = Vector3::new(1.0, 0.0, 1.0) * d;
        assert!(p.signed_distance(&x).abs() < 1e-12);
    }

    #[test]
    fn grazing_and_behind_are_invisible() {
        let k = Intrinsics::identity();
        assert_eq!(plane_depth(&plane([1.0, 0.0, 0.0], 1.0), &k, 0.0, 0.0), None);
        assert_eq!(plane_depth(&plane([0.0, 0.0, -1.0], 1.0), &k, 0.0, 0.0), None);
    }

    #[test]
    fn transform_examples() {
        let p = plane([0.0, 0.0, 1.0], 2.0);
        assert_eq!(transform_plane(&p, &RigidTransform::identity()), p);

        let moved = transform_plane(&p, &RigidTransform::from_translation(Vector3::new(0.0, 0.0, -1.0)));
        // Oracle: three points on z = 2 move to z = 1.
        for x in [Vector3::new(0.0, 0.0, 2.0), Vector3::new(1.0, 0.0, 2.0), Vector3::new(0.0, 1.0, 2.0)] {
            let y = x + Vector3::new(0.0, 0.0, -1.0);
            assert!(moved.signed_distance(&y).abs() < 1e-12);
        }
        assert_eq!(moved.normal(), Vector3::z());
        assert!((moved.offset() - 1.0).abs() < 1e-12);

        let rot = RigidTransform::from_axis_angle(Vector3::z(), std::f64::consts::FRAC_PI_2, Vector3::zeros());
        let r = transform_plane(&plane([1.0, 0.0, 0.0], 1.0), &rot);
        assert!((r.normal() - Vector3::y()).norm() < 1e-12);
        assert!((r.offset() - 1.0).abs() < 1e-12);
        for x in [Vector3::new(1.0, 0.0, 0.0), Vector3::new(1.0, 3.0, 0.0), Vector3::new(1.0, 0.0, -2.0)] {
            assert!(r.signed_distance(&rot.apply(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_pair_gives_identity_homography() {
        let c = cam(Intrinsics::new(300.0, 310.0, 31.5, 23.5).unwrap(), RigidTransform::identity());
        let h = plane_homography(&plane([0.2, -0.1, 1.0], 3.0), &c, &c).unwrap();
        let m = h.matrix() / h.matrix()[(2, 2)];
        assert!((m - Matrix3::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn lateral_translation_example() {
        let k = Intrinsics::identity();
        // Target sits at +1 m along x from the source: x_t = x_s + (1, 0, 0)
        // maps source points into the target frame.
        let src = cam(k, RigidTransform::identity());
        let tgt = cam(k, RigidTransform::from_translation(Vector3::new(1.0, 0.0, 0.0)));
        let p = plane([0.0, 0.0, 1.0], 2.0);
        let h = plane_homography(&p, &src, &tgt).unwrap();
        let (x, y) = h.apply(1.0, 1.0).unwrap();
        let (ox, oy) = oracle_pixel(&p, &src, &tgt, 1.0, 1.0).unwrap();
        assert!((x - 0.5).abs() < 1e-9 && (y - 1.0).abs() < 1e-9);
        assert!((x - ox).abs() < 1e-9 && (y - oy).abs() < 1e-9);
    }

    #[test]
    fn degenerate_plane_rejected() {
        let c = cam(Intrinsics::identity(), RigidTransform::identity());
        let p = plane([0.0, 0.0, 1.0], 1e-7);
        assert!(matches!(plane_homography(&p, &c, &c), Err(Error::DegeneratePlane { .. })));
    }

    #[test]
    fn backproject_examples() {
        let k = Intrinsics::identity();
        assert_eq!(backproject(&k, 0.0, 0.0, 5.0).unwrap(), Vector3::new(0.0, 0.0, 5.0));
        let k2 = Intrinsics::new(2.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(backproject(&k2, 2.0, 0.0, 4.0).unwrap(), Vector3::new(4.0, 0.0, 4.0));
        assert!(matches!(backproject(&k, 0.0, 0.0, 0.0), Err(Error::NonPositiveDepth(_))));
    }

    fn unit() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
            .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
    }

    fn rigid(max_t: f64) -> impl Strategy<Value = RigidTransform> {
        (unit(), -0.5..0.5f64, -max_t..max_t, -max_t..max_t, -max_t..max_t)
            .prop_map(|(a, ang, x, y, z)| RigidTransform::from_axis_angle(a, ang, Vector3::new(x, y, z)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn depth_lands_on_plane(n in unit(), d in 0.1..10.0f64, u in -50.0..50.0f64, v in -50.0..50.0f64) {
            let p = Plane::new(n, d).unwrap();
            let k = Intrinsics::new(40.0, 45.0, 3.0, -2.0).unwrap();
            if let Some(depth) = plane_depth(&p, &k, u, v) {
                let x = backproject(&k, u, v, depth).unwrap();
                prop_assert!(p.signed_distance(&x).abs() <= 1e-9 * (1.0 + depth));
            }
        }

        #[test]
        fn backproject_round_trip(u in -500.0..500.0f64, v in -500.0..500.0f64, depth in 0.01..100.0f64) {
            let k = Intrinsics::new(523.0, 517.0, 191.5, 127.5).unwrap();
            let x = backproject(&k, u, v, depth).unwrap();
            let p = k.project(&x).unwrap();
            prop_assert!((p.x - u).abs() <= 1e-9 && (p.y - v).abs() <= 1e-9);
        }

        #[test]
        fn transforms_compose(n in unit(), d in 0.0..10.0f64, a in rigid(2.0), b in rigid(2.0)) {
            let p = Plane::new(n, d).unwrap();
            let step = transform_plane(&transform_plane(&p, &a), &b);
            let once = transform_plane(&p, &b.compose(&a));
            prop_assert!((step.normal() - once.normal()).abs().max() <= 1e-9);
            prop_assert!((step.offset() - once.offset()).abs() <= 1e-9);
        }

        #[test]
        fn transformed_points_stay_on_plane(n in unit(), d in 0.0..10.0f64, a in rigid(2.0), s in unit()) {
            let p = Plane::new(n, d).unwrap();
            let x = p.normal() * p.offset() + (s - p.normal() * p.normal().dot(&s));
            let q = transform_plane(&p, &a);
            prop_assert!(q.signed_distance(&a.apply(&x)).abs() <= 1e-9);
        }

        #[test]
        fn fronto_parallel_iff_constant_depth(n in unit(), d in 0.5..5.0f64) {
            let p = Plane::new(n, d).unwrap();
            let k = Intrinsics::new(100.0, 100.0, 32.0, 24.0).unwrap();
            let samples: Vec<Option<f64>> = [(0.0, 0.0), (63.0, 0.0), (0.0, 47.0), (63.0, 47.0), (32.0, 24.0)]
                .iter()
                .map(|&(u, v)| plane_depth(&p, &k, u, v))
                .collect();
            let constant = samples.iter().all(|s| match (s, samples[0]) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
                _ => false,
            });
            let fronto = (p.normal() - Vector3::z()).norm() <= 1e-9;
            prop_assert_eq!(constant, fronto);
        }
    }
}
