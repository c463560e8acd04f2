use nalgebra::{Matrix3, Rotation3, Vector2, Vector3};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = Self { fx, fy, cx, cy };
        k.validate()?;
        Ok(k)
    }

    pub fn identity() -> Self {
        Self {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
        }
    }

    /// Symmetric intrinsics for a `width`×`height` image with the given
    /// horizontal field of view.
    pub fn from_fov(width: usize, height: usize, hfov_deg: f64) -> Self {
        let f = 0.5 * width as f64 / (0.5 * hfov_deg.to_radians()).tan();
        Self {
            fx: f,
            fy: f,
            cx: 0.5 * (width as f64 - 1.0),
            cy: 0.5 * (height as f64 - 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|x| x.is_finite());
        if !finite || !(self.fx > 0.0) || !(self.fy > 0.0) {
            return Err(Error::InvalidCamera(format!(
                "focal lengths must be positive and finite: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.fx,
            0.0,
            -self.cx / self.fx,
            0.0,
            1.0 / self.fy,
            -self.cy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }

    /// `K⁻¹ (u, v, 1)`: the viewing ray through a pixel, with unit z.
    #[inline]
    pub fn ray(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Perspective projection of a camera-frame point. `None` when `z <= 0`.
    #[inline]
    pub fn project(&self, x: &Vector3<f64>) -> Option<Vector2<f64>> {
        if !(x.z > 0.0) {
            return None;
        }
        Some(Vector2::new(
            self.fx * x.x / x.z + self.cx,
            self.fy * x.y / x.z + self.cy,
        ))
    }
}

/// Rigid transform `x ↦ R x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let orth = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        let det = rotation.determinant();
        if !(orth <= ORTHONORMAL_TOL) || !((det - 1.0).abs() <= ORTHONORMAL_TOL) {
            return Err(Error::InvalidCamera(format!(
                "rotation is not a proper rotation (orthogonality error {orth:e}, det {det})"
            )));
        }
        if !translation.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidCamera("non-finite translation".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation by `angle` radians about `axis`, followed by translation `t`.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64, t: Vector3<f64>) -> Self {
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        Self {
            rotation: *r.matrix(),
            translation: t,
        }
    }

    #[inline]
    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    #[inline]
    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * x + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * first.rotation,
            translation: self.rotation * first.translation + self.translation,
        }
    }
}

/// Pinhole camera with a world→camera pose and an image size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub intrinsics: Intrinsics,
    pub pose: RigidTransform,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn new(intrinsics: Intrinsics, pose: RigidTransform, width: usize, height: usize) -> Result<Self> {
        intrinsics.validate()?;
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera(format!("empty resolution {width}x{height}")));
        }
        Ok(Self {
            intrinsics,
            pose,
            width,
            height,
        })
    }

    /// Transform taking points in `self`'s camera frame into `target`'s.
    pub fn relative_to(&self, target: &Camera) -> RigidTransform {
        target.pose.compose(&self.pose.inverse())
    }

    /// World-frame position of the optical center.
    pub fn center(&self) -> Vector3<f64> {
        -(self.pose.rotation().transpose() * self.pose.translation())
    }

    pub fn with_pose(&self, pose: RigidTransform) -> Self {
        Self { pose, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_intrinsics() {
        assert!(Intrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(Intrinsics::new(1.0, -1.0, 0.0, 0.0).is_err());
        assert!(Intrinsics::new(1.0, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn rejects_reflections_and_shears() {
        let reflect = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(reflect, Vector3::zeros()).is_err());
        let mut shear = Matrix3::identity();
        shear[(0, 1)] = 1e-6;
        assert!(RigidTransform::new(shear, Vector3::zeros()).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let a = RigidTransform::from_axis_angle(Vector3::new(0.3, 1.0, -0.2), 0.7, Vector3::new(1.0, -2.0, 0.5));
        let b = RigidTransform::from_axis_angle(Vector3::new(1.0, 0.0, 0.4), -0.3, Vector3::new(0.1, 0.2, 0.3));
        let x = Vector3::new(0.4, -1.3, 2.2);
        let ab = a.compose(&b);
        assert!((ab.apply(&x) - a.apply(&b.apply(&x))).norm() < 1e-12);
        assert!((a.inverse().apply(&a.apply(&x)) - x).norm() < 1e-12);
    }

    #[test]
    fn relative_pose_maps_between_frames() {
        let k = Intrinsics::identity();
        let a = Camera::new(k, RigidTransform::from_axis_angle(Vector3::y(), 0.2, Vector3::new(0.1, 0.0, 0.0)), 4, 4).unwrap();
        let b = Camera::new(k, RigidTransform::from_axis_angle(Vector3::x(), -0.1, Vector3::new(0.0, 0.3, 0.2)), 4, 4).unwrap();
        let world = Vector3::new(0.5, 0.25, 3.0);
        let in_a = a.pose.apply(&world);
        let in_b = b.pose.apply(&world);
        assert!((a.relative_to(&b).apply(&in_a) - in_b).norm() < 1e-12);
        assert!((a.pose.apply(&a.center())).norm() < 1e-12);
    }

    #[test]
    fn ray_projects_back() {
        let k = Intrinsics::new(500.0, 480.0, 190.5, 127.5).unwrap();
        let r = k.ray(10.0, 250.0);
        let p = k.project(&(r * 3.7)).unwrap();
        assert!((p.x - 10.0).abs() < 1e-9 && (p.y - 250.0).abs() < 1e-9);
        assert!(k.project(&Vector3::new(0.0, 0.0, -1.0)).is_none());
        assert!((k.matrix() * k.inverse_matrix() - Matrix3::identity()).abs().max() < 1e-15);
    }
}
