//! The structural multiplane image and its layers.

use nalgebra::Vector3;

use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::geometry::transform_plane;
use crate::plane::Plane;
use crate::raster::{AlphaMap, Mask, RgbImage};

/// Default alpha level at which a layer pixel counts as part of the proxy mask.
pub const DEFAULT_MASK_THRESHOLD: f32 = 0.5;

const NONPLANAR_NORMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureClass {
    Planar,
    /// Fronto-parallel layer of the reference view holding non-planar content.
    NonPlanar,
}

impl StructureClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StructureClass::Planar => "planar",
            StructureClass::NonPlanar => "nonplanar",
        }
    }
}

impl std::str::FromStr for StructureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planar" => Ok(StructureClass::Planar),
            "nonplanar" => Ok(StructureClass::NonPlanar),
            other => Err(Error::CorruptManifest(format!("unknown structure class `{other}`"))),
        }
    }
}

/// One layer: a world-frame plane plus its RGBα content in the reference view.
#[derive(Debug, Clone, PartialEq)]
pub struct Proxy {
    pub plane: Plane,
    pub structure: StructureClass,
    color: RgbImage,
    alpha: AlphaMap,
    mask: Mask,
}

impl Proxy {
    /// Builds a proxy; the mask is `alpha >= mask_threshold`.
    pub fn new(
        plane: Plane,
        structure: StructureClass,
        color: RgbImage,
        alpha: AlphaMap,
        mask_threshold: f32,
    ) -> Result<Self> {
        alpha.ensure_dims(color.width(), color.height())?;
        if let Some(a) = alpha.as_slice().iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidScene(format!("alpha value {a} outside [0, 1]")));
        }
        let mask = alpha.map(|&a| a >= mask_threshold);
        Ok(Self {
            plane,
            structure,
            color,
            alpha,
            mask,
        })
    }

    pub fn color(&self) -> &RgbImage {
        &self.color
    }

    pub fn alpha(&self) -> &AlphaMap {
        &self.alpha
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn dims(&self) -> (usize, usize) {
        self.color.dims()
    }
}

/// A scene as an ordered list of proxies: planar ones first, then non-planar.
///
/// Plane parameters live in a single world frame so that every view of the
/// scene shares them; the layer rasters are realized in the reference camera.
#[derive(Debug, Clone, PartialEq)]
pub struct Smpi {
    proxies: Vec<Proxy>,
    num_planar: usize,
    reference_camera: Camera,
    mask_threshold: f32,
}

impl Smpi {
    pub fn new(reference_camera: Camera, proxies: Vec<Proxy>, mask_threshold: f32) -> Result<Self> {
        let num_planar = proxies
            .iter()
            .take_while(|p| p.structure == StructureClass::Planar)
            .count();
        if proxies[num_planar..]
            .iter()
            .any(|p| p.structure != StructureClass::NonPlanar)
        {
            return Err(Error::InvalidScene(
                "planar proxies must precede non-planar proxies".into(),
            ));
        }
        for p in &proxies {
            p.color.ensure_dims(reference_camera.width, reference_camera.height)?;
        }
        for (i, p) in proxies[num_planar..].iter().enumerate() {
            let local = transform_plane(&p.plane, &reference_camera.pose);
            if (local.normal() - Vector3::z()).abs().max() > NONPLANAR_NORMAL_TOL {
                return Err(Error::InvalidScene(format!(
                    "non-planar proxy {} is not fronto-parallel in the reference view",
                    num_planar + i
                )));
            }
        }
        Ok(Self {
            proxies,
            num_planar,
            reference_camera,
            mask_threshold,
        })
    }

    pub fn proxies(&self) -> &[Proxy] {
        &self.proxies
    }

    pub fn len(&self) -> usize {
        self.proxies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proxies.is_empty()
    }

    pub fn num_planar(&self) -> usize {
        self.num_planar
    }

    pub fn num_nonplanar(&self) -> usize {
        self.proxies.len() - self.num_planar
    }

    pub fn reference_camera(&self) -> &Camera {
        &self.reference_camera
    }

    pub fn mask_threshold(&self) -> f32 {
        self.mask_threshold
    }

    /// `(width, height)` of the layer rasters.
    pub fn resolution(&self) -> (usize, usize) {
        (self.reference_camera.width, self.reference_camera.height)
    }

    /// Proxy planes expressed in `camera`'s frame.
    pub fn planes_in(&self, camera: &Camera) -> Vec<Plane> {
        self.proxies
            .iter()
            .map(|p| transform_plane(&p.plane, &camera.pose))
            .collect()
    }
}
