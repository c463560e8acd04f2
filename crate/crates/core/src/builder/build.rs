use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::geometry::{backproject, transform_plane};
use crate::plane::Plane;
use crate::raster::{AlphaMap, DepthMap, LabelMap, Mask, Raster, RgbImage};
use crate::smpi::{Proxy, Smpi, StructureClass, DEFAULT_MASK_THRESHOLD};

use super::fit::fit_plane;

/// Alpha given to the one-pixel ring around a feathered mask.
pub const FEATHER_ALPHA: f32 = 0.25;

/// Ground truth for one view: image, metric depth, disjoint plane masks.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGT {
    pub image: RgbImage,
    pub depth: DepthMap,
    pub plane_masks: Vec<Mask>,
    pub camera: Camera,
}

impl SceneGT {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.camera.width, self.camera.height);
        self.image.ensure_dims(w, h)?;
        self.depth.raw().ensure_dims(w, h)?;
        let mut owner = Raster::filled(w, h, usize::MAX);
        for (i, m) in self.plane_masks.iter().enumerate() {
            m.ensure_dims(w, h)?;
            for (u, v, &inside) in m.enumerate() {
                if !inside {
                    continue;
                }
                if self.depth.get(u, v).is_none() {
                    return Err(Error::InvalidScene(format!(
                        "plane mask {i} covers pixel ({u}, {v}) without valid depth"
                    )));
                }
                let o = owner.get_mut(u, v);
                if *o != usize::MAX {
                    return Err(Error::InvalidScene(format!(
                        "plane masks {} and {i} overlap at ({u}, {v})",
                        *o
                    )));
                }
                *o = i;
            }
        }
        Ok(())
    }

    /// Label raster: `i + 1` for pixels of plane `i`, `0` elsewhere.
    pub fn plane_labels(&self) -> LabelMap {
        let mut labels = Raster::filled(self.camera.width, self.camera.height, 0u32);
        for (i, m) in self.plane_masks.iter().enumerate() {
            for (slot, &inside) in labels.as_mut_slice().iter_mut().zip(m.as_slice()) {
                if inside {
                    *slot = i as u32 + 1;
                }
            }
        }
        labels
    }
}

/// How the depth range of non-planar pixels is cut into layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinSpacing {
    /// Equal steps in depth.
    #[default]
    Depth,
    /// Equal steps in inverse depth.
    Disparity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub nonplanar_layers: usize,
    pub spacing: BinSpacing,
    pub mask_threshold: f32,
    /// Extend each planar layer by a one-pixel ring at [`FEATHER_ALPHA`].
    pub feather: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            nonplanar_layers: 8,
            spacing: BinSpacing::Depth,
            mask_threshold: DEFAULT_MASK_THRESHOLD,
            feather: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltSmpi {
    pub smpi: Smpi,
    /// Plane-fit RMS residual per planar proxy, meters.
    pub fit_residuals: Vec<f64>,
}

/// Depth bins over `[lo, hi]`: assignment function and layer depths.
#[derive(Debug, Clone, Copy)]
struct Bins {
    lo: f64,
    hi: f64,
    count: usize,
    spacing: BinSpacing,
}

impl Bins {
    fn coord(&self, d: f64) -> f64 {
        match self.spacing {
            BinSpacing::Depth => d,
            BinSpacing::Disparity => -1.0 / d,
        }
    }

    fn index(&self, d: f64) -> usize {
        let (a, b) = (self.coord(self.lo), self.coord(self.hi));
        if !(b > a) {
            return 0;
        }
        let t = (self.coord(d) - a) / (b - a);
        ((t * self.count as f64).floor().max(0.0) as usize).min(self.count - 1)
    }

    fn center(&self, k: usize) -> f64 {
        let (a, b) = (self.coord(self.lo), self.coord(self.hi));
        let c = a + (b - a) * (k as f64 + 0.5) / self.count as f64;
        match self.spacing {
            BinSpacing::Depth => c,
            BinSpacing::Disparity => -1.0 / c,
        }
    }
}

fn masked_layer(image: &RgbImage, mask: &Mask, feather: bool) -> (RgbImage, AlphaMap) {
    let (w, h) = image.dims();
    let mut color = Raster::from_fn(w, h, |u, v| if *mask.get(u, v) { *image.get(u, v) } else { [0.0; 3] });
    let mut alpha = mask.map(|&m| if m { 1.0f32 } else { 0.0 });
    if feather {
        for v in 0..h {
            for u in 0..w {
                if *mask.get(u, v) {
                    continue;
                }
                let neighbors = [
                    (u.wrapping_sub(1), v),
                    (u + 1, v),
                    (u, v.wrapping_sub(1)),
                    (u, v + 1),
                ];
                if let Some(&(nu, nv)) = neighbors.iter().find(|&&(nu, nv)| nu < w && nv < h && *mask.get(nu, nv)) {
                    *alpha.get_mut(u, v) = FEATHER_ALPHA;
                    *color.get_mut(u, v) = *image.get(nu, nv);
                }
            }
        }
    }
    (color, alpha)
}

/// Builds an S-MPI from ground truth in the GT camera's view.
///
/// Each plane mask becomes a planar proxy whose plane is fitted to the
/// back-projected masked pixels. Remaining valid pixels are split into
/// `nonplanar_layers` depth bins spanning their depth range, each a
/// fronto-parallel proxy at its bin center. Empty plane masks are skipped.
pub fn build_smpi(gt: &SceneGT, config: &BuildConfig) -> Result<BuiltSmpi> {
    gt.validate()?;
    if config.nonplanar_layers == 0 {
        return Err(Error::InvalidScene("nonplanar_layers must be at least 1".into()));
    }
    if gt.depth.valid_range().is_none() {
        return Err(Error::EmptyScene);
    }
    let camera = &gt.camera;
    let cam_to_world = camera.pose.inverse();
    let (w, h) = (camera.width, camera.height);

    let mut proxies = Vec::new();
    let mut fit_residuals = Vec::new();
    let mut claimed = Raster::filled(w, h, false);
    for mask in &gt.plane_masks {
        if mask.count() == 0 {
            continue;
        }
        let mut points = Vec::with_capacity(mask.count());
        for (u, v, &inside) in mask.enumerate() {
            if inside {
                let d = gt.depth.get(u, v).expect("validated");
                points.push(backproject(&camera.intrinsics, u as f64, v as f64, d)?);
                *claimed.get_mut(u, v) = true;
            }
        }
        let fit = fit_plane(&points)?;
        let world = transform_plane(&fit.plane, &cam_to_world);
        let (color, alpha) = masked_layer(&gt.image, mask, config.feather);
        proxies.push(Proxy::new(world, StructureClass::Planar, color, alpha, config.mask_threshold)?);
        fit_residuals.push(fit.rms);
    }

    let residual = Raster::from_fn(w, h, |u, v| !*claimed.get(u, v) && gt.depth.get(u, v).is_some());
    let range = residual
        .enumerate()
        .filter(|(_, _, &r)| r)
        .map(|(u, v, _)| gt.depth.get(u, v).expect("residual pixels have depth"))
        .fold(None, |acc: Option<(f64, f64)>, d| match acc {
            None => Some((d, d)),
            Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
        });
    if let Some((lo, hi)) = range {
        let bins = Bins {
            lo,
            hi,
            count: config.nonplanar_layers,
            spacing: config.spacing,
        };
        let assignment = Raster::from_fn(w, h, |u, v| {
            if *residual.get(u, v) {
                Some(bins.index(gt.depth.get(u, v).expect("residual pixels have depth")))
            } else {
                None
            }
        });
        let mut layers: Vec<(f64, usize)> = (0..bins.count).map(|k| (bins.center(k), k)).collect();
        layers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (depth, k) in layers {
            let mask = assignment.map(|a| *a == Some(k));
            let local = Plane::fronto_parallel(depth)?;
            let world = transform_plane(&local, &cam_to_world);
            let (color, alpha) = masked_layer(&gt.image, &mask, false);
            proxies.push(Proxy::new(world, StructureClass::NonPlanar, color, alpha, config.mask_threshold)?);
        }
    }

    let smpi = Smpi::new(*camera, proxies, config.mask_threshold)?;
    Ok(BuiltSmpi { smpi, fit_residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{Intrinsics, RigidTransform};
    use nalgebra::Vector3;

    fn camera(w: usize, h: usize) -> Camera {
        Camera::new(Intrinsics::from_fov(w, h, 60.0), RigidTransform::identity(), w, h).unwrap()
    }

    fn gray(w: usize, h: usize) -> RgbImage {
        Raster::from_fn(w, h, |u, v| [u as f32 / w as f32, v as f32 / h as f32, 0.5])
    }

    #[test]
    fn single_wall() {
        let cam = camera(16, 12);
        let gt = SceneGT {
            image: gray(16, 12),
            depth: DepthMap::new(Raster::filled(16, 12, 2.0)),
            plane_masks: vec![Raster::filled(16, 12, true)],
            camera: cam,
        };
        let built = build_smpi(&gt, &BuildConfig::default()).unwrap();
        assert_eq!(built.smpi.num_planar(), 1);
        assert_eq!(built.smpi.num_nonplanar(), 0);
        let p = &built.smpi.proxies()[0];
        assert!((p.plane.normal() - Vector3::z()).norm() < 1e-9);
        assert!((p.plane.offset() - 2.0).abs() < 1e-9);
        assert!(p.alpha().as_slice().iter().all(|&a| a == 1.0));
        assert!(built.fit_residuals[0] < 1e-9);
    }

    #[test]
    fn nonplanar_bins_at_uniform_centers() {
        let (w, h) = (8, 4);
        let depth = DepthMap::new(Raster::from_fn(w, h, |u, _| 1.0 + 2.0 * u as f64 / (w - 1) as f64));
        let gt = SceneGT {
            image: gray(w, h),
            depth: depth.clone(),
            plane_masks: vec![],
            camera: camera(w, h),
        };
        let config = BuildConfig {
            nonplanar_layers: 4,
            ..Default::default()
        };
        let smpi = build_smpi(&gt, &config).unwrap().smpi;
        assert_eq!(smpi.num_nonplanar(), 4);
        let offsets: Vec<f64> = smpi.proxies().iter().map(|p| p.plane.offset()).collect();
        for (o, e) in offsets.iter().zip([1.25, 1.75, 2.25, 2.75]) {
            assert!((o - e).abs() < 1e-12, "{offsets:?}");
        }
        // Every pixel lands in the bin whose interval holds its depth.
        for (u, v, &d) in depth.raw().enumerate() {
            let owners: Vec<usize> = (0..4).filter(|&k| *smpi.proxies()[k].mask().get(u, v)).collect();
            assert_eq!(owners.len(), 1);
            let k = owners[0] as f64;
            assert!(d >= 1.0 + 0.5 * k - 1e-12 && d <= 1.5 + 0.5 * k + 1e-12);
        }
    }

    #[test]
    fn disparity_spacing() {
        let (w, h) = (4, 1);
        let gt = SceneGT {
            image: gray(w, h),
            depth: DepthMap::new(Raster::from_vec(w, h, vec![1.0, 1.5, 2.0, 4.0]).unwrap()),
            plane_masks: vec![],
            camera: camera(w, h),
        };
        let config = BuildConfig {
            nonplanar_layers: 2,
            spacing: BinSpacing::Disparity,
            ..Default::default()
        };
        let smpi = build_smpi(&gt, &config).unwrap().smpi;
        // Disparity range [0.25, 1], centers 0.4375 and 0.8125.
        let offsets: Vec<f64> = smpi.proxies().iter().map(|p| p.plane.offset()).collect();
        assert!((offsets[0] - 1.0 / 0.8125).abs() < 1e-12);
        assert!((offsets[1] - 1.0 / 0.4375).abs() < 1e-12);
    }

    #[test]
    fn empty_and_invalid_scenes() {
        let gt = SceneGT {
            image: gray(4, 4),
            depth: DepthMap::invalid(4, 4),
            plane_masks: vec![],
            camera: camera(4, 4),
        };
        assert!(matches!(build_smpi(&gt, &BuildConfig::default()), Err(Error::EmptyScene)));

        let overlapping = SceneGT {
            depth: DepthMap::new(Raster::filled(4, 4, 1.0)),
            plane_masks: vec![Raster::filled(4, 4, true), Raster::filled(4, 4, true)],
            ..gt
        };
        assert!(matches!(overlapping.validate(), Err(Error::InvalidScene(_))));
    }

    #[test]
    fn feather_ring_stays_below_mask_threshold() {
        let (w, h) = (6, 6);
        let mask = Raster::from_fn(w, h, |u, _| u < 3);
        let gt = SceneGT {
            image: gray(w, h),
            depth: DepthMap::new(Raster::filled(w, h, 2.0)),
            plane_masks: vec![mask.clone()],
            camera: camera(w, h),
        };
        let config = BuildConfig {
            feather: true,
            ..Default::default()
        };
        let smpi = build_smpi(&gt, &config).unwrap().smpi;
        let p = &smpi.proxies()[0];
        assert_eq!(*p.alpha().get(3, 2), FEATHER_ALPHA);
        assert_eq!(*p.color().get(3, 2), *gt.image.get(2, 2));
        assert_eq!(*p.alpha().get(4, 2), 0.0);
        assert_eq!(p.mask(), &mask);
    }
}
