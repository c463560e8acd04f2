use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{Camera, Intrinsics, RigidTransform};
use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::raster::{from_byte, to_byte, Raster};
use crate::smpi::{Proxy, Smpi, StructureClass};

use super::{read_f32_le, write_f32_le};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";

/// How alpha is stored next to the 8-bit layer rasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaPrecision {
    /// Float sidecar only when some alpha is not an exact 8-bit level.
    #[default]
    Auto,
    Byte,
    Float,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    width: usize,
    height: usize,
    mask_threshold: f32,
    camera: CameraEntry,
    #[serde(default, rename = "proxy")]
    proxies: Vec<ProxyEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CameraEntry {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    /// World→camera rotation, row-major.
    rotation: [f64; 9],
    translation: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct ProxyEntry {
    normal: [f64; 3],
    offset: f64,
    structure: String,
    layer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<String>,
}

impl CameraEntry {
    fn from_camera(c: &Camera) -> Self {
        let r = c.pose.rotation();
        let t = c.pose.translation();
        Self {
            fx: c.intrinsics.fx,
            fy: c.intrinsics.fy,
            cx: c.intrinsics.cx,
            cy: c.intrinsics.cy,
            rotation: std::array::from_fn(|i| r[(i / 3, i % 3)]),
            translation: [t.x, t.y, t.z],
        }
    }

    fn to_camera(&self, width: usize, height: usize) -> Result<Camera> {
        let k = Intrinsics::new(self.fx, self.fy, self.cx, self.cy)?;
        let pose = RigidTransform::new(Matrix3::from_row_slice(&self.rotation), Vector3::from(self.translation))?;
        Camera::new(k, pose, width, height)
    }
}

fn corrupt(e: impl std::fmt::Display) -> Error {
    Error::CorruptManifest(e.to_string())
}

fn layer_name(i: usize) -> String {
    format!("layer_{i:03}.png")
}

fn alpha_name(i: usize) -> String {
    format!("layer_{i:03}.alpha")
}

/// Writes `smpi` into directory `dir` (created if needed) with automatic
/// alpha precision.
pub fn save_smpi(smpi: &Smpi, dir: impl AsRef<Path>) -> Result<()> {
    save_smpi_with(smpi, dir, AlphaPrecision::Auto)
}

pub fn save_smpi_with(smpi: &Smpi, dir: impl AsRef<Path>, precision: AlphaPrecision) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (width, height) = smpi.resolution();
    let mut entries = Vec::with_capacity(smpi.len());
    for (i, proxy) in smpi.proxies().iter().enumerate() {
        let mut rgba = Vec::with_capacity(width * height * 4);
        for (c, &a) in proxy.color().as_slice().iter().zip(proxy.alpha().as_slice()) {
            rgba.extend([to_byte(c[0]), to_byte(c[1]), to_byte(c[2]), to_byte(a)]);
        }
        image::save_buffer(
            dir.join(layer_name(i)),
            &rgba,
            width as u32,
            height as u32,
            image::ExtendedColorType::Rgba8,
        )?;
        let float_alpha = match precision {
            AlphaPrecision::Byte => false,
            AlphaPrecision::Float => true,
            AlphaPrecision::Auto => proxy.alpha().as_slice().iter().any(|&a| from_byte(to_byte(a)) != a),
        };
        let alpha = if float_alpha {
            let name = alpha_name(i);
            write_f32_le(&dir.join(&name), width, height, proxy.alpha().as_slice())?;
            Some(name)
        } else {
            None
        };
        entries.push(ProxyEntry {
            normal: proxy.plane.normal().into(),
            offset: proxy.plane.offset(),
            structure: proxy.structure.as_str().to_string(),
            layer: layer_name(i),
            alpha,
        });
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        width,
        height,
        mask_threshold: smpi.mask_threshold(),
        camera: CameraEntry::from_camera(smpi.reference_camera()),
        proxies: entries,
    };
    let text = toml::to_string(&manifest).map_err(corrupt)?;
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

fn read_layer(dir: &Path, index: usize, name: &str) -> Result<image::RgbaImage> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(Error::MissingLayer { index, path });
    }
    Ok(image::open(&path)?.into_rgba8())
}

/// Reads a container written by [`save_smpi`].
pub fn load_smpi(dir: impl AsRef<Path>) -> Result<Smpi> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let raw: toml::Value = text.parse().map_err(corrupt)?;
    let version = raw
        .get("version")
        .and_then(toml::Value::as_integer)
        .ok_or_else(|| corrupt("missing integer `version`"))?;
    if version != i64::from(MANIFEST_VERSION) {
        return Err(Error::VersionMismatch {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            supported: MANIFEST_VERSION,
        });
    }
    let manifest: Manifest = raw.try_into().map_err(corrupt)?;
    let (w, h) = (manifest.width, manifest.height);
    let camera = manifest.camera.to_camera(w, h)?;

    let mut proxies = Vec::with_capacity(manifest.proxies.len());
    for (i, entry) in manifest.proxies.iter().enumerate() {
        let plane = Plane::new(Vector3::from(entry.normal), entry.offset)
            .map_err(|e| corrupt(format!("proxy {i}: {e}")))?;
        let structure: StructureClass = entry.structure.parse()?;
        let layer = read_layer(dir, i, &entry.layer)?;
        if (layer.width() as usize, layer.height() as usize) != (w, h) {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                got: (layer.width() as usize, layer.height() as usize),
            });
        }
        let pixels: Vec<_> = layer.pixels().map(|p| p.0).collect();
        let color = Raster::from_vec(w, h, pixels.iter().map(|p| [from_byte(p[0]), from_byte(p[1]), from_byte(p[2])]).collect())?;
        let alpha = match &entry.alpha {
            Some(name) => {
                let path: PathBuf = dir.join(name);
                if !path.is_file() {
                    return Err(Error::MissingLayer { index: i, path });
                }
                read_f32_le(&path, w, h)?
            }
            None => Raster::from_vec(w, h, pixels.iter().map(|p| from_byte(p[3])).collect())?,
        };
        proxies.push(Proxy::new(plane, structure, color, alpha, manifest.mask_threshold)?);
    }
    Smpi::new(camera, proxies, manifest.mask_threshold)
}
