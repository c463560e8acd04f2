//! Built-in synthetic scenes with analytically exact ground truth.
//!
//! Scenes are sets of textured world-space planes. Depth is the nearest
//! positive ray–plane intersection over all planes, so the built-in rooms
//! must contain the camera (the nearest hit is then the room's wall).

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::{rngs::StdRng, Rng, SeedableRng};

use crate::camera::{Camera, Intrinsics, RigidTransform};
use crate::error::{Error, Result};
use crate::geometry::{depth_along_ray, transform_plane};
use crate::plane::Plane;
use crate::raster::{from_byte, to_byte, DepthMap, Raster, Rgb};
use crate::smpi::{Proxy, Smpi, StructureClass, DEFAULT_MASK_THRESHOLD};

use super::build::SceneGT;

/// Default view: 384×256 pixels, 60° horizontal field of view.
pub const DEFAULT_WIDTH: usize = 384;
pub const DEFAULT_HEIGHT: usize = 256;
pub const DEFAULT_HFOV_DEG: f64 = 60.0;

/// Smooth procedural color: `base + amp · sin(freq_k · x + phase_k)` per channel,
/// quantized to 8 bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    pub base: [f64; 3],
    pub amplitude: f64,
    pub frequency: [Vector3<f64>; 3],
    pub phase: [f64; 3],
}

impl Texture {
    pub fn shade(&self, x: &Vector3<f64>) -> Rgb {
        let mut out = [0.0f32; 3];
        for k in 0..3 {
            let c = self.base[k] + self.amplitude * (self.frequency[k].dot(x) + self.phase[k]).sin();
            out[k] = from_byte(to_byte(c as f32));
        }
        out
    }

    fn random(rng: &mut StdRng) -> Self {
        let mut freq = || {
            Vector3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
        };
        let frequency = [freq(), freq(), freq()];
        Self {
            base: [rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7)],
            amplitude: rng.gen_range(0.1..0.25),
            frequency,
            phase: [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)],
        }
    }
}

/// A textured world plane, optionally bounded by a convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub plane: Plane,
    pub texture: Texture,
    /// Corners in world coordinates, in order around the face.
    pub polygon: Option<Vec<Vector3<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneSpec {
    /// Room with floor, ceiling, back wall and two converging side walls.
    Box,
    /// Long hallway with parallel walls and an end wall.
    Corridor,
    /// `k` random planes roughly facing the camera.
    Random { planes: usize, seed: u64 },
}

impl FromStr for SceneSpec {
    type Err = Error;

    /// Accepts `box`, `corridor`, `random(k, seed)` and `random(k, seed=s)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "box" => return Ok(SceneSpec::Box),
            "corridor" => return Ok(SceneSpec::Corridor),
            _ => {}
        }
        let unknown = || Error::UnknownScene(s.to_string());
        let args = t
            .strip_prefix("random(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(unknown)?;
        let mut parts = args.split(',').map(str::trim);
        let planes = parts.next().and_then(|p| p.parse().ok()).ok_or_else(unknown)?;
        let seed_part = parts.next().ok_or_else(unknown)?;
        let seed = seed_part
            .strip_prefix("seed=")
            .unwrap_or(seed_part)
            .trim()
            .parse()
            .map_err(|_| unknown())?;
        if parts.next().is_some() || planes == 0 {
            return Err(unknown());
        }
        Ok(SceneSpec::Random { planes, seed })
    }
}

impl std::fmt::Display for SceneSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SceneSpec::Box => write!(f, "box"),
            SceneSpec::Corridor => write!(f, "corridor"),
            SceneSpec::Random { planes, seed } => write!(f, "random({planes}, seed={seed})"),
        }
    }
}

/// Camera with the default resolution and field of view at `pose`.
pub fn default_camera(pose: RigidTransform) -> Camera {
    Camera {
        intrinsics: Intrinsics::from_fov(DEFAULT_WIDTH, DEFAULT_HEIGHT, DEFAULT_HFOV_DEG),
        pose,
        width: DEFAULT_WIDTH,
        height: DEFAULT_HEIGHT,
    }
}

fn quad(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> Vec<Vector3<f64>> {
    vec![a.into(), b.into(), c.into(), d.into()]
}

/// Plane through three polygon corners, oriented away from the origin.
fn plane_of(poly: &[Vector3<f64>]) -> Plane {
    let n = (poly[1] - poly[0]).cross(&(poly[2] - poly[0]));
    Plane::new(n, n.dot(&poly[0])).expect("non-degenerate face")
}

fn texture(base: [f64; 3], freq: [[f64; 3]; 3], phase: [f64; 3]) -> Texture {
    Texture {
        base,
        amplitude: 0.2,
        frequency: freq.map(Vector3::from),
        phase,
    }
}

fn box_surfaces() -> Vec<Surface> {
    // y points down. The back is narrower than the open front, so the side
    // walls converge.
    let (zf, zb) = (-0.5, 4.0);
    let (xf, xb, y) = (2.2, 1.6, 1.2);
    let faces = [
        // floor
        (
            quad([-xf, y, zf], [xf, y, zf], [xb, y, zb], [-xb, y, zb]),
            texture([0.55, 0.4, 0.3], [[1.1, 0.0, 1.3], [0.0, 0.0, 2.1], [1.7, 0.0, -0.6]], [0.0, 1.0, 2.0]),
        ),
        // ceiling
        (
            quad([-xf, -y, zf], [-xb, -y, zb], [xb, -y, zb], [xf, -y, zf]),
            texture([0.75, 0.75, 0.7], [[0.8, 0.0, 0.9], [1.4, 0.0, 0.3], [0.2, 0.0, 1.2]], [0.5, 2.5, 1.0]),
        ),
        // back wall
        (
            quad([-xb, -y, zb], [-xb, y, zb], [xb, y, zb], [xb, -y, zb]),
            texture([0.35, 0.55, 0.6], [[2.0, 0.7, 0.0], [0.5, 1.9, 0.0], [1.3, -1.2, 0.0]], [0.3, 0.9, 2.2]),
        ),
        // left wall
        (
            quad([-xf, -y, zf], [-xf, y, zf], [-xb, y, zb], [-xb, -y, zb]),
            texture([0.6, 0.5, 0.35], [[0.0, 1.6, 0.8], [0.0, 0.4, 1.7], [0.0, 1.1, -1.0]], [1.2, 0.1, 0.7]),
        ),
        // right wall
        (
            quad([xf, -y, zf], [xb, -y, zb], [xb, y, zb], [xf, y, zf]),
            texture([0.4, 0.6, 0.45], [[0.0, 1.3, 1.1], [0.0, -0.9, 1.5], [0.0, 1.8, 0.4]], [2.0, 1.5, 0.2]),
        ),
    ];
    faces
        .into_iter()
        .map(|(poly, texture)| Surface {
            plane: plane_of(&poly),
            texture,
            polygon: Some(poly),
        })
        .collect()
}

fn corridor_surfaces() -> Vec<Surface> {
    let (zf, zb, x, y) = (-0.5, 12.0, 1.0, 1.0);
    let faces = [
        (
            quad([-x, y, zf], [x, y, zf], [x, y, zb], [-x, y, zb]),
            texture([0.5, 0.45, 0.4], [[1.5, 0.0, 0.7], [0.0, 0.0, 1.2], [1.0, 0.0, -0.9]], [0.0, 0.4, 1.1]),
        ),
        (
            quad([-x, -y, zf], [-x, -y, zb], [x, -y, zb], [x, -y, zf]),
            texture([0.8, 0.78, 0.72], [[0.9, 0.0, 0.5], [1.2, 0.0, 0.2], [0.3, 0.0, 0.8]], [1.0, 2.0, 0.3]),
        ),
        (
            quad([-x, -y, zf], [-x, y, zf], [-x, y, zb], [-x, -y, zb]),
            texture([0.45, 0.5, 0.6], [[0.0, 1.4, 0.6], [0.0, 0.5, 1.1], [0.0, 1.0, -0.8]], [0.2, 1.3, 2.4]),
        ),
        (
            quad([x, -y, zf], [x, -y, zb], [x, y, zb], [x, y, zf]),
            texture([0.6, 0.45, 0.5], [[0.0, 1.1, 0.9], [0.0, -1.3, 0.6], [0.0, 0.7, 1.0]], [1.7, 0.6, 0.9]),
        ),
        (
            quad([-x, -y, zb], [-x, y, zb], [x, y, zb], [x, -y, zb]),
            texture([0.3, 0.35, 0.55], [[2.2, 1.0, 0.0], [0.8, 2.0, 0.0], [1.5, -1.5, 0.0]], [0.9, 0.1, 1.6]),
        ),
    ];
    faces
        .into_iter()
        .map(|(poly, texture)| Surface {
            plane: plane_of(&poly),
            texture,
            polygon: Some(poly),
        })
        .collect()
}

fn random_surfaces(planes: usize, seed: u64) -> Vec<Surface> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..planes)
        .map(|_| {
            let n = Vector3::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), 1.0);
            let d = rng.gen_range(1.5..6.0) * n.norm();
            Surface {
                plane: Plane::new(n, d).expect("nonzero normal"),
                texture: Texture::random(&mut rng),
                polygon: None,
            }
        })
        .collect()
}

/// A synthetic scene: textured world planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub spec: SceneSpec,
    pub surfaces: Vec<Surface>,
}

impl Scene {
    pub fn new(spec: SceneSpec) -> Self {
        let surfaces = match spec {
            SceneSpec::Box => box_surfaces(),
            SceneSpec::Corridor => corridor_surfaces(),
            SceneSpec::Random { planes, seed } => random_surfaces(planes, seed),
        };
        Self { spec, surfaces }
    }

    /// Nearest surface and its depth along pixel `(u, v)` of `camera`.
    pub fn trace(&self, camera: &Camera, planes_cam: &[Plane], u: usize, v: usize) -> Option<(usize, f64)> {
        let ray = camera.intrinsics.ray(u as f64, v as f64);
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in planes_cam.iter().enumerate() {
            if let Some(d) = depth_along_ray(p, &ray) {
                if best.map_or(true, |(_, b)| d < b) {
                    best = Some((i, d));
                }
            }
        }
        best
    }

    /// Renders image, depth and per-surface masks from `camera`.
    ///
    /// Surfaces covering fewer than three pixels get an empty mask, and
    /// their pixels are left without depth.
    pub fn capture(&self, camera: &Camera) -> SceneGT {
        let (w, h) = (camera.width, camera.height);
        let planes_cam: Vec<Plane> = self.surfaces.iter().map(|s| transform_plane(&s.plane, &camera.pose)).collect();
        let to_world = camera.pose.inverse();
        let hits = Raster::from_fn(w, h, |u, v| self.trace(camera, &planes_cam, u, v));
        let mut counts = vec![0usize; self.surfaces.len()];
        for (i, _) in hits.as_slice().iter().flatten() {
            counts[*i] += 1;
        }
        let keep = |i: usize| counts[i] >= 3;

        let image = Raster::from_fn(w, h, |u, v| match hits.get(u, v) {
            Some((i, d)) if keep(*i) => {
                let x_cam = camera.intrinsics.ray(u as f64, v as f64) * *d;
                self.surfaces[*i].texture.shade(&to_world.apply(&x_cam))
            }
            _ => [0.0; 3],
        });
        let depth = DepthMap::new(hits.map(|hit| match hit {
            Some((i, d)) if keep(*i) => *d,
            _ => DepthMap::INVALID,
        }));
        let plane_masks = (0..self.surfaces.len())
            .map(|i| hits.map(|hit| keep(i) && matches!(hit, Some((j, _)) if *j == i)))
            .collect();
        SceneGT {
            image,
            depth,
            plane_masks,
            camera: *camera,
        }
    }

    /// The exact S-MPI of a capture: one opaque planar layer per visible
    /// surface, with the true world plane.
    pub fn exact_smpi(&self, gt: &SceneGT) -> Result<Smpi> {
        let mut proxies = Vec::new();
        for (surface, mask) in self.surfaces.iter().zip(&gt.plane_masks) {
            if mask.count() == 0 {
                continue;
            }
            let color = Raster::from_fn(gt.camera.width, gt.camera.height, |u, v| {
                if *mask.get(u, v) {
                    *gt.image.get(u, v)
                } else {
                    [0.0; 3]
                }
            });
            let alpha = mask.map(|&m| if m { 1.0f32 } else { 0.0 });
            proxies.push(Proxy::new(surface.plane, StructureClass::Planar, color, alpha, DEFAULT_MASK_THRESHOLD)?);
        }
        Smpi::new(gt.camera, proxies, DEFAULT_MASK_THRESHOLD)
    }
}

/// Ground truth and exact S-MPI of a built-in scene seen from `camera`.
pub fn synth_scene(spec: &SceneSpec, camera: &Camera) -> Result<(SceneGT, Smpi)> {
    let scene = Scene::new(*spec);
    let gt = scene.capture(camera);
    let smpi = scene.exact_smpi(&gt)?;
    Ok((gt, smpi))
}
