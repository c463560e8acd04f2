//! Shared fixtures for the rendering benchmarks.

use rand::{rngs::StdRng, Rng, SeedableRng};
use smpi_core::builder::{default_camera, synth_scene, SceneSpec};
use smpi_core::nalgebra::Vector3;
use smpi_core::{Camera, Plane, Proxy, Raster, RigidTransform, Smpi, StructureClass, DEFAULT_MASK_THRESHOLD};

fn target_of(reference: &Camera) -> Camera {
    let pose = RigidTransform::from_axis_angle(Vector3::new(0.2, 1.0, 0.0), 0.04, Vector3::new(0.08, -0.02, 0.03));
    reference.with_pose(pose)
}

/// The `random(12)` synthetic scene at the default 384×256 resolution:
/// opaque layers that each cover part of the frame.
pub fn synthetic_scene() -> (Smpi, Camera) {
    let reference = default_camera(RigidTransform::identity());
    let (_, smpi) = synth_scene(&SceneSpec::Random { planes: 12, seed: 7 }, &reference).expect("synthetic scene");
    (smpi, target_of(&reference))
}

/// Twelve slanted, intersecting planes whose layers cover the whole frame
/// with random translucent alpha. Every pixel composites every layer.
pub fn dense_scene() -> (Smpi, Camera) {
    let reference = default_camera(RigidTransform::identity());
    let (w, h) = (reference.width, reference.height);
    let mut rng = StdRng::seed_from_u64(12);
    let proxies = (0..12)
        .map(|_| {
            let normal = Vector3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), 1.0);
            let plane = Plane::new(normal, rng.gen_range(1.0..6.0)).expect("valid plane");
            let color = Raster::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]);
            let alpha = Raster::from_fn(w, h, |_, _| if rng.gen_bool(0.25) { 0.0 } else { rng.gen() });
            Proxy::new(plane, StructureClass::Planar, color, alpha, DEFAULT_MASK_THRESHOLD).expect("valid proxy")
        })
        .collect();
    let smpi = Smpi::new(reference, proxies, DEFAULT_MASK_THRESHOLD).expect("valid S-MPI");
    (smpi, target_of(&reference))
}
