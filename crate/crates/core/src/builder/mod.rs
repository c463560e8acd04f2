//! S-MPI construction from ground-truth geometry, and synthetic scenes.

mod build;
mod fit;
mod synth;

pub use build::{build_smpi, BinSpacing, BuildConfig, BuiltSmpi, SceneGT, FEATHER_ALPHA};
pub use fit::{fit_plane, PlaneFit};
pub use synth::{
    default_camera, synth_scene, Scene, SceneSpec, Surface, Texture, DEFAULT_HEIGHT, DEFAULT_HFOV_DEG,
    DEFAULT_WIDTH,
};
