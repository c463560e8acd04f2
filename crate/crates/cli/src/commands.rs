use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use smpi_core::builder::{build_smpi, synth_scene, BinSpacing, BuildConfig, SceneGT, SceneSpec, DEFAULT_HFOV_DEG};
use smpi_core::eval::{
    default_depth_thresholds, depth_metrics, plane_recall, segmentation_metrics, ssim, PlaneInstance, PLANE_IOU_THRESHOLD,
};
use smpi_core::fusion::merge_views;
use smpi_core::io;
use smpi_core::render::{render_depth, render_novel_view};
use smpi_core::{Camera, ImageBuffer, Intrinsics, RigidTransform, Smpi, StructureClass};

use crate::{Command, EvalKind};

const SHEET_COLUMNS: usize = 4;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            scene,
            seed,
            out,
            width,
            height,
        } => synth(&scene, seed, &out, width, height),
        Command::Build {
            image,
            depth,
            masks,
            camera,
            nonplanar_layers,
            disparity,
            feather,
            mask_threshold,
            out,
        } => {
            let config = BuildConfig {
                nonplanar_layers,
                spacing: if disparity { BinSpacing::Disparity } else { BinSpacing::Depth },
                mask_threshold,
                feather,
            };
            build(&image, &depth, &masks, &camera, &config, &out)
        }
        Command::Render {
            smpi,
            trajectory,
            out,
            depth,
            float,
            width,
            height,
        } => render(&smpi, &trajectory, &out, depth, float, width, height),
        Command::Merge { renders, out } => merge(&renders, &out),
        Command::Eval {
            pred,
            gt,
            kind,
            report,
            curve,
        } => eval(&pred, &gt, kind, &report, curve),
    }
}

/// 2 for usage errors, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<smpi_core::Error>(), Some(smpi_core::Error::UnknownScene(_))));
    if usage {
        2
    } else {
        1
    }
}

fn parse_scene(name: &str, seed: u64) -> smpi_core::Result<SceneSpec> {
    let t = name.trim();
    match t.strip_prefix("random(").and_then(|r| r.strip_suffix(')')) {
        Some(args) if !args.contains(',') => format!("random({args}, seed={seed})").parse(),
        _ => t.parse(),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn synth(scene: &str, seed: u64, out: &Path, width: usize, height: usize) -> Result<()> {
    let spec = parse_scene(scene, seed)?;
    let intrinsics = Intrinsics::from_fov(width, height, DEFAULT_HFOV_DEG);
    let camera = Camera::new(intrinsics, RigidTransform::identity(), width, height)?;
    let (gt, smpi) = synth_scene(&spec, &camera)?;

    create_dir(out)?;
    io::save_image(&gt.image, out.join("image.png"))?;
    io::save_depth(&gt.depth, out.join("depth.png"))?;
    io::save_depth(&gt.depth, out.join("depth.depth"))?;
    io::save_labels(&gt.plane_labels(), out.join("labels.png"))?;
    let masks = out.join("masks");
    create_dir(&masks)?;
    for (i, mask) in gt.plane_masks.iter().enumerate() {
        io::save_labels(&mask.map(|&m| m as u32 * 65535), masks.join(format!("mask_{i:03}.png")))?;
    }
    io::save_trajectory(&[camera], out.join("camera.txt"))?;
    io::save_smpi(&smpi, out.join("smpi"))?;

    println!("scene {spec}");
    println!("resolution {width} {height}");
    println!("surfaces {}", gt.plane_masks.len());
    println!("layers {}", smpi.len());
    Ok(())
}

fn build(
    image: &Path,
    depth: &Path,
    masks: &[PathBuf],
    camera: &Path,
    config: &BuildConfig,
    out: &Path,
) -> Result<()> {
    let image = io::load_image(image).with_context(|| format!("loading {}", image.display()))?;
    let (w, h) = image.dims();
    let depth = io::load_depth(depth).with_context(|| format!("loading {}", depth.display()))?;
    let plane_masks = masks
        .iter()
        .map(|p| io::load_mask(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let cameras = io::load_trajectory(camera, w, h).with_context(|| format!("loading {}", camera.display()))?;
    let Some(&camera) = cameras.first() else {
        bail!("{} contains no camera", camera.display());
    };
    let gt = SceneGT {
        image,
        depth,
        plane_masks,
        camera,
    };
    let built = build_smpi(&gt, config)?;
    io::save_smpi(&built.smpi, out)?;

    println!("planar {}", built.smpi.num_planar());
    println!("nonplanar {}", built.smpi.num_nonplanar());
    for (i, r) in built.fit_residuals.iter().enumerate() {
        println!("residual {i} {r:e}");
    }
    Ok(())
}

fn render(
    smpi: &Path,
    trajectory: &Path,
    out: &Path,
    with_depth: bool,
    float: bool,
    width: usize,
    height: usize,
) -> Result<()> {
    let smpi = io::load_smpi(smpi).with_context(|| format!("loading {}", smpi.display()))?;
    let cameras = io::load_trajectory(trajectory, width, height)
        .with_context(|| format!("loading {}", trajectory.display()))?;
    if cameras.is_empty() {
        bail!("{} contains no camera", trajectory.display());
    }
    create_dir(out)?;
    let mut frames = Vec::with_capacity(cameras.len());
    for (i, camera) in cameras.iter().enumerate() {
        let (img, depth) = render_novel_view(&smpi, camera);
        io::save_image_buffer(&img, out.join(format!("frame_{i:03}.png")))?;
        if float {
            io::save_image_buffer(&img, out.join(format!("frame_{i:03}.buf")))?;
        }
        if with_depth {
            io::save_depth(&depth, out.join(format!("depth_{i:03}.png")))?;
            if float {
                io::save_depth(&depth, out.join(format!("depth_{i:03}.depth")))?;
            }
        }
        frames.push(img);
    }
    io::save_image_buffer(&contact_sheet(&frames), out.join("contact_sheet.png"))?;
    println!("frames {}", frames.len());
    println!("layers {}", smpi.len());
    Ok(())
}

/// Frames tiled row-major, at most [`SHEET_COLUMNS`] per row.
fn contact_sheet(frames: &[ImageBuffer]) -> ImageBuffer {
    let (w, h) = frames[0].dims();
    let cols = frames.len().min(SHEET_COLUMNS);
    let rows = frames.len().div_ceil(cols);
    let mut sheet = ImageBuffer::blank(w * cols, h * rows);
    for (i, frame) in frames.iter().enumerate() {
        let (x0, y0) = ((i % cols) * w, (i / cols) * h);
        for (u, v, c) in frame.color.enumerate() {
            *sheet.color.get_mut(x0 + u, y0 + v) = *c;
            *sheet.confidence.get_mut(x0 + u, y0 + v) = *frame.confidence.get(u, v);
        }
    }
    sheet
}

fn merge(renders: &[PathBuf], out: &Path) -> Result<()> {
    let inputs = renders
        .iter()
        .map(|p| io::load_image_buffer(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let merged = merge_views(&inputs)?;
    io::save_image_buffer(&merged.image, out)?;
    println!("inputs {}", inputs.len());
    println!("holes {}", merged.hole_count());
    Ok(())
}

fn eval(pred: &Path, gt: &Path, kind: EvalKind, report: &Path, curve: Option<PathBuf>) -> Result<()> {
    let mut text = String::new();
    match kind {
        EvalKind::Image => {
            let p = io::load_image(pred)?;
            let g = io::load_image(gt)?;
            writeln!(text, "psnr {}", smpi_core::eval::psnr(&p, &g, None)?)?;
            writeln!(text, "ssim {}", ssim(&p, &g)?)?;
        }
        EvalKind::Depth => {
            let m = depth_metrics(&io::load_depth(pred)?, &io::load_depth(gt)?)?;
            for (key, value) in [
                ("rel", m.rel),
                ("log10", m.log10),
                ("rmse", m.rmse),
                ("a1", m.a1),
                ("a2", m.a2),
                ("a3", m.a3),
            ] {
                writeln!(text, "{key} {value}")?;
            }
            writeln!(text, "count {}", m.count)?;
        }
        EvalKind::Seg => {
            let m = segmentation_metrics(&io::load_labels(pred)?, &io::load_labels(gt)?)?;
            writeln!(text, "vi {}", m.vi)?;
            writeln!(text, "ri {}", m.ri)?;
            writeln!(text, "sc {}", m.sc)?;
        }
        EvalKind::Planes => {
            let p = io::load_smpi(pred).with_context(|| format!("loading {}", pred.display()))?;
            let g = io::load_smpi(gt).with_context(|| format!("loading {}", gt.display()))?;
            let camera = g.reference_camera();
            let result = plane_recall(
                &planar_instances(&p),
                &planar_instances(&g),
                &render_depth(&p, camera),
                &render_depth(&g, camera),
                PLANE_IOU_THRESHOLD,
                &default_depth_thresholds(),
            )?;
            writeln!(text, "gt_planes {}", g.num_planar())?;
            writeln!(text, "pred_planes {}", p.num_planar())?;
            writeln!(text, "matches {}", result.matches.len())?;
            let mut data = String::new();
            for (tau, recall) in result.thresholds.iter().zip(&result.recall) {
                writeln!(text, "recall@{tau} {recall}")?;
                writeln!(data, "{tau} {recall}")?;
            }
            let curve = curve.unwrap_or_else(|| report.with_extension("curve"));
            fs::write(&curve, data).with_context(|| format!("writing {}", curve.display()))?;
        }
    }
    fs::write(report, &text).with_context(|| format!("writing {}", report.display()))?;
    print!("{text}");
    Ok(())
}

fn planar_instances(smpi: &Smpi) -> Vec<PlaneInstance> {
    smpi.proxies()
        .iter()
        .filter(|p| p.structure == StructureClass::Planar)
        .map(|p| PlaneInstance {
            mask: p.mask().clone(),
            plane: p.plane,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use smpi_core::Raster;

    #[test]
    fn random_scene_takes_seed_flag() {
        assert_eq!(parse_scene("random(3)", 7).unwrap(), SceneSpec::Random { planes: 3, seed: 7 });
        assert_eq!(parse_scene("random(3, seed=2)", 7).unwrap(), SceneSpec::Random { planes: 3, seed: 2 });
        assert_eq!(parse_scene("box", 7).unwrap(), SceneSpec::Box);
        assert!(parse_scene("nope", 0).is_err());
    }

    #[test]
    fn unknown_scene_is_a_usage_error() {
        let err = anyhow::Error::from(parse_scene("nope", 0).unwrap_err()).context("synth");
        assert_eq!(exit_code(&err), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("boom")), 1);
    }

    #[test]
    fn contact_sheet_wraps_after_four_columns() {
        let frames: Vec<ImageBuffer> = (0..5)
            .map(|i| ImageBuffer::new(Raster::filled(3, 2, [i as f32 / 10.0; 3]), Raster::filled(3, 2, 1.0)).unwrap())
            .collect();
        let sheet = contact_sheet(&frames);
        assert_eq!(sheet.dims(), (12, 4));
        assert_eq!(sheet.color.get(9, 1)[0], 0.3);
        assert_eq!(sheet.color.get(1, 3)[0], 0.4);
        assert_eq!(*sheet.confidence.get(5, 3), 0.0);
    }
}
