//! `smpi`: build, render, merge and evaluate structural multiplane images.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "smpi", version, about = "Structural multiplane image toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write ground truth and the exact S-MPI of a built-in scene.
    Synth {
        /// `box`, `corridor`, `random(K)` or `random(K, seed=S)`.
        #[arg(long)]
        scene: String,
        /// Seed for `random(K)` scenes without an explicit seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = smpi_core::builder::DEFAULT_WIDTH)]
        width: usize,
        #[arg(long, default_value_t = smpi_core::builder::DEFAULT_HEIGHT)]
        height: usize,
    },
    /// Build an S-MPI container from an image, depth map and plane masks.
    Build {
        #[arg(long)]
        image: PathBuf,
        /// Depth map (`.png` in millimeters or `.depth`).
        #[arg(long)]
        depth: PathBuf,
        /// One binary mask image per plane.
        #[arg(long, num_args = 0..)]
        masks: Vec<PathBuf>,
        /// Trajectory-format file; the first line is the reference camera.
        #[arg(long)]
        camera: PathBuf,
        #[arg(long, default_value_t = 8)]
        nonplanar_layers: usize,
        /// Space non-planar bins uniformly in disparity instead of depth.
        #[arg(long)]
        disparity: bool,
        /// Add a low-alpha one-pixel ring around each plane mask.
        #[arg(long)]
        feather: bool,
        #[arg(long, default_value_t = smpi_core::DEFAULT_MASK_THRESHOLD)]
        mask_threshold: f32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render every camera of a trajectory.
    Render {
        #[arg(long)]
        smpi: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write depth maps.
        #[arg(long)]
        depth: bool,
        /// Also write lossless float outputs (`.buf`, `.depth`).
        #[arg(long)]
        float: bool,
        #[arg(long, default_value_t = 384)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
    /// Confidence-weighted merge of renders of one view.
    Merge {
        #[arg(long, num_args = 1.., required = true)]
        renders: Vec<PathBuf>,
        /// Output `.png` (confidence in alpha) or `.buf`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a prediction to ground truth and write a `key value` report.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_enum)]
        kind: EvalKind,
        #[arg(long)]
        report: PathBuf,
        /// Recall curve output for `planes`; defaults to the report path
        /// with a `.curve` extension.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EvalKind {
    /// PSNR and SSIM of two images.
    Image,
    /// Depth error metrics of two depth maps.
    Depth,
    /// Plane recall between two S-MPI containers.
    Planes,
    /// VI, RI and SC of two label images.
    Seg,
}

fn configure_threads() {
    if let Some(n) = std::env::var("SMPI_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    configure_threads();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
