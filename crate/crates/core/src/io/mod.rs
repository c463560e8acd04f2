//! On-disk formats: S-MPI containers, depth maps, images, label maps and
//! camera trajectories.
//!
//! Binary formats are little-endian: a 4-byte magic, `u32` width and height,
//! then the row-major samples.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::Raster;

mod container;
mod rasters;
mod trajectory;

pub use container::{load_smpi, save_smpi, save_smpi_with, AlphaPrecision, MANIFEST_FILE, MANIFEST_VERSION};
pub use rasters::{
    load_depth, load_image, load_image_buffer, load_labels, load_mask, save_depth, save_image, save_image_buffer,
    save_labels,
};
pub use trajectory::{format_trajectory, load_trajectory, parse_trajectory, save_trajectory};

const F32_MAGIC: &[u8; 4] = b"SMF4";

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default()
}

fn unsupported(path: &Path) -> Error {
    Error::UnsupportedFormat(path.display().to_string())
}

fn write_header(buf: &mut Vec<u8>, magic: &[u8; 4], width: usize, height: usize) -> Result<()> {
    let dim = |x: usize| u32::try_from(x).map_err(|_| Error::UnsupportedFormat(format!("dimension {x} too large")));
    buf.extend_from_slice(magic);
    buf.extend_from_slice(&dim(width)?.to_le_bytes());
    buf.extend_from_slice(&dim(height)?.to_le_bytes());
    Ok(())
}

/// Splits off and checks the header; returns `(width, height, payload)`.
fn read_header<'a>(bytes: &'a [u8], magic: &[u8; 4], path: &Path) -> Result<(usize, usize, &'a [u8])> {
    if bytes.len() < 12 || &bytes[..4] != magic {
        return Err(unsupported(path));
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    Ok((w, h, &bytes[12..]))
}

fn write_f32_le(path: &Path, width: usize, height: usize, values: &[f32]) -> Result<()> {
    let mut buf = Vec::with_capacity(12 + 4 * values.len());
    write_header(&mut buf, F32_MAGIC, width, height)?;
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

fn read_f32_le(path: &Path, width: usize, height: usize) -> Result<Raster<f32>> {
    let bytes = fs::read(path)?;
    let (w, h, payload) = read_header(&bytes, F32_MAGIC, path)?;
    if (w, h) != (width, height) {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            got: (w, h),
        });
    }
    if payload.len() != 4 * w * h {
        return Err(unsupported(path));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Raster::from_vec(w, h, values)
}
