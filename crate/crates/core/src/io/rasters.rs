use std::fs;
use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::raster::{from_byte, to_byte, DepthMap, ImageBuffer, LabelMap, Mask, Raster, RgbImage};

use super::{extension, read_header, unsupported, write_header};

const DEPTH_MAGIC: &[u8; 4] = b"SMD8";
const BUFFER_MAGIC: &[u8; 4] = b"SMB4";
/// Depth units per meter in 16-bit PNG depth maps.
const DEPTH_SCALE: f64 = 1000.0;

fn dims_u32(w: usize, h: usize) -> Result<(u32, u32)> {
    match (u32::try_from(w), u32::try_from(h)) {
        (Ok(w), Ok(h)) => Ok((w, h)),
        _ => Err(Error::UnsupportedFormat(format!("{w}x{h} too large"))),
    }
}

fn require_png(path: &Path) -> Result<()> {
    if extension(path) == "png" {
        Ok(())
    } else {
        Err(unsupported(path))
    }
}

/// Saves a depth map.
///
/// `.png`: 16-bit millimeters, `round(depth · 1000)`, 0 for invalid pixels,
/// saturating at 65.535 m. `.depth`: raw `f64`, bit-exact.
pub fn save_depth(depth: &DepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = depth.dims();
    match extension(path).as_str() {
        "png" => {
            let (w32, h32) = dims_u32(w, h)?;
            let data: Vec<u16> = depth
                .raw()
                .as_slice()
                .iter()
                .map(|&d| {
                    if DepthMap::is_valid_value(d) {
                        (d * DEPTH_SCALE).round().clamp(1.0, u16::MAX as f64) as u16
                    } else {
                        0
                    }
                })
                .collect();
            let img = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(w32, h32, data).expect("sized buffer");
            img.save(path)?;
        }
        "depth" => {
            let mut buf = Vec::with_capacity(12 + 8 * w * h);
            write_header(&mut buf, DEPTH_MAGIC, w, h)?;
            for d in depth.raw().as_slice() {
                buf.extend_from_slice(&d.to_le_bytes());
            }
            fs::write(path, buf)?;
        }
        _ => return Err(unsupported(path)),
    }
    Ok(())
}

pub fn load_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "png" => match image::open(path)? {
            DynamicImage::ImageLuma16(img) => {
                let (w, h) = (img.width() as usize, img.height() as usize);
                let data = img
                    .into_raw()
                    .into_iter()
                    .map(|x| if x == 0 { DepthMap::INVALID } else { x as f64 / DEPTH_SCALE })
                    .collect();
                Ok(DepthMap::new(Raster::from_vec(w, h, data)?))
            }
            _ => Err(Error::UnsupportedFormat(format!("{}: expected 16-bit grayscale", path.display()))),
        },
        "depth" => {
            let bytes = fs::read(path)?;
            let (w, h, payload) = read_header(&bytes, DEPTH_MAGIC, path)?;
            if payload.len() != 8 * w * h {
                return Err(unsupported(path));
            }
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Ok(DepthMap::new(Raster::from_vec(w, h, data)?))
        }
        _ => Err(unsupported(path)),
    }
}

/// Saves an 8-bit RGB PNG.
pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    require_png(path)?;
    let (w, h) = dims_u32(img.width(), img.height())?;
    let bytes: Vec<u8> = img.as_slice().iter().flat_map(|c| c.map(to_byte)).collect();
    image::save_buffer(path, &bytes, w, h, image::ExtendedColorType::Rgb8)?;
    Ok(())
}

/// Loads any 8-bit image as unit-range RGB, dropping alpha.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let img = image::open(path)?.into_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.pixels().map(|p| p.0.map(from_byte)).collect();
    Raster::from_vec(w, h, data)
}

/// Saves a rendered image with its confidence.
///
/// `.png`: RGBA with confidence in alpha (8-bit). `.buf`: raw `f32`
/// `r g b confidence` per pixel, bit-exact.
pub fn save_image_buffer(buf: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = buf.dims();
    let pixels = buf.color.as_slice().iter().zip(buf.confidence.as_slice());
    match extension(path).as_str() {
        "png" => {
            let (w32, h32) = dims_u32(w, h)?;
            let bytes: Vec<u8> = pixels
                .flat_map(|(c, &a)| [to_byte(c[0]), to_byte(c[1]), to_byte(c[2]), to_byte(a)])
                .collect();
            image::save_buffer(path, &bytes, w32, h32, image::ExtendedColorType::Rgba8)?;
        }
        "buf" => {
            let mut bytes = Vec::with_capacity(12 + 16 * w * h);
            write_header(&mut bytes, BUFFER_MAGIC, w, h)?;
            for (c, a) in pixels {
                for x in [c[0], c[1], c[2], *a] {
                    bytes.extend_from_slice(&x.to_le_bytes());
                }
            }
            fs::write(path, bytes)?;
        }
        _ => return Err(unsupported(path)),
    }
    Ok(())
}

pub fn load_image_buffer(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "png" => {
            let img = image::open(path)?.into_rgba8();
            let (w, h) = (img.width() as usize, img.height() as usize);
            let color = img.pixels().map(|p| [from_byte(p[0]), from_byte(p[1]), from_byte(p[2])]).collect();
            let conf = img.pixels().map(|p| from_byte(p[3])).collect();
            ImageBuffer::new(Raster::from_vec(w, h, color)?, Raster::from_vec(w, h, conf)?)
        }
        "buf" => {
            let bytes = fs::read(path)?;
            let (w, h, payload) = read_header(&bytes, BUFFER_MAGIC, path)?;
            if payload.len() != 16 * w * h {
                return Err(unsupported(path));
            }
            let mut color = Vec::with_capacity(w * h);
            let mut conf = Vec::with_capacity(w * h);
            for px in payload.chunks_exact(16) {
                let f = |i: usize| f32::from_le_bytes(px[4 * i..4 * i + 4].try_into().unwrap());
                color.push([f(0), f(1), f(2)]);
                conf.push(f(3));
            }
            ImageBuffer::new(Raster::from_vec(w, h, color)?, Raster::from_vec(w, h, conf)?)
        }
        _ => Err(unsupported(path)),
    }
}

/// Saves labels as a 16-bit grayscale PNG.
pub fn save_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    require_png(path)?;
    let (w, h) = dims_u32(labels.width(), labels.height())?;
    let data = labels
        .as_slice()
        .iter()
        .map(|&l| u16::try_from(l).map_err(|_| Error::UnsupportedFormat(format!("label {l} exceeds 16 bits"))))
        .collect::<Result<Vec<u16>>>()?;
    image::ImageBuffer::<image::Luma<u16>, _>::from_raw(w, h, data)
        .expect("sized buffer")
        .save(path)?;
    Ok(())
}

/// Loads a label map. Grayscale values are labels; RGB colors are packed as
/// `r << 16 | g << 8 | b`.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let img = image::open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<u32> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma16(g) => g.into_raw().into_iter().map(u32::from).collect(),
        other => other
            .into_rgb8()
            .pixels()
            .map(|p| (p[0] as u32) << 16 | (p[1] as u32) << 8 | p[2] as u32)
            .collect(),
    };
    Raster::from_vec(w, h, data)
}

/// Loads a binary mask: any nonzero pixel is inside.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    Ok(load_labels(path)?.map(|&l| l != 0))
}
