//! Dense row-major rasters with a top-left origin.
//!
//! Pixel `(u, v)` is column `u`, row `v`, and maps to the homogeneous image
//! point `(u, v, 1)` with no half-pixel offset.

use crate::error::{Error, Result};

/// Linear RGB triple, nominally in `[0, 1]`.
pub type Rgb = [f32; 3];

/// Nearest 8-bit level of a unit-range value, clamping out-of-range input.
pub fn to_byte(x: f32) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Unit-range value of an 8-bit level. `from_byte(to_byte(x)) == x` exactly
/// whenever `x` is itself an 8-bit level.
pub fn from_byte(b: u8) -> f32 {
    b as f32 / 255.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type RgbImage = Raster<Rgb>;
pub type AlphaMap = Raster<f32>;
pub type Mask = Raster<bool>;
pub type LabelMap = Raster<u32>;

impl<T: Clone> Raster<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> Raster<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                got: (data.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(width: usize, height: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                data.push(f(u, v));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> &T {
        &self.data[v * self.width + u]
    }

    #[inline]
    pub fn get_mut(&mut self, u: usize, v: usize) -> &mut T {
        &mut self.data[v * self.width + u]
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.width.max(1))
    }

    /// Iterates `(u, v, &value)` in row-major order.
    pub fn enumerate(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let w = self.width.max(1);
        self.data.iter().enumerate().map(move |(i, x)| (i % w, i / w, x))
    }

    pub fn ensure_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.dims() != (width, height) {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                got: self.dims(),
            });
        }
        Ok(())
    }
}

impl Mask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&m| m).count()
    }
}

/// Rendered color together with the accumulated compositing weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    pub color: RgbImage,
    pub confidence: Raster<f32>,
}

impl ImageBuffer {
    pub fn new(color: RgbImage, confidence: Raster<f32>) -> Result<Self> {
        confidence.ensure_dims(color.width(), color.height())?;
        Ok(Self { color, confidence })
    }

    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            color: Raster::filled(width, height, [0.0; 3]),
            confidence: Raster::filled(width, height, 0.0),
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.color.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.color.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.color.dims()
    }

    /// Pixels whose confidence does not exceed `eps`.
    pub fn hole_count(&self, eps: f32) -> usize {
        self.confidence.as_slice().iter().filter(|&&c| c <= eps).count()
    }
}

/// Metric depth raster. Invalid pixels hold [`DepthMap::INVALID`].
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    depth: Raster<f64>,
}

impl DepthMap {
    pub const INVALID: f64 = 0.0;

    pub fn new(depth: Raster<f64>) -> Self {
        Self { depth }
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        Self::new(Raster::filled(width, height, Self::INVALID))
    }

    #[inline]
    pub fn is_valid_value(d: f64) -> bool {
        d > 0.0 && d.is_finite()
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let d = *self.depth.get(u, v);
        Self::is_valid_value(d).then_some(d)
    }

    #[inline]
    pub fn raw(&self) -> &Raster<f64> {
        &self.depth
    }

    pub fn raw_mut(&mut self) -> &mut Raster<f64> {
        &mut self.depth
    }

    pub fn into_raw(self) -> Raster<f64> {
        self.depth
    }

    pub fn width(&self) -> usize {
        self.depth.width()
    }

    pub fn height(&self) -> usize {
        self.depth.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.depth.dims()
    }

    pub fn valid_mask(&self) -> Mask {
        self.depth.map(|&d| Self::is_valid_value(d))
    }

    /// `(min, max)` over valid pixels.
    pub fn valid_range(&self) -> Option<(f64, f64)> {
        self.depth
            .as_slice()
            .iter()
            .copied()
            .filter(|&d| Self::is_valid_value(d))
            .fold(None, |acc, d| match acc {
                None => Some((d, d)),
                Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
            })
    }
}
