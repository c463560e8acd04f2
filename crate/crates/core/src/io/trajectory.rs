use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use crate::camera::{Camera, Intrinsics, RigidTransform};
use crate::error::{Error, Result};

const FIELDS: usize = 16;

/// Parses one camera per line: `fx fy cx cy` followed by the row-major 3×4
/// world→camera matrix `[R | t]`. Blank lines and `#` comments are skipped.
/// Line numbers in errors are 1-based.
pub fn parse_trajectory(text: &str, width: usize, height: usize) -> Result<Vec<Camera>> {
    let mut cameras = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let values = content
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| err(format!("not a number: `{tok}`"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != FIELDS {
            return Err(err(format!("expected {FIELDS} numbers, found {}", values.len())));
        }
        let k = Intrinsics::new(values[0], values[1], values[2], values[3]).map_err(|e| err(e.to_string()))?;
        let m = &values[4..];
        let rotation = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        let translation = Vector3::new(m[3], m[7], m[11]);
        let pose = RigidTransform::new(rotation, translation).map_err(|e| err(e.to_string()))?;
        cameras.push(Camera::new(k, pose, width, height).map_err(|e| err(e.to_string()))?);
    }
    Ok(cameras)
}

/// Inverse of [`parse_trajectory`]; floats are written in shortest
/// round-trip form.
pub fn format_trajectory(cameras: &[Camera]) -> String {
    let mut out = String::new();
    for c in cameras {
        let k = &c.intrinsics;
        let r = c.pose.rotation();
        let t = c.pose.translation();
        let mut fields = vec![k.fx, k.fy, k.cx, k.cy];
        for row in 0..3 {
            fields.extend([r[(row, 0)], r[(row, 1)], r[(row, 2)], t[row]]);
        }
        let line: Vec<String> = fields.iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn load_trajectory(path: impl AsRef<Path>, width: usize, height: usize) -> Result<Vec<Camera>> {
    parse_trajectory(&fs::read_to_string(path)?, width, height)
}

pub fn save_trajectory(cameras: &[Camera], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_trajectory(cameras))?;
    Ok(())
}
