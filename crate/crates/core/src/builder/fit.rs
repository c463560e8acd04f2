use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Ratio `λ_min / λ_mid` of the scatter eigenvalues above which the normal
/// direction is considered undetermined.
const AMBIGUOUS_RATIO: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub plane: Plane,
    /// RMS of point-to-plane distances.
    pub rms: f64,
}

/// Total least-squares plane: through the centroid, normal along the
/// smallest eigenvector of the scatter matrix.
pub fn fit_plane(points: &[Vector3<f64>]) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate("fewer than three points"));
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n;
    let mut scatter = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        scatter += d * d.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (lmin, lmid, lmax) = (
        eig.eigenvalues[idx[0]].max(0.0),
        eig.eigenvalues[idx[1]].max(0.0),
        eig.eigenvalues[idx[2]].max(0.0),
    );
    if !(lmax > 0.0) || lmid <= 1e-12 * lmax {
        return Err(Error::Degenerate("points are coincident or collinear"));
    }
    if lmin / lmid > AMBIGUOUS_RATIO {
        return Err(Error::Degenerate("no dominant plane direction"));
    }
    let normal: Vector3<f64> = eig.eigenvectors.column(idx[0]).into_owned();
    let plane = Plane::new(normal, normal.dot(&centroid))?;
    let sq: f64 = points.iter().map(|p| plane.signed_distance(p).powi(2)).sum();
    Ok(PlaneFit {
        plane,
        rms: (sq / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points_on_z2() {
        let f = fit_plane(&[
            Vector3::new(0.0, 0.0, 2.0),
            Vector3::new(1.0, 0.0, 2.0),
            Vector3::new(0.0, 1.0, 2.0),
        ])
        .unwrap();
        assert!((f.plane.normal() - Vector3::z()).norm() < 1e-12);
        assert!((f.plane.offset() - 2.0).abs() < 1e-12);
        assert!(f.rms < 1e-12);
    }

    #[test]
    fn degenerate_sets() {
        let line: Vec<_> = (0..10).map(|i| Vector3::new(i as f64, 2.0 * i as f64, 1.0)).collect();
        assert!(matches!(fit_plane(&line), Err(Error::Degenerate(_))));
        let same = vec![Vector3::new(1.0, 1.0, 1.0); 5];
        assert!(matches!(fit_plane(&same), Err(Error::Degenerate(_))));
        assert!(fit_plane(&line[..2]).is_err());
        // Corners of a cube: isotropic scatter, no preferred normal.
        let cube: Vec<_> = (0..8)
            .map(|i| Vector3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        assert!(matches!(fit_plane(&cube), Err(Error::Degenerate(_))));
    }
}
