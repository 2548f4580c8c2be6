//! Similarity transforms and their closed-form least-squares estimation.

use nalgebra::{Matrix3, Vector3, SVD};

use crate::error::{Error, Result};
use crate::geom::PointSet;

/// scale * rotation * p + translation, with rotation proper (det = +1).
#[derive(Debug, Clone)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl SimilarityTransform {
    pub fn identity() -> SimilarityTransform {
        SimilarityTransform {
            scale: 1.0,
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    #[inline]
    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.scale * (self.rotation * p) + self.translation
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let inv_scale = 1.0 / self.scale;
        let rot_t = self.rotation.transpose();
        SimilarityTransform {
            scale: inv_scale,
            rotation: rot_t,
            translation: -inv_scale * (rot_t * self.translation),
        }
    }

    /// self ∘ other: applies `other` first.
    pub fn compose(&self, other: &SimilarityTransform) -> SimilarityTransform {
        SimilarityTransform {
            scale: self.scale * other.scale,
            rotation: self.rotation * other.rotation,
            translation: self.scale * (self.rotation * other.translation) + self.translation,
        }
    }
}

/// Result of a similarity fit: the transform plus its RMS residual in mm.
#[derive(Debug, Clone)]
pub struct SimilarityFit {
    pub transform: SimilarityTransform,
    pub rms_residual: f64,
}

/// Least-squares similarity transform mapping `src` points onto `dst`.
///
/// Closed form: centroid alignment, scale from the variance ratio, rotation
/// from the SVD of the cross-covariance with the reflection case resolved by
/// sign-flipping the smallest singular vector.
pub fn fit_similarity(src: &PointSet, dst: &PointSet) -> Result<SimilarityFit> {
    fit_similarity_points(&src.points, &dst.points)
}

/// As `fit_similarity` but on bare point lists.
pub fn fit_similarity_points(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
) -> Result<SimilarityFit> {
    if src.len() != dst.len() {
        return Err(Error::CorrespondenceError(format!(
            "point count mismatch: {} vs {}",
            src.len(),
            dst.len()
        )));
    }
    let n = src.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!("{n} points, need at least 3")));
    }
    let nf = n as f64;
    let src_centroid: Vector3<f64> = src.iter().sum::<Vector3<f64>>() / nf;
    let dst_centroid: Vector3<f64> = dst.iter().sum::<Vector3<f64>>() / nf;

    let mut src_var = 0.0;
    let mut dst_var = 0.0;
    let mut cross = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        let a = s - src_centroid;
        let b = d - dst_centroid;
        src_var += a.norm_squared();
        dst_var += b.norm_squared();
        cross += a * b.transpose();
    }
    if src_var < 1e-24 || dst_var < 1e-24 {
        return Err(Error::DegenerateFit("all points coincide".into()));
    }
    check_not_collinear(src, &src_centroid)?;
    check_not_collinear(dst, &dst_centroid)?;

    let scale = (dst_var / src_var).sqrt();

    let svd = SVD::new(cross, true, true);
    let u = svd.u.ok_or_else(|| Error::DegenerateFit("svd failed".into()))?;
    let v = svd
        .v_t
        .ok_or_else(|| Error::DegenerateFit("svd failed".into()))?
        .transpose();
    let mut d = Matrix3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = v * d * u.transpose();

    let translation = dst_centroid - scale * (rotation * src_centroid);
    let transform = SimilarityTransform {
        scale,
        rotation,
        translation,
    };

    let ss: f64 = src
        .iter()
        .zip(dst)
        .map(|(s, d)| (transform.apply_point(s) - d).norm_squared())
        .sum();
    Ok(SimilarityFit {
        rms_residual: (ss / nf).sqrt(),
        transform,
    })
}

fn check_not_collinear(points: &[Vector3<f64>], centroid: &Vector3<f64>) -> Result<()> {
    let mut cov = Matrix3::zeros();
    for p in points {
        let a = p - centroid;
        cov += a * a.transpose();
    }
    let sv = SVD::new(cov, false, false).singular_values;
    if sv[1] <= 1e-12 * sv[0] {
        return Err(Error::DegenerateFit("collinear configuration".into()));
    }
    Ok(())
}

/// Pointwise scale*R*p + t; labels and topology carried over unchanged.
pub fn apply_transform(t: &SimilarityTransform, s: &PointSet) -> PointSet {
    PointSet {
        points: s.points.iter().map(|p| t.apply_point(p)).collect(),
        labels: s.labels.clone(),
        topology: s.topology.clone(),
    }
}
