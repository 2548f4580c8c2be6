//! Intensity appearance model: per-landmark gray-level profile statistics
//! along boundary normals, and Mahalanobis-distance candidate search.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Vector3};

use crate::error::{Error, Result};
use crate::geom::{PointSet, VoxelVolume};

/// A normalized intensity profile of 2k+1 samples taken at step `step_mm`
/// along a landmark normal, centered on the landmark.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    pub samples: DVector<f64>,
}

/// Per-landmark profile statistics for one landmark.
#[derive(Debug, Clone)]
pub struct LandmarkAppearance {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl LandmarkAppearance {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<LandmarkAppearance> {
        if mean.len() != covariance.nrows() || !covariance.is_square() {
            return Err(Error::DimensionError(
                "profile mean/covariance shape mismatch".into(),
            ));
        }
        let chol = Cholesky::new(covariance.clone()).ok_or_else(|| {
            Error::DimensionError("profile covariance not positive definite".into())
        })?;
        Ok(LandmarkAppearance {
            mean,
            covariance,
            chol,
        })
    }
}

/// The trained appearance model: one (mean, covariance) pair per landmark,
/// shared profile parameters, and the 95th percentile of training
/// Mahalanobis distances used by segmentation quality checks.
#[derive(Debug, Clone)]
pub struct AppearanceModel {
    pub half_len: usize,
    pub step_mm: f64,
    pub landmarks: Vec<LandmarkAppearance>,
    pub train_q95: f64,
}

/// One boundary-search result: the displaced point, its winning offset in
/// steps, and the Mahalanobis distance there.
#[derive(Debug, Clone)]
pub struct CandidateResult {
    pub point: Vector3<f64>,
    pub offset_steps: i64,
    pub distance: f64,
}

impl AppearanceModel {
    pub fn profile_len(&self) -> usize {
        2 * self.half_len + 1
    }

    pub fn landmark_count(&self) -> usize {
        self.landmarks.len()
    }

    /// (g - mean)^T Sigma^-1 (g - mean) for one landmark, via the cached
    /// Cholesky factor. Zero iff the profile equals the mean.
    pub fn mahalanobis(&self, landmark: usize, profile: &IntensityProfile) -> Result<f64> {
        let stats = &self.landmarks[landmark];
        if profile.samples.len() != stats.mean.len() {
            return Err(Error::DimensionError(format!(
                "profile length {} vs model {}",
                profile.samples.len(),
                stats.mean.len()
            )));
        }
        let r = &profile.samples - &stats.mean;
        let y = stats.chol.solve(&r);
        Ok(r.dot(&y))
    }

    /// Evaluates candidate centers at j*step*normal for j in -m..=m and
    /// returns the minimizer. Ties break toward smallest |j|, then the
    /// negative offset.
    pub fn best_candidate(
        &self,
        volume: &VoxelVolume,
        landmark: usize,
        point: &Vector3<f64>,
        normal: &Vector3<f64>,
        search_positions: usize,
    ) -> Result<CandidateResult> {
        let m = search_positions as i64;
        if m < 1 {
            return Err(Error::ConfigError("search_positions must be >= 1".into()));
        }
        let mut best: Option<CandidateResult> = None;
        for j in -m..=m {
            let center = point + (j as f64) * self.step_mm * normal;
            let profile = sample_profile(volume, &center, normal, self.half_len, self.step_mm)?;
            let d = self.mahalanobis(landmark, &profile)?;
            let better = match &best {
                None => true,
                Some(b) => {
                    d < b.distance
                        || (d == b.distance
                            && (j.abs() < b.offset_steps.abs()
                                || (j.abs() == b.offset_steps.abs() && j < b.offset_steps)))
                }
            };
            if better {
                best = Some(CandidateResult {
                    point: center,
                    offset_steps: j,
                    distance: d,
                });
            }
        }
        Ok(best.expect("at least one candidate"))
    }
}

/// Raw (unnormalized) intensity samples at point + j*step*normal for
/// j = -k..k, trilinear, clamped to the volume at the boundary.
pub fn sample_raw_profile(
    volume: &VoxelVolume,
    point: &Vector3<f64>,
    normal: &Vector3<f64>,
    half_len: usize,
    step_mm: f64,
) -> Result<DVector<f64>> {
    if (normal.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::DegenerateNormal);
    }
    if half_len < 1 || step_mm <= 0.0 {
        return Err(Error::ConfigError("profile needs k >= 1 and step > 0".into()));
    }
    let k = half_len as i64;
    let mut raw = DVector::zeros(2 * half_len + 1);
    for (slot, j) in (-k..=k).enumerate() {
        let p = point + (j as f64) * step_mm * normal;
        raw[slot] = volume.sample_world(&p);
    }
    Ok(raw)
}

/// Samples and normalizes a profile: central-difference gradient (one-sided
/// at the ends) divided by the sum of absolute values. A flat profile
/// normalizes to the zero vector.
pub fn sample_profile(
    volume: &VoxelVolume,
    point: &Vector3<f64>,
    normal: &Vector3<f64>,
    half_len: usize,
    step_mm: f64,
) -> Result<IntensityProfile> {
    let raw = sample_raw_profile(volume, point, normal, half_len, step_mm)?;
    Ok(IntensityProfile {
        samples: normalize_profile(&raw),
    })
}

/// Gradient normalization of a raw profile.
pub fn normalize_profile(raw: &DVector<f64>) -> DVector<f64> {
    let n = raw.len();
    let mut grad = DVector::zeros(n);
    grad[0] = raw[1] - raw[0];
    grad[n - 1] = raw[n - 1] - raw[n - 2];
    for i in 1..n - 1 {
        grad[i] = 0.5 * (raw[i + 1] - raw[i - 1]);
    }
    let denom: f64 = grad.iter().map(|v| v.abs()).sum();
    if denom < 1e-12 {
        DVector::zeros(n)
    } else {
        grad / denom
    }
}

/// Sample mean and regularized covariance of a set of equal-length profiles.
/// Regularization: eps*I with eps = 1e-3 * trace(Sigma)/len, floored at 1e-6.
pub fn profile_stats(profiles: &[DVector<f64>]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = profiles.len();
    if n < 2 {
        return Err(Error::InsufficientData("need >= 2 profiles".into()));
    }
    let len = profiles[0].len();
    let mut mean = DVector::zeros(len);
    for p in profiles {
        if p.len() != len {
            return Err(Error::DimensionError("profile length mismatch".into()));
        }
        mean += p;
    }
    mean /= n as f64;

    let mut cov = DMatrix::zeros(len, len);
    for p in profiles {
        let d = p - &mean;
        cov += &d * d.transpose();
    }
    cov /= (n - 1) as f64;

    let eps = (1e-3 * cov.trace() / len as f64).max(1e-6);
    for i in 0..len {
        cov[(i, i)] += eps;
    }
    Ok((mean, cov))
}

/// Trains the appearance model from paired volumes and ground-truth shapes:
/// per landmark, profiles are sampled along the shape normals over the
/// training set and reduced to mean + regularized covariance. Also records
/// the 95th percentile of training Mahalanobis distances.
pub fn train_iam(
    pairs: &[(&VoxelVolume, &PointSet)],
    half_len: usize,
    step_mm: f64,
) -> Result<AppearanceModel> {
    let needed = 2 * half_len + 2;
    if pairs.len() < needed {
        return Err(Error::InsufficientData(format!(
            "{} training pairs, need >= {needed}",
            pairs.len()
        )));
    }
    let n_landmarks = pairs[0].1.len();
    for (_, s) in pairs {
        if s.len() != n_landmarks {
            return Err(Error::CorrespondenceError(
                "training shapes disagree on landmark count".into(),
            ));
        }
    }

    // profiles[landmark][pair]
    let mut profiles: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(pairs.len()); n_landmarks];
    for (volume, shape) in pairs {
        let normals = shape.vertex_normals();
        for (i, (point, normal)) in shape.points.iter().zip(&normals).enumerate() {
            let profile = if normal.norm() > 1e-12 {
                sample_profile(volume, point, normal, half_len, step_mm)?
            } else {
                IntensityProfile {
                    samples: DVector::zeros(2 * half_len + 1),
                }
            };
            profiles[i].push(profile.samples);
        }
    }

    let mut landmarks = Vec::with_capacity(n_landmarks);
    for per_landmark in &profiles {
        let (mean, cov) = profile_stats(per_landmark)?;
        landmarks.push(LandmarkAppearance::new(mean, cov)?);
    }

    let model = AppearanceModel {
        half_len,
        step_mm,
        landmarks,
        train_q95: 0.0,
    };
    let mut dists = Vec::with_capacity(n_landmarks * pairs.len());
    for (i, per_landmark) in profiles.iter().enumerate() {
        for p in per_landmark {
            dists.push(model.mahalanobis(i, &IntensityProfile { samples: p.clone() })?);
        }
    }
    dists.sort_by(|a, b| a.total_cmp(b));
    let q95 = dists[((dists.len() as f64 * 0.95).ceil() as usize).saturating_sub(1)];
    Ok(AppearanceModel {
        train_q95: q95,
        ..model
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::View;
    use nalgebra::Matrix3;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant_volume(value: u16) -> VoxelVolume {
        VoxelVolume::new(
            (20, 20, 20),
            (1.0, 1.0, 1.0),
            Vector3::zeros(),
            Matrix3::identity(),
            vec![value; 8000],
            "t".into(),
            0,
            View::Sax,
        )
        .unwrap()
    }

    /// step edge: lo for world x < edge_x, hi for x >= edge_x
    fn edge_volume(edge_x: f64, lo: u16, hi: u16) -> VoxelVolume {
        let dims = (40, 20, 20);
        let mut data = vec![0u16; dims.0 * dims.1 * dims.2];
        for k in 0..dims.2 {
            for j in 0..dims.1 {
                for i in 0..dims.0 {
                    let x = i as f64;
                    data[(k * dims.1 + j) * dims.0 + i] = if x < edge_x { lo } else { hi };
                }
            }
        }
        VoxelVolume::new(
            dims,
            (1.0, 1.0, 1.0),
            Vector3::zeros(),
            Matrix3::identity(),
            data,
            "t".into(),
            0,
            View::Sax,
        )
        .unwrap()
    }

    #[test]
    fn constant_volume_normalizes_to_zero() {
        let v = constant_volume(500);
        let p = sample_profile(&v, &Vector3::new(10.0, 10.0, 10.0), &Vector3::x(), 4, 1.0).unwrap();
        assert!(p.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn step_edge_raw_profile_monotone() {
        let v = edge_volume(10.0, 100, 900);
        let raw =
            sample_raw_profile(&v, &Vector3::new(10.0, 10.0, 10.0), &Vector3::x(), 2, 1.0).unwrap();
        assert_eq!(raw.len(), 5);
        for i in 1..raw.len() {
            assert!(raw[i] >= raw[i - 1], "raw profile not monotone: {raw:?}");
        }
        assert_eq!(raw[0], 100.0);
        assert_eq!(raw[4], 900.0);
    }

    #[test]
    fn zero_normal_rejected() {
        let v = constant_volume(1);
        let r = sample_profile(&v, &Vector3::zeros(), &Vector3::zeros(), 2, 1.0);
        assert!(matches!(r, Err(Error::DegenerateNormal)));
    }

    #[test]
    fn identical_profiles_give_floor_regularized_covariance() {
        let p = DVector::from_vec(vec![0.25, 0.5, 0.75]);
        let profiles = vec![p.clone(); 10];
        let (mean, cov) = profile_stats(&profiles).unwrap();
        assert!((mean - &p).norm() < 1e-15);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1e-6 } else { 0.0 };
                assert_eq!(cov[(i, j)], expected);
            }
        }
    }

    #[test]
    fn single_varying_sample_isolates_one_diagonal_entry() {
        let mut profiles = Vec::new();
        for v in [-1.0, -0.5, 0.5, 1.0] {
            profiles.push(DVector::from_vec(vec![0.0, v, 0.0]));
        }
        let (_, cov) = profile_stats(&profiles).unwrap();
        let eps = (1e-3 * cov.trace() / 3.0).max(1e-6);
        let mut above = 0;
        for i in 0..3 {
            if cov[(i, i)] > 2.0 * eps {
                above += 1;
            }
        }
        assert_eq!(above, 1);
        assert!(cov[(1, 1)] > cov[(0, 0)]);
    }

    fn model_from(stats: Vec<(Vec<f64>, DMatrix<f64>)>, k: usize) -> AppearanceModel {
        AppearanceModel {
            half_len: k,
            step_mm: 1.0,
            landmarks: stats
                .into_iter()
                .map(|(m, c)| LandmarkAppearance::new(DVector::from_vec(m), c).unwrap())
                .collect(),
            train_q95: 0.0,
        }
    }

    #[test]
    fn mahalanobis_identity_and_diagonal_cases() {
        let eye5 = DMatrix::<f64>::identity(5, 5);
        let am = model_from(vec![(vec![0.0; 5], eye5)], 2);

        let at_mean = IntensityProfile {
            samples: DVector::zeros(5),
        };
        assert_eq!(am.mahalanobis(0, &at_mean).unwrap(), 0.0);

        let off = IntensityProfile {
            samples: DVector::from_vec(vec![3.0, 4.0, 0.0, 0.0, 0.0]),
        };
        assert!((am.mahalanobis(0, &off).unwrap() - 25.0).abs() < 1e-12);

        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let am2 = AppearanceModel {
            half_len: 0,
            step_mm: 1.0,
            landmarks: vec![
                LandmarkAppearance::new(DVector::zeros(2), diag).unwrap(),
            ],
            train_q95: 0.0,
        };
        let p = IntensityProfile {
            samples: DVector::from_vec(vec![1.0, 1.0]),
        };
        assert!((am2.mahalanobis(0, &p).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn mahalanobis_length_mismatch() {
        let am = model_from(vec![(vec![0.0; 5], DMatrix::identity(5, 5))], 2);
        let p = IntensityProfile {
            samples: DVector::zeros(3),
        };
        assert!(matches!(
            am.mahalanobis(0, &p),
            Err(Error::DimensionError(_))
        ));
    }

    #[test]
    fn mahalanobis_matches_gaussian_elimination_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.gen_range(2..=9);
            // SPD = A A^T + I
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let spd = &a * a.transpose() + DMatrix::identity(n, n);
            let mean = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let g = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));

            let am = AppearanceModel {
                half_len: 0,
                step_mm: 1.0,
                landmarks: vec![LandmarkAppearance::new(mean.clone(), spd.clone()).unwrap()],
                train_q95: 0.0,
            };
            let got = am
                .mahalanobis(0, &IntensityProfile { samples: g.clone() })
                .unwrap();

            // brute force: solve Sigma y = r by LU, then r . y
            let r = &g - &mean;
            let y = spd.lu().solve(&r).unwrap();
            let want = r.dot(&y);
            let rel = (got - want).abs() / want.abs().max(1e-30);
            assert!(rel < 1e-9, "rel error {rel}");
        }
    }

    fn edge_training_model(k: usize, step: f64) -> AppearanceModel {
        // ten slightly different edge volumes so the covariance is usable
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut volumes = Vec::new();
        for _ in 0..10 {
            let lo = 100 + rng.gen_range(0..3);
            let hi = 900 + rng.gen_range(0..3);
            volumes.push(edge_volume(10.0, lo, hi));
        }
        // single-landmark "shape" cannot use train_iam (needs mesh normals),
        // so assemble the stats directly
        let point = Vector3::new(10.0, 10.0, 10.0);
        let normal = Vector3::x();
        let profiles: Vec<DVector<f64>> = volumes
            .iter()
            .map(|v| sample_profile(v, &point, &normal, k, step).unwrap().samples)
            .collect();
        let (mean, cov) = profile_stats(&profiles).unwrap();
        AppearanceModel {
            half_len: k,
            step_mm: step,
            landmarks: vec![LandmarkAppearance::new(mean, cov).unwrap()],
            train_q95: 0.0,
        }
    }

    #[test]
    fn best_candidate_recovers_shifted_edge() {
        let am = edge_training_model(3, 1.0);
        let shifted = edge_volume(12.0, 100, 900);
        let r = am
            .best_candidate(
                &shifted,
                0,
                &Vector3::new(10.0, 10.0, 10.0),
                &Vector3::x(),
                5,
            )
            .unwrap();
        assert_eq!(r.offset_steps, 2, "expected +2 step displacement");
    }

    #[test]
    fn best_candidate_zero_on_training_volume() {
        let am = edge_training_model(3, 1.0);
        let vol = edge_volume(10.0, 100, 900);
        let r = am
            .best_candidate(&vol, 0, &Vector3::new(10.0, 10.0, 10.0), &Vector3::x(), 5)
            .unwrap();
        assert_eq!(r.offset_steps, 0);
    }

    #[test]
    fn best_candidate_tie_breaks_to_center_on_constant_volume() {
        let p = DVector::zeros(7);
        let mut cov = DMatrix::zeros(7, 7);
        for i in 0..7 {
            cov[(i, i)] = 1e-6;
        }
        let am = AppearanceModel {
            half_len: 3,
            step_mm: 1.0,
            landmarks: vec![LandmarkAppearance::new(p, cov).unwrap()],
            train_q95: 0.0,
        };
        let v = constant_volume(300);
        let r = am
            .best_candidate(&v, 0, &Vector3::new(10.0, 10.0, 10.0), &Vector3::x(), 5)
            .unwrap();
        assert_eq!(r.offset_steps, 0);
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn best_candidate_translation_covariant() {
        let am = edge_training_model(3, 1.0);
        let shifted = {
            let mut v = edge_volume(12.0, 100, 900);
            v.origin += Vector3::new(3.0, -2.0, 1.0);
            v
        };
        let base = edge_volume(12.0, 100, 900);
        let p = Vector3::new(10.0, 10.0, 10.0);
        let r1 = am.best_candidate(&base, 0, &p, &Vector3::x(), 5).unwrap();
        let r2 = am
            .best_candidate(&shifted, 0, &(p + Vector3::new(3.0, -2.0, 1.0)), &Vector3::x(), 5)
            .unwrap();
        assert_eq!(r1.offset_steps, r2.offset_steps);
        assert!((r1.distance - r2.distance).abs() < 1e-9);
    }

    #[test]
    fn train_iam_requires_enough_pairs() {
        let v = constant_volume(1);
        let topo = std::sync::Arc::new(crate::geom::MeshTopology::from_grids(vec![
            crate::geom::SurfaceGrid {
                label: crate::geom::StructureLabel::LvEndo,
                start: 0,
                rings: 2,
                cols: 3,
            },
        ]));
        let shape = PointSet::new(
            vec![Vector3::new(10.0, 10.0, 10.0); 6],
            vec![crate::geom::StructureLabel::LvEndo; 6],
            topo,
        )
        .unwrap();
        let pairs: Vec<(&VoxelVolume, &PointSet)> = vec![(&v, &shape); 3];
        assert!(matches!(
            train_iam(&pairs, 4, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }
}
