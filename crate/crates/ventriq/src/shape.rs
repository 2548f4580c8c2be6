//! Point distribution model: generalized Procrustes alignment, PCA over
//! aligned landmark shapes, shape synthesis and projection.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::{
    apply_transform, fit_similarity, MeshTopology, PointSet, SimilarityTransform, StructureLabel,
};

/// Landmark index groups whose centroids act as pose anchors: the apical
/// endocardial ring, the basal endocardial ring, and the mid RV ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorGroups {
    pub apex: Vec<usize>,
    pub base: Vec<usize>,
    pub rv_mid: Vec<usize>,
}

impl AnchorGroups {
    /// Picks the anchor rings from the topology grids. Ring 0 of each grid
    /// is the basal end by construction.
    pub fn from_topology(topo: &MeshTopology) -> Result<AnchorGroups> {
        let endo = topo
            .surface(StructureLabel::LvEndo)
            .ok_or_else(|| Error::CorrespondenceError("topology has no LV endo surface".into()))?;
        let rv = topo
            .surface(StructureLabel::RvEndo)
            .ok_or_else(|| Error::CorrespondenceError("topology has no RV endo surface".into()))?;
        let ring = |g: &crate::geom::SurfaceGrid, r: usize| -> Vec<usize> {
            (0..g.cols).map(|c| g.index(r, c)).collect()
        };
        Ok(AnchorGroups {
            apex: ring(endo, endo.rings - 1),
            base: ring(endo, 0),
            rv_mid: ring(rv, rv.rings / 2),
        })
    }

    /// Centroids of the three groups on a given shape, in group order
    /// (apex, base, rv_mid).
    pub fn anchor_points(&self, shape: &PointSet) -> [nalgebra::Vector3<f64>; 3] {
        let centroid = |idx: &[usize]| {
            let mut c = nalgebra::Vector3::zeros();
            for &i in idx {
                c += shape.points[i];
            }
            c / idx.len() as f64
        };
        [
            centroid(&self.apex),
            centroid(&self.base),
            centroid(&self.rv_mid),
        ]
    }
}

/// PCA shape model over corresponded landmark sets: mean, orthonormal modes
/// and their variances, with the mesh topology and anchors of the mean.
#[derive(Debug, Clone)]
pub struct PointDistributionModel {
    /// Mean shape as a flattened 3N vector.
    pub mean: DVector<f64>,
    /// 3N x t matrix of unit eigenvectors, variances descending.
    pub modes: DMatrix<f64>,
    /// Eigenvalues (shape variances) per retained mode, descending.
    pub variances: Vec<f64>,
    pub variance_fraction: f64,
    pub labels: Vec<StructureLabel>,
    pub topology: Arc<MeshTopology>,
    pub anchors: AnchorGroups,
}

/// Mode weights b for a shape instance x = mean + modes * b.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCoefficients(pub DVector<f64>);

impl ShapeCoefficients {
    pub fn zeros(t: usize) -> ShapeCoefficients {
        ShapeCoefficients(DVector::zeros(t))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl PointDistributionModel {
    pub fn landmark_count(&self) -> usize {
        self.labels.len()
    }

    pub fn mode_count(&self) -> usize {
        self.variances.len()
    }

    /// The mean shape as a point set.
    pub fn mean_shape(&self) -> PointSet {
        self.shape_from_flat(self.mean.as_slice())
    }

    fn shape_from_flat(&self, flat: &[f64]) -> PointSet {
        let points = flat
            .chunks_exact(3)
            .map(|c| nalgebra::Vector3::new(c[0], c[1], c[2]))
            .collect();
        PointSet {
            points,
            labels: self.labels.clone(),
            topology: self.topology.clone(),
        }
    }

    /// x = mean + modes * b, reshaped to landmarks with model topology.
    pub fn instance(&self, coeffs: &ShapeCoefficients) -> Result<PointSet> {
        if coeffs.len() != self.mode_count() {
            return Err(Error::DimensionError(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                self.mode_count()
            )));
        }
        let flat = &self.mean + &self.modes * &coeffs.0;
        Ok(self.shape_from_flat(flat.as_slice()))
    }

    /// b = modes^T (x - mean): least-squares optimal in the mode subspace.
    pub fn project(&self, shape: &PointSet) -> Result<ShapeCoefficients> {
        if shape.len() != self.landmark_count() {
            return Err(Error::DimensionError(format!(
                "{} landmarks, model has {}",
                shape.len(),
                self.landmark_count()
            )));
        }
        let x = DVector::from_vec(shape.flatten());
        let b = self.modes.transpose() * (x - &self.mean);
        Ok(ShapeCoefficients(b))
    }

    /// Clips each coefficient to +-3 sqrt(variance). Idempotent.
    pub fn clamp(&self, coeffs: &ShapeCoefficients) -> ShapeCoefficients {
        let mut b = coeffs.0.clone();
        for (bi, &var) in b.iter_mut().zip(&self.variances) {
            let bound = 3.0 * var.sqrt();
            *bi = bi.clamp(-bound, bound);
        }
        ShapeCoefficients(b)
    }
}

/// Generalized Procrustes alignment: iterative similarity alignment of all
/// shapes to an evolving consensus mean until the mean stops moving.
///
/// Returns the aligned shapes and the consensus mean, which is centered at
/// the origin with unit centroid size.
pub fn procrustes_align(shapes: &[PointSet]) -> Result<(Vec<PointSet>, PointSet)> {
    if shapes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} shapes, need at least 2 for alignment",
            shapes.len()
        )));
    }
    let n = shapes[0].len();
    for s in shapes {
        if s.len() != n {
            return Err(Error::CorrespondenceError(format!(
                "landmark count mismatch: {} vs {}",
                s.len(),
                n
            )));
        }
        if s.labels != shapes[0].labels {
            return Err(Error::CorrespondenceError("label mismatch".into()));
        }
    }

    let normalized: Vec<PointSet> = shapes.iter().map(normalize_shape).collect();
    let mut mean = normalized[0].clone();
    let mut aligned = normalized.clone();

    for _ in 0..100 {
        for (a, s) in aligned.iter_mut().zip(&normalized) {
            let fit = fit_similarity(s, &mean)?;
            *a = apply_transform(&fit.transform, s);
        }
        let new_mean = normalize_shape(&mean_of(&aligned));
        let movement = new_mean.rms_distance(&mean);
        mean = new_mean;
        if movement < 1e-7 {
            break;
        }
    }
    // final pass against the converged mean
    for (a, s) in aligned.iter_mut().zip(&normalized) {
        let fit = fit_similarity(s, &mean)?;
        *a = apply_transform(&fit.transform, s);
    }
    Ok((aligned, mean))
}

fn normalize_shape(s: &PointSet) -> PointSet {
    let c = s.centroid();
    let size = s.centroid_size();
    let t = SimilarityTransform {
        scale: 1.0 / size,
        rotation: nalgebra::Matrix3::identity(),
        translation: -c / size,
    };
    apply_transform(&t, s)
}

fn mean_of(shapes: &[PointSet]) -> PointSet {
    let n = shapes[0].len();
    let mut points = vec![nalgebra::Vector3::zeros(); n];
    for s in shapes {
        for (acc, p) in points.iter_mut().zip(&s.points) {
            *acc += p;
        }
    }
    let k = shapes.len() as f64;
    for p in &mut points {
        *p /= k;
    }
    PointSet {
        points,
        labels: shapes[0].labels.clone(),
        topology: shapes[0].topology.clone(),
    }
}

/// Trains the PDM on aligned shapes, retaining the smallest mode count that
/// reaches `variance_fraction` of total variance.
///
/// The eigendecomposition runs on the s x s Gram matrix whenever 3N > s;
/// the spectrum is identical and the cost scales with the training set.
pub fn train_pdm(aligned: &[PointSet], variance_fraction: f64) -> Result<PointDistributionModel> {
    if aligned.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} shapes, need at least 2",
            aligned.len()
        )));
    }
    if !(variance_fraction > 0.0 && variance_fraction <= 1.0) {
        return Err(Error::ConfigError(format!(
            "variance_fraction {variance_fraction} not in (0, 1]"
        )));
    }
    let s = aligned.len();
    let dim = aligned[0].len() * 3;

    let mut mean = DVector::<f64>::zeros(dim);
    let flats: Vec<DVector<f64>> = aligned
        .iter()
        .map(|a| DVector::from_vec(a.flatten()))
        .collect();
    for f in &flats {
        mean += f;
    }
    mean /= s as f64;

    // centered data, shapes as rows
    let mut data = DMatrix::<f64>::zeros(s, dim);
    for (i, f) in flats.iter().enumerate() {
        data.row_mut(i).copy_from(&(f - &mean).transpose());
    }

    let denom = (s - 1) as f64;
    let total_variance: f64 = data.iter().map(|v| v * v).sum::<f64>() / denom;
    if total_variance < 1e-18 {
        return Err(Error::InsufficientVariance(
            "training shapes carry no variance".into(),
        ));
    }

    let (eigvals, eigvecs) = if dim > s {
        // Gram trick: eig of D D^T / (s-1), modes recovered as D^T u
        let gram = &data * data.transpose() / denom;
        let eig = nalgebra::SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut vals = Vec::new();
        let mut vecs = Vec::new();
        for &i in &order {
            let lambda = eig.eigenvalues[i];
            if lambda <= 1e-12 * eig.eigenvalues[order[0]] || lambda <= 0.0 {
                continue;
            }
            let u = eig.eigenvectors.column(i);
            let mut phi = data.transpose() * u;
            phi /= (denom * lambda).sqrt();
            vals.push(lambda);
            vecs.push(phi);
        }
        (vals, vecs)
    } else {
        let cov = data.transpose() * &data / denom;
        let eig = nalgebra::SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut vals = Vec::new();
        let mut vecs = Vec::new();
        for &i in &order {
            let lambda = eig.eigenvalues[i];
            if lambda <= 1e-12 * eig.eigenvalues[order[0]] || lambda <= 0.0 {
                continue;
            }
            vals.push(lambda);
            vecs.push(eig.eigenvectors.column(i).into_owned());
        }
        (vals, vecs)
    };

    let mut cum = 0.0;
    let mut t = eigvals.len();
    for (i, lambda) in eigvals.iter().enumerate() {
        cum += lambda;
        if cum / total_variance >= variance_fraction - 1e-12 {
            t = i + 1;
            break;
        }
    }
    if t == 0 {
        return Err(Error::InsufficientVariance("no retained modes".into()));
    }

    let mut modes = DMatrix::<f64>::zeros(dim, t);
    for (j, v) in eigvecs.iter().take(t).enumerate() {
        modes.column_mut(j).copy_from(v);
    }

    let topology = aligned[0].topology.clone();
    let anchors = AnchorGroups::from_topology(&topology)?;
    Ok(PointDistributionModel {
        mean,
        modes,
        variances: eigvals[..t].to_vec(),
        variance_fraction,
        labels: aligned[0].labels.clone(),
        topology,
        anchors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Vector3};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A small two-surface mesh so AnchorGroups can resolve; 10 landmarks.
    fn toy_topology() -> Arc<MeshTopology> {
        Arc::new(MeshTopology::from_grids(vec![
            crate::geom::SurfaceGrid {
                label: StructureLabel::LvEndo,
                start: 0,
                rings: 2,
                cols: 3,
            },
            crate::geom::SurfaceGrid {
                label: StructureLabel::RvEndo,
                start: 6,
                rings: 1,
                cols: 4,
            },
        ]))
    }

    fn toy_labels() -> Vec<StructureLabel> {
        let mut l = vec![StructureLabel::LvEndo; 6];
        l.extend(vec![StructureLabel::RvEndo; 4]);
        l
    }

    fn random_shape(rng: &mut ChaCha8Rng) -> PointSet {
        let points = (0..10)
            .map(|_| {
                Vector3::new(
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(-30.0..30.0),
                )
            })
            .collect();
        PointSet::new(points, toy_labels(), toy_topology()).unwrap()
    }

    fn perturb(base: &PointSet, rng: &mut ChaCha8Rng, sd: f64) -> PointSet {
        let points = base
            .points
            .iter()
            .map(|p| {
                p + Vector3::new(
                    rng.gen_range(-sd..sd),
                    rng.gen_range(-sd..sd),
                    rng.gen_range(-sd..sd),
                )
            })
            .collect();
        PointSet::new(points, base.labels.clone(), base.topology.clone()).unwrap()
    }

    fn rot_z(theta: f64) -> Matrix3<f64> {
        Matrix3::new(
            theta.cos(),
            -theta.sin(),
            0.0,
            theta.sin(),
            theta.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        )
    }

    #[test]
    fn identical_shapes_align_trivially() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_shape(&mut rng);
        let (aligned, mean) = procrustes_align(&[a.clone(), a.clone()]).unwrap();
        assert!(aligned[0].rms_distance(&aligned[1]) < 1e-9);
        assert!(mean.centroid().norm() < 1e-9);
        assert!((mean.centroid_size() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rigid_motions_align_to_machine_precision() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..4)
            .map(|i| {
                let t = SimilarityTransform {
                    scale: 1.0,
                    rotation: rot_z(0.3 * i as f64),
                    translation: Vector3::new(i as f64, -2.0 * i as f64, 0.5),
                };
                apply_transform(&t, &base)
            })
            .collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        for pair in aligned.windows(2) {
            assert!(pair[0].rms_distance(&pair[1]) < 1e-7);
        }
    }

    #[test]
    fn mean_recovered_under_random_similarity_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..20)
            .map(|_| {
                let t = SimilarityTransform {
                    scale: rng.gen_range(0.5..2.0),
                    rotation: rot_z(rng.gen_range(-1.0..1.0)),
                    translation: Vector3::new(
                        rng.gen_range(-20.0..20.0),
                        rng.gen_range(-20.0..20.0),
                        rng.gen_range(-20.0..20.0),
                    ),
                };
                apply_transform(&t, &base)
            })
            .collect();
        let (_, mean) = procrustes_align(&shapes).unwrap();
        // the consensus orientation is arbitrary; compare up to similarity
        let target = {
            let c = base.centroid();
            let size = base.centroid_size();
            let t = SimilarityTransform {
                scale: 1.0 / size,
                rotation: Matrix3::identity(),
                translation: -c / size,
            };
            apply_transform(&t, &base)
        };
        let fit = fit_similarity(&mean, &target).unwrap();
        let moved = apply_transform(&fit.transform, &mean);
        assert!(
            moved.rms_distance(&target) < 1e-6,
            "consensus deviates from generator mean: {}",
            moved.rms_distance(&target)
        );
    }

    #[test]
    fn mismatched_counts_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_shape(&mut rng);
        let topo = Arc::new(MeshTopology::from_grids(vec![crate::geom::SurfaceGrid {
            label: StructureLabel::LvEndo,
            start: 0,
            rings: 1,
            cols: 3,
        }]));
        let b = PointSet::new(
            vec![Vector3::zeros(), Vector3::x(), Vector3::y()],
            vec![StructureLabel::LvEndo; 3],
            topo,
        )
        .unwrap();
        assert!(matches!(
            procrustes_align(&[a, b]),
            Err(Error::CorrespondenceError(_))
        ));
    }

    #[test]
    fn identical_training_shapes_have_no_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_shape(&mut rng);
        let (aligned, _) = procrustes_align(&[a.clone(), a.clone(), a]).unwrap();
        assert!(matches!(
            train_pdm(&aligned, 0.95),
            Err(Error::InsufficientVariance(_))
        ));
    }

    #[test]
    fn single_direction_variation_yields_one_aligned_mode() {
        // construct x_bar +- alpha*v directly (already "aligned" data)
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let base = random_shape(&mut rng);
        let dir = {
            let mut v = DVector::from_fn(30, |i, _| ((i * 7 + 3) % 11) as f64 - 5.0);
            v /= v.norm();
            v
        };
        let mut shapes = Vec::new();
        for alpha in [-2.0, -1.0, 1.0, 2.0] {
            let flat = DVector::from_vec(base.flatten()) + alpha * &dir;
            shapes.push(PointSet::from_flat(flat.as_slice(), &base).unwrap());
        }
        let pdm = train_pdm(&shapes, 0.95).unwrap();
        assert_eq!(pdm.mode_count(), 1);
        let cos = pdm.modes.column(0).dot(&dir).abs();
        assert!(cos > 1.0 - 1e-9, "mode misaligned: |cos| = {cos}");
    }

    #[test]
    fn full_variance_keeps_s_minus_1_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..6).map(|_| perturb(&base, &mut rng, 2.0)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let pdm = train_pdm(&aligned, 1.0).unwrap();
        assert_eq!(pdm.mode_count(), shapes.len() - 1);
    }

    #[test]
    fn instance_identity_and_one_sd_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..5).map(|_| perturb(&base, &mut rng, 2.0)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let pdm = train_pdm(&aligned, 1.0).unwrap();

        let x0 = pdm.instance(&ShapeCoefficients::zeros(pdm.mode_count())).unwrap();
        assert!((DVector::from_vec(x0.flatten()) - &pdm.mean).norm() < 1e-12);

        let mut b = DVector::zeros(pdm.mode_count());
        b[0] = pdm.variances[0].sqrt();
        let x1 = pdm.instance(&ShapeCoefficients(b)).unwrap();
        let expected = &pdm.mean + pdm.variances[0].sqrt() * pdm.modes.column(0);
        assert!((DVector::from_vec(x1.flatten()) - expected).norm() < 1e-12);
    }

    #[test]
    fn project_recovers_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..6).map(|_| perturb(&base, &mut rng, 2.0)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let pdm = train_pdm(&aligned, 1.0).unwrap();

        let b0 = ShapeCoefficients(DVector::from_fn(pdm.mode_count(), |i, _| {
            0.01 * (i as f64 + 1.0)
        }));
        let x = pdm.instance(&b0).unwrap();
        let b = pdm.project(&x).unwrap();
        assert!((b.0 - &b0.0).norm() < 1e-10);

        // component orthogonal to the modes must not leak into b
        let mut v = DVector::from_fn(pdm.mean.len(), |i, _| ((i % 5) as f64) - 2.0);
        for j in 0..pdm.mode_count() {
            let col = pdm.modes.column(j);
            let dot = col.dot(&v);
            v -= dot * col.into_owned();
        }
        v /= v.norm();
        let x_off = DVector::from_vec(x.flatten()) + 0.05 * &v;
        let shifted = PointSet::from_flat(x_off.as_slice(), &x).unwrap();
        let b2 = pdm.project(&shifted).unwrap();
        assert!((b2.0 - &b0.0).norm() < 1e-10);
    }

    #[test]
    fn training_shapes_reconstruct_at_full_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..8).map(|_| perturb(&base, &mut rng, 3.0)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let pdm = train_pdm(&aligned, 1.0).unwrap();
        for a in &aligned {
            let b = pdm.project(a).unwrap();
            let rec = pdm.instance(&b).unwrap();
            assert!(rec.rms_distance(a) <= 1e-6);
        }
    }

    #[test]
    fn reconstruction_error_non_increasing_in_mode_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..8).map(|_| perturb(&base, &mut rng, 3.0)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let full = train_pdm(&aligned, 1.0).unwrap();

        let recon_rms = |t: usize| -> f64 {
            let modes = full.modes.columns(0, t).into_owned();
            aligned
                .iter()
                .map(|a| {
                    let x = DVector::from_vec(a.flatten());
                    let b = modes.transpose() * (&x - &full.mean);
                    let rec = &full.mean + &modes * b;
                    (rec - x).norm()
                })
                .sum::<f64>()
        };
        let mut prev = f64::INFINITY;
        for t in 1..=full.mode_count() {
            let e = recon_rms(t);
            assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn eigenvalues_match_brute_force_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..7).map(|_| perturb(&base, &mut rng, 2.5)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let pdm = train_pdm(&aligned, 1.0).unwrap();

        // brute force: full 3N x 3N covariance eigendecomposition
        let s = aligned.len();
        let dim = aligned[0].len() * 3;
        let mut mean = DVector::<f64>::zeros(dim);
        for a in &aligned {
            mean += DVector::from_vec(a.flatten());
        }
        mean /= s as f64;
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for a in &aligned {
            let d = DVector::from_vec(a.flatten()) - &mean;
            cov += &d * d.transpose();
        }
        cov /= (s - 1) as f64;
        let eig = nalgebra::SymmetricEigen::new(cov);
        let mut brute: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        brute.sort_by(|a, b| b.total_cmp(a));

        for (i, lambda) in pdm.variances.iter().enumerate() {
            let rel = (lambda - brute[i]).abs() / brute[i];
            assert!(rel < 1e-9, "eigenvalue {i}: rel error {rel}");
        }
    }

    #[test]
    fn clamp_clips_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..5).map(|_| perturb(&base, &mut rng, 2.0)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let pdm = train_pdm(&aligned, 1.0).unwrap();

        let inside = ShapeCoefficients(DVector::from_fn(pdm.mode_count(), |i, _| {
            0.5 * pdm.variances[i].sqrt()
        }));
        assert_eq!(pdm.clamp(&inside), inside);

        let mut big = DVector::zeros(pdm.mode_count());
        big[0] = 10.0 * pdm.variances[0].sqrt();
        let clamped = pdm.clamp(&ShapeCoefficients(big));
        assert!((clamped.0[0] - 3.0 * pdm.variances[0].sqrt()).abs() < 1e-12);
        assert_eq!(pdm.clamp(&clamped), clamped);
    }

    #[test]
    fn modes_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let base = random_shape(&mut rng);
        let shapes: Vec<PointSet> = (0..9).map(|_| perturb(&base, &mut rng, 2.0)).collect();
        let (aligned, _) = procrustes_align(&shapes).unwrap();
        let pdm = train_pdm(&aligned, 1.0).unwrap();
        let gram = pdm.modes.transpose() * &pdm.modes;
        let eye = DMatrix::<f64>::identity(pdm.mode_count(), pdm.mode_count());
        assert!((gram - eye).norm() < 1e-8);
        for w in pdm.variances.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }
}
