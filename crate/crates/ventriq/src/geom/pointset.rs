//! Landmark point sets and surface mesh topology.

use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Anatomical structure tag of a landmark or contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureLabel {
    LvEndo,
    LvEpi,
    RvEndo,
}

impl StructureLabel {
    pub const ALL: [StructureLabel; 3] =
        [StructureLabel::LvEndo, StructureLabel::LvEpi, StructureLabel::RvEndo];

    pub fn as_str(&self) -> &'static str {
        match self {
            StructureLabel::LvEndo => "LV_endo",
            StructureLabel::LvEpi => "LV_epi",
            StructureLabel::RvEndo => "RV_endo",
        }
    }

    pub fn code(&self) -> u32 {
        match self {
            StructureLabel::LvEndo => 0,
            StructureLabel::LvEpi => 1,
            StructureLabel::RvEndo => 2,
        }
    }

    pub fn from_code(c: u32) -> Option<StructureLabel> {
        match c {
            0 => Some(StructureLabel::LvEndo),
            1 => Some(StructureLabel::LvEpi),
            2 => Some(StructureLabel::RvEndo),
            _ => None,
        }
    }
}

/// One surface stored as a ring-major grid of landmarks: `rings` axial rings
/// of `cols` points each, starting at landmark index `start`. Ring 0 is the
/// basal end, the last ring the apical end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceGrid {
    pub label: StructureLabel,
    pub start: usize,
    pub rings: usize,
    pub cols: usize,
}

impl SurfaceGrid {
    #[inline]
    pub fn index(&self, ring: usize, col: usize) -> usize {
        self.start + ring * self.cols + col
    }

    pub fn len(&self) -> usize {
        self.rings * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Triangle connectivity plus the per-surface ring grids it was built from.
/// Shared unchanged between the model mean and every instance.
#[derive(Debug, Clone)]
pub struct MeshTopology {
    pub triangles: Vec<[usize; 3]>,
    pub surfaces: Vec<SurfaceGrid>,
}

impl MeshTopology {
    /// Builds the canonical triangulation of a set of ring grids: two
    /// triangles per quad between consecutive rings, wrapping in the
    /// column direction.
    pub fn from_grids(surfaces: Vec<SurfaceGrid>) -> MeshTopology {
        let mut triangles = Vec::new();
        for g in &surfaces {
            for r in 0..g.rings.saturating_sub(1) {
                for c in 0..g.cols {
                    let c1 = (c + 1) % g.cols;
                    let a = g.index(r, c);
                    let b = g.index(r, c1);
                    let d = g.index(r + 1, c);
                    let e = g.index(r + 1, c1);
                    triangles.push([a, b, e]);
                    triangles.push([a, e, d]);
                }
            }
        }
        MeshTopology {
            triangles,
            surfaces,
        }
    }

    pub fn landmark_count(&self) -> usize {
        self.surfaces.iter().map(|g| g.start + g.len()).max().unwrap_or(0)
    }

    pub fn surface(&self, label: StructureLabel) -> Option<&SurfaceGrid> {
        self.surfaces.iter().find(|g| g.label == label)
    }
}

/// An ordered set of 3D landmarks in mm with per-point structure labels and
/// shared triangle topology. Immutable by convention once constructed.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub points: Vec<Vector3<f64>>,
    pub labels: Vec<StructureLabel>,
    pub topology: Arc<MeshTopology>,
}

impl PointSet {
    pub fn new(
        points: Vec<Vector3<f64>>,
        labels: Vec<StructureLabel>,
        topology: Arc<MeshTopology>,
    ) -> Result<PointSet> {
        if points.len() != labels.len() {
            return Err(Error::CorrespondenceError(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
            return Err(Error::CorrespondenceError("non-finite coordinate".into()));
        }
        Ok(PointSet {
            points,
            labels,
            topology,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let mut c = Vector3::zeros();
        for p in &self.points {
            c += p;
        }
        c / self.points.len() as f64
    }

    /// Centroid size: sqrt of the sum of squared distances to the centroid.
    pub fn centroid_size(&self) -> f64 {
        let c = self.centroid();
        self.points.iter().map(|p| (p - c).norm_squared()).sum::<f64>().sqrt()
    }

    /// Per-landmark outward normals as area-weighted averages of incident
    /// triangle normals. Landmarks with no incident triangles (or a zero
    /// aggregate) get a zero normal.
    pub fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        let mut normals = vec![Vector3::zeros(); self.points.len()];
        for tri in &self.topology.triangles {
            let [a, b, c] = *tri;
            let ab = self.points[b] - self.points[a];
            let ac = self.points[c] - self.points[a];
            // cross product magnitude = 2 * area, so this is area weighting
            let n = ab.cross(&ac);
            normals[a] += n;
            normals[b] += n;
            normals[c] += n;
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 1e-12 {
                *n /= len;
            } else {
                *n = Vector3::zeros();
            }
        }
        normals
    }

    /// Flattens to a 3N vector (x0, y0, z0, x1, ...).
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.points.len() * 3);
        for p in &self.points {
            v.extend_from_slice(&[p.x, p.y, p.z]);
        }
        v
    }

    /// Rebuilds a point set from a flattened 3N vector, reusing labels and
    /// topology from `like`.
    pub fn from_flat(flat: &[f64], like: &PointSet) -> Result<PointSet> {
        if flat.len() != like.len() * 3 {
            return Err(Error::DimensionError(format!(
                "flat length {} does not match {} landmarks",
                flat.len(),
                like.len()
            )));
        }
        let points = flat
            .chunks_exact(3)
            .map(|c| Vector3::new(c[0], c[1], c[2]))
            .collect();
        PointSet::new(points, like.labels.clone(), like.topology.clone())
    }

    /// Root-mean-square pointwise distance to another set of equal length.
    pub fn rms_distance(&self, other: &PointSet) -> f64 {
        assert_eq!(self.len(), other.len());
        let ss: f64 = self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a - b).norm_squared())
            .sum();
        (ss / self.len() as f64).sqrt()
    }
}
