//! Voxel grids with physical coordinates.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Acquisition view of a volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum View {
    /// Short axis: a stack of parallel slices through the ventricles.
    Sax,
    /// Long axis: a plane cutting along the heart's long axis.
    Lax,
}

impl View {
    pub fn as_str(&self) -> &'static str {
        match self {
            View::Sax => "SAX",
            View::Lax => "LAX",
        }
    }

    pub fn parse(s: &str) -> Option<View> {
        match s {
            "SAX" => Some(View::Sax),
            "LAX" => Some(View::Lax),
            _ => None,
        }
    }
}

/// A 3D scalar grid with physical spacing, origin and orientation.
///
/// World coordinates are `origin + orientation * (index .* spacing)` in mm.
/// Data is stored x-fastest, then y, then z.
#[derive(Debug, Clone)]
pub struct VoxelVolume {
    pub dims: (usize, usize, usize),
    /// In-plane pixel spacing (sx, sy) and inter-slice distance sz, in mm.
    pub spacing: (f64, f64, f64),
    pub origin: Vector3<f64>,
    /// Columns are the direction cosines of the voxel i, j, k axes.
    pub orientation: Matrix3<f64>,
    pub data: Vec<u16>,
    pub subject: String,
    pub phase: usize,
    pub view: View,
}

impl VoxelVolume {
    /// Builds a volume, validating dimension, spacing and orientation invariants.
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        origin: Vector3<f64>,
        orientation: Matrix3<f64>,
        data: Vec<u16>,
        subject: String,
        phase: usize,
        view: View,
    ) -> Result<Self> {
        if dims.0 < 1 || dims.1 < 1 || dims.2 < 1 {
            return Err(Error::DimensionError(format!("dims must be >= 1, got {dims:?}")));
        }
        if spacing.0 <= 0.0 || spacing.1 <= 0.0 || spacing.2 <= 0.0 {
            return Err(Error::DimensionError(format!(
                "spacing must be > 0, got {spacing:?}"
            )));
        }
        let gram = orientation.transpose() * orientation;
        if (gram - Matrix3::identity()).norm() > 1e-6 {
            return Err(Error::DimensionError(
                "orientation columns not orthonormal".into(),
            ));
        }
        let expected = dims.0 * dims.1 * dims.2;
        if data.len() != expected {
            return Err(Error::DimensionError(format!(
                "data length {} does not match dims product {}",
                data.len(),
                expected
            )));
        }
        Ok(VoxelVolume {
            dims,
            spacing,
            origin,
            orientation,
            data,
            subject,
            phase,
            view,
        })
    }

    #[inline]
    pub fn voxel_count(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> u16 {
        self.data[(k * self.dims.1 + j) * self.dims.0 + i]
    }

    /// World position (mm) of an integer voxel index.
    pub fn voxel_to_world(&self, index: (i64, i64, i64)) -> Result<Vector3<f64>> {
        let (i, j, k) = index;
        let (nx, ny, nz) = self.dims;
        if i < 0 || j < 0 || k < 0 || i >= nx as i64 || j >= ny as i64 || k >= nz as i64 {
            return Err(Error::IndexError {
                index,
                dims: self.dims,
            });
        }
        Ok(self.index_to_world_unchecked(i as f64, j as f64, k as f64))
    }

    #[inline]
    pub(crate) fn index_to_world_unchecked(&self, i: f64, j: f64, k: f64) -> Vector3<f64> {
        let scaled = Vector3::new(i * self.spacing.0, j * self.spacing.1, k * self.spacing.2);
        self.origin + self.orientation * scaled
    }

    /// Continuous voxel index of a world point (inverse of `voxel_to_world`).
    pub fn world_to_index(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let local = self.orientation.transpose() * (p - self.origin);
        Vector3::new(
            local.x / self.spacing.0,
            local.y / self.spacing.1,
            local.z / self.spacing.2,
        )
    }

    /// Trilinear interpolation at a world point. Points outside the grid
    /// take the nearest boundary value (the continuous index is clamped).
    pub fn sample_world(&self, p: &Vector3<f64>) -> f64 {
        let idx = self.world_to_index(p);
        self.sample_index(idx.x, idx.y, idx.z)
    }

    /// Trilinear interpolation at a continuous voxel index, clamped to the grid.
    pub fn sample_index(&self, x: f64, y: f64, z: f64) -> f64 {
        let (nx, ny, nz) = self.dims;
        let x = x.clamp(0.0, (nx - 1) as f64);
        let y = y.clamp(0.0, (ny - 1) as f64);
        let z = z.clamp(0.0, (nz - 1) as f64);
        let x0 = (x.floor() as usize).min(nx - 1);
        let y0 = (y.floor() as usize).min(ny - 1);
        let z0 = (z.floor() as usize).min(nz - 1);
        let x1 = (x0 + 1).min(nx - 1);
        let y1 = (y0 + 1).min(ny - 1);
        let z1 = (z0 + 1).min(nz - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let fz = z - z0 as f64;

        let v = |i: usize, j: usize, k: usize| self.at(i, j, k) as f64;
        let c00 = v(x0, y0, z0) * (1.0 - fx) + v(x1, y0, z0) * fx;
        let c10 = v(x0, y1, z0) * (1.0 - fx) + v(x1, y1, z0) * fx;
        let c01 = v(x0, y0, z1) * (1.0 - fx) + v(x1, y0, z1) * fx;
        let c11 = v(x0, y1, z1) * (1.0 - fx) + v(x1, y1, z1) * fx;
        let c0 = c00 * (1.0 - fy) + c10 * fy;
        let c1 = c01 * (1.0 - fy) + c11 * fy;
        c0 * (1.0 - fz) + c1 * fz
    }

    /// Plane equation (unit normal, offset) of slice `k`: `n . p = d`.
    pub fn slice_plane(&self, k: usize) -> (Vector3<f64>, f64) {
        let normal = self.orientation.column(2).into_owned();
        let point = self.index_to_world_unchecked(0.0, 0.0, k as f64);
        let d = normal.dot(&point);
        (normal, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_volume(dims: (usize, usize, usize), spacing: (f64, f64, f64)) -> VoxelVolume {
        let n = dims.0 * dims.1 * dims.2;
        VoxelVolume::new(
            dims,
            spacing,
            Vector3::zeros(),
            Matrix3::identity(),
            vec![0; n],
            "t".into(),
            0,
            View::Sax,
        )
        .unwrap()
    }

    #[test]
    fn voxel_to_world_definition() {
        let mut v = simple_volume((4, 4, 2), (2.0, 2.0, 10.0));
        assert_eq!(
            v.voxel_to_world((1, 1, 1)).unwrap(),
            Vector3::new(2.0, 2.0, 10.0)
        );
        assert_eq!(v.voxel_to_world((0, 0, 0)).unwrap(), Vector3::zeros());

        v.origin = Vector3::new(5.0, 0.0, 0.0);
        v.spacing = (1.8, 1.8, 10.0);
        let p = v.voxel_to_world((3, 0, 0)).unwrap();
        assert!((p - Vector3::new(5.0 + 3.0 * 1.8, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn voxel_to_world_range_checked() {
        let v = simple_volume((4, 4, 2), (1.0, 1.0, 1.0));
        assert!(matches!(
            v.voxel_to_world((4, 0, 0)),
            Err(Error::IndexError { .. })
        ));
        assert!(matches!(
            v.voxel_to_world((0, -1, 0)),
            Err(Error::IndexError { .. })
        ));
    }

    #[test]
    fn voxel_to_world_is_affine() {
        let mut v = simple_volume((8, 8, 4), (1.8, 2.1, 8.0));
        v.origin = Vector3::new(3.0, -2.0, 7.0);
        let step = |a: (i64, i64, i64), b: (i64, i64, i64)| {
            v.voxel_to_world(b).unwrap() - v.voxel_to_world(a).unwrap()
        };
        let d1 = step((0, 0, 0), (1, 2, 1));
        let d2 = step((3, 4, 2), (4, 6, 3));
        assert!((d1 - d2).norm() < 1e-12);
    }

    #[test]
    fn trilinear_matches_grid_values_and_clamps() {
        let mut v = simple_volume((3, 3, 3), (1.0, 1.0, 1.0));
        for k in 0..3 {
            for j in 0..3 {
                for i in 0..3 {
                    v.data[(k * 3 + j) * 3 + i] = (100 * i + 10 * j + k) as u16;
                }
            }
        }
        assert_eq!(v.sample_index(1.0, 2.0, 0.0), 120.0);
        // midpoint between (0,0,0)=0 and (1,0,0)=100
        assert_eq!(v.sample_index(0.5, 0.0, 0.0), 50.0);
        // outside: clamped to the boundary value
        assert_eq!(v.sample_index(-5.0, 0.0, 0.0), 0.0);
        assert_eq!(v.sample_index(10.0, 2.0, 2.0), 222.0);
    }

    #[test]
    fn invalid_construction_rejected() {
        let r = VoxelVolume::new(
            (2, 2, 1),
            (1.0, 1.0, 1.0),
            Vector3::zeros(),
            Matrix3::identity(),
            vec![0; 3],
            "t".into(),
            0,
            View::Sax,
        );
        assert!(r.is_err());
    }
}
