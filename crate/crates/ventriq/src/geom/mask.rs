//! Voxel label masks produced by rasterization and used by quality
//! assessment and overlap metrics.

/// Region code of one voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum RegionLabel {
    Background = 0,
    LvBlood = 1,
    LvMyo = 2,
    RvBlood = 3,
}

impl RegionLabel {
    pub fn from_code(c: u8) -> RegionLabel {
        match c {
            1 => RegionLabel::LvBlood,
            2 => RegionLabel::LvMyo,
            3 => RegionLabel::RvBlood,
            _ => RegionLabel::Background,
        }
    }
}

/// A dense label grid aligned with a source volume (same dims and spacing).
#[derive(Debug, Clone)]
pub struct LabelMask {
    pub dims: (usize, usize, usize),
    pub spacing: (f64, f64, f64),
    pub data: Vec<u8>,
}

impl LabelMask {
    pub fn empty(dims: (usize, usize, usize), spacing: (f64, f64, f64)) -> LabelMask {
        LabelMask {
            dims,
            spacing,
            data: vec![0; dims.0 * dims.1 * dims.2],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> RegionLabel {
        RegionLabel::from_code(self.data[(k * self.dims.1 + j) * self.dims.0 + i])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, label: RegionLabel) {
        self.data[(k * self.dims.1 + j) * self.dims.0 + i] = label as u8;
    }

    pub fn count(&self, label: RegionLabel) -> usize {
        let code = label as u8;
        self.data.iter().filter(|&&v| v == code).count()
    }

    /// Volume of one region in mL.
    pub fn region_volume_ml(&self, label: RegionLabel) -> f64 {
        let voxel_mm3 = self.spacing.0 * self.spacing.1 * self.spacing.2;
        self.count(label) as f64 * voxel_mm3 / 1000.0
    }

    pub fn is_all_background(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }
}
