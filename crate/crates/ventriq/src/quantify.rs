//! Quantification: disk-summation volumes and the nine functional indexes.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::Contour;

/// The nine functional indexes plus the phases they were measured at.
/// Stroke volumes and ejection fractions are derived, never stored
/// independently, so the SV/EF identities hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexRecord {
    pub lv_edv_ml: f64,
    pub lv_esv_ml: f64,
    pub lv_sv_ml: f64,
    pub lv_ef_pct: f64,
    pub lv_mass_g: f64,
    pub rv_edv_ml: f64,
    pub rv_esv_ml: f64,
    pub rv_sv_ml: f64,
    pub rv_ef_pct: f64,
    pub ed_phase: usize,
    pub es_phase: usize,
}

impl IndexRecord {
    /// Builds a record from measured volumes, deriving SV and EF.
    /// Fails when either end-diastolic volume is zero (EF undefined).
    pub fn from_volumes(
        lv_edv_ml: f64,
        lv_esv_ml: f64,
        lv_mass_g: f64,
        rv_edv_ml: f64,
        rv_esv_ml: f64,
        ed_phase: usize,
        es_phase: usize,
    ) -> Result<IndexRecord> {
        if lv_edv_ml <= 0.0 || rv_edv_ml <= 0.0 {
            return Err(Error::QuantificationError(
                "zero end-diastolic volume, ejection fraction undefined".into(),
            ));
        }
        let lv_sv = lv_edv_ml - lv_esv_ml;
        let rv_sv = rv_edv_ml - rv_esv_ml;
        Ok(IndexRecord {
            lv_edv_ml,
            lv_esv_ml,
            lv_sv_ml: lv_sv,
            lv_ef_pct: 100.0 * lv_sv / lv_edv_ml,
            lv_mass_g,
            rv_edv_ml,
            rv_esv_ml,
            rv_sv_ml: rv_sv,
            rv_ef_pct: 100.0 * rv_sv / rv_edv_ml,
            ed_phase,
            es_phase,
        })
    }

    /// Checks the SV = EDV - ESV and EF = 100 SV / EDV identities exactly
    /// (same floating-point operations as construction).
    pub fn identities_hold(&self) -> bool {
        self.lv_sv_ml == self.lv_edv_ml - self.lv_esv_ml
            && self.rv_sv_ml == self.rv_edv_ml - self.rv_esv_ml
            && self.lv_ef_pct == 100.0 * self.lv_sv_ml / self.lv_edv_ml
            && self.rv_ef_pct == 100.0 * self.rv_sv_ml / self.rv_edv_ml
    }

    /// Values in results-table column order.
    pub fn column_values(&self) -> [f64; 9] {
        [
            self.lv_edv_ml,
            self.lv_esv_ml,
            self.lv_sv_ml,
            self.lv_ef_pct,
            self.lv_mass_g,
            self.rv_edv_ml,
            self.rv_esv_ml,
            self.rv_sv_ml,
            self.rv_ef_pct,
        ]
    }

    pub const COLUMN_NAMES: [&'static str; 9] = [
        "LVEDV_ml", "LVESV_ml", "LVSV_ml", "LVEF_pct", "LVM_g", "RVEDV_ml", "RVESV_ml",
        "RVSV_ml", "RVEF_pct",
    ];
}

/// Disk-summation volume: per-slice polygon area times slice spacing,
/// summed and converted to mL. Slices without a contour contribute zero.
pub fn simpson_volume(contours: &[Contour], slice_spacing_mm: f64) -> Result<f64> {
    if contours.is_empty() {
        return Err(Error::EmptySegmentation("no contours".into()));
    }
    if slice_spacing_mm <= 0.0 {
        return Err(Error::ConfigError("slice spacing must be > 0".into()));
    }
    // one disk per slice index; duplicate slice entries would double-count
    let mut per_slice: BTreeMap<usize, f64> = BTreeMap::new();
    for c in contours {
        *per_slice.entry(c.slice_index).or_insert(0.0) += c.area();
    }
    let mm3: f64 = per_slice.values().map(|a| a * slice_spacing_mm).sum();
    Ok(mm3 / 1000.0)
}

/// ED = phase with maximal volume, ES = minimal; ties break to the lowest
/// phase index.
pub fn select_phases(per_phase_lv_volume_ml: &[f64]) -> Result<(usize, usize)> {
    if per_phase_lv_volume_ml.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} phases, need >= 2 to select ED/ES",
            per_phase_lv_volume_ml.len()
        )));
    }
    let mut ed = 0;
    let mut es = 0;
    for (i, &v) in per_phase_lv_volume_ml.iter().enumerate() {
        if v > per_phase_lv_volume_ml[ed] {
            ed = i;
        }
        if v < per_phase_lv_volume_ml[es] {
            es = i;
        }
    }
    Ok((ed, es))
}

/// Per-structure contour sets for one cardiac phase.
#[derive(Debug, Clone, Default)]
pub struct PhaseContours {
    pub lv_endo: Vec<Contour>,
    pub lv_epi: Vec<Contour>,
    pub rv_endo: Vec<Contour>,
}

/// Computes the full index record from ED and ES contour sets.
///
/// Myocardial mass is (epicardial - endocardial) volume at ED times tissue
/// density. A negative stroke volume is preserved (not an error) so the
/// population audit can see it.
pub fn compute_indexes(
    ed: &PhaseContours,
    es: &PhaseContours,
    slice_spacing_mm: f64,
    density_g_per_ml: f64,
    ed_phase: usize,
    es_phase: usize,
) -> Result<IndexRecord> {
    let lv_edv = simpson_volume(&ed.lv_endo, slice_spacing_mm)?;
    let lv_esv = simpson_volume(&es.lv_endo, slice_spacing_mm)?;
    let lv_epi_edv = simpson_volume(&ed.lv_epi, slice_spacing_mm)?;
    let rv_edv = simpson_volume(&ed.rv_endo, slice_spacing_mm)?;
    let rv_esv = simpson_volume(&es.rv_endo, slice_spacing_mm)?;
    let mass = (lv_epi_edv - lv_edv) * density_g_per_ml;
    IndexRecord::from_volumes(lv_edv, lv_esv, mass, rv_edv, rv_esv, ed_phase, es_phase)
}
