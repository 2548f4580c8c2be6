//! The results table: one row per manifest subject, written as a
//! deterministic CSV by a single writer.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quantify::IndexRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubjectStatus {
    Passed,
    ExcludedIqa,
    ExcludedSqa,
    Error,
}

impl SubjectStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SubjectStatus::Passed => "passed",
            SubjectStatus::ExcludedIqa => "excluded_iqa",
            SubjectStatus::ExcludedSqa => "excluded_sqa",
            SubjectStatus::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<SubjectStatus> {
        match s {
            "passed" => Some(SubjectStatus::Passed),
            "excluded_iqa" => Some(SubjectStatus::ExcludedIqa),
            "excluded_sqa" => Some(SubjectStatus::ExcludedSqa),
            "error" => Some(SubjectStatus::Error),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubjectRow {
    pub status: SubjectStatus,
    /// Exclusion or error reason tags, `;`-joined. Empty when passed.
    pub reason: String,
    pub indexes: Option<IndexRecord>,
    pub t_total_ms: f64,
}

/// Rows keyed (and therefore written) by subject id.
#[derive(Debug, Clone, Default)]
pub struct ResultsTable {
    pub rows: BTreeMap<String, SubjectRow>,
}

impl ResultsTable {
    pub fn insert(&mut self, subject_id: String, row: SubjectRow) {
        self.rows.insert(subject_id, row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, status: SubjectStatus) -> usize {
        self.rows.values().filter(|r| r.status == status).count()
    }
}

pub const RESULTS_HEADER: &str = "subject_id,status,reason,LVEDV_ml,LVESV_ml,LVSV_ml,LVEF_pct,LVM_g,RVEDV_ml,RVESV_ml,RVSV_ml,RVEF_pct,t_total_ms";

/// Writes the results CSV in fixed column order. Equal tables produce
/// byte-identical output; `zero_timing` additionally blanks the wall-clock
/// column so runs are byte-reproducible end to end.
pub fn write_results(table: &ResultsTable, path: &Path, zero_timing: bool) -> Result<()> {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for (id, row) in &table.rows {
        if row.status == SubjectStatus::Passed && row.indexes.is_none() {
            return Err(Error::QuantificationError(format!(
                "passed subject {id} has no index record"
            )));
        }
        out.push_str(id);
        out.push(',');
        out.push_str(row.status.as_str());
        out.push(',');
        out.push_str(&row.reason);
        match &row.indexes {
            Some(rec) => {
                for v in rec.column_values() {
                    out.push_str(&format!(",{v:.6}"));
                }
            }
            None => out.push_str(&",".repeat(9)),
        }
        let t = if zero_timing { 0.0 } else { row.t_total_ms };
        out.push_str(&format!(",{t:.3}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Parses a results CSV back into a table (indexes only for passed rows).
pub fn load_results(path: &Path) -> Result<ResultsTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = ResultsTable::default();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != RESULTS_HEADER {
                return Err(Error::format(path, "bad results header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(Error::format(
                path,
                format!("line {}: expected 13 fields", lineno + 1),
            ));
        }
        let status = SubjectStatus::parse(f[1])
            .ok_or_else(|| Error::format(path, format!("line {}: bad status", lineno + 1)))?;
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::format(path, format!("line {}: bad number", lineno + 1)))
        };
        let indexes = if status == SubjectStatus::Passed {
            Some(IndexRecord {
                lv_edv_ml: parse_f64(f[3])?,
                lv_esv_ml: parse_f64(f[4])?,
                lv_sv_ml: parse_f64(f[5])?,
                lv_ef_pct: parse_f64(f[6])?,
                lv_mass_g: parse_f64(f[7])?,
                rv_edv_ml: parse_f64(f[8])?,
                rv_esv_ml: parse_f64(f[9])?,
                rv_sv_ml: parse_f64(f[10])?,
                rv_ef_pct: parse_f64(f[11])?,
                ed_phase: 0,
                es_phase: 0,
            })
        } else {
            None
        };
        table.insert(
            f[0].to_string(),
            SubjectRow {
                status,
                reason: f[2].to_string(),
                indexes,
                t_total_ms: parse_f64(f[12])?,
            },
        );
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passed_row(edv: f64) -> SubjectRow {
        SubjectRow {
            status: SubjectStatus::Passed,
            reason: String::new(),
            indexes: Some(
                IndexRecord::from_volumes(edv, edv * 0.4, 90.0, 150.0, 70.0, 0, 1).unwrap(),
            ),
            t_total_ms: 123.456,
        }
    }

    #[test]
    fn empty_table_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_results(&ResultsTable::default(), &p, false).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, format!("{RESULTS_HEADER}\n"));
    }

    #[test]
    fn one_passed_row_has_nine_index_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let mut t = ResultsTable::default();
        t.insert("s01".into(), passed_row(140.0));
        write_results(&t, &p, false).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let data_line = text.lines().nth(1).unwrap();
        assert_eq!(data_line.split(',').count(), 13);
        assert!(data_line.starts_with("s01,passed,"));
    }

    #[test]
    fn rows_sorted_by_subject_regardless_of_insertion() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = ResultsTable::default();
        for id in ["s03", "s01", "s02"] {
            t.insert(id.into(), passed_row(120.0));
        }
        let p = dir.path().join("r.csv");
        write_results(&t, &p, false).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let ids: Vec<&str> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(ids, vec!["s01", "s02", "s03"]);

        // equal tables, equal bytes
        let p2 = dir.path().join("r2.csv");
        write_results(&t.clone(), &p2, false).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn round_trip_and_zero_timing() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = ResultsTable::default();
        t.insert("s01".into(), passed_row(111.0));
        t.insert(
            "s02".into(),
            SubjectRow {
                status: SubjectStatus::ExcludedIqa,
                reason: "missing_basal".into(),
                indexes: None,
                t_total_ms: 5.0,
            },
        );
        let p = dir.path().join("r.csv");
        write_results(&t, &p, true).unwrap();
        let loaded = load_results(&p).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded.rows["s02"].status, SubjectStatus::ExcludedIqa);
        assert_eq!(loaded.rows["s01"].t_total_ms, 0.0);
        assert!(loaded.rows["s01"].indexes.is_some());
    }
}
