//! Cohort manifest: the organized inventory of volume files per subject,
//! phase and view, with optional ground-truth shape paths.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::View;
use crate::io::volume_file::{load_volume_header, VOLUME_EXT};

/// One subject's inputs. Paths are relative to the manifest root.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubjectEntry {
    pub subject_id: String,
    /// Phases with a SAX stack, strictly increasing.
    pub phases: Vec<usize>,
    pub sax: BTreeMap<usize, PathBuf>,
    pub lax: BTreeMap<usize, Vec<PathBuf>>,
    /// Ground-truth shape per phase, when available.
    pub gt: BTreeMap<usize, PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortManifest {
    pub root: PathBuf,
    /// Sorted by subject id.
    pub subjects: Vec<SubjectEntry>,
}

impl CohortManifest {
    pub fn subject(&self, id: &str) -> Option<&SubjectEntry> {
        self.subjects.iter().find(|s| s.subject_id == id)
    }

    pub fn resolve(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }
}

/// Scans a directory tree for volume files and indexes them into a manifest.
///
/// Subject, phase and view come from the file headers, never from file
/// names. Ground truth is linked by convention: `truth/<subject>_p<phase>.pts`
/// under the scan root. Enumeration is sorted, so re-running on the same
/// tree yields an identical manifest.
pub fn organize(raw_dir: &Path) -> Result<CohortManifest> {
    let mut files = Vec::new();
    collect_volume_files(raw_dir, &mut files)?;
    files.sort();

    let mut subjects: BTreeMap<String, SubjectEntry> = BTreeMap::new();
    for path in files {
        let header = load_volume_header(&path)?;
        let rel = path
            .strip_prefix(raw_dir)
            .unwrap_or(&path)
            .to_path_buf();
        let entry = subjects
            .entry(header.subject.clone())
            .or_insert_with(|| SubjectEntry {
                subject_id: header.subject.clone(),
                ..Default::default()
            });
        match header.view {
            View::Sax => {
                if entry.sax.insert(header.phase, rel).is_some() {
                    return Err(Error::DuplicateEntry {
                        subject: header.subject,
                        phase: header.phase,
                        view: "SAX".into(),
                    });
                }
            }
            View::Lax => {
                entry.lax.entry(header.phase).or_default().push(rel);
            }
        }
    }

    for entry in subjects.values_mut() {
        entry.phases = entry.sax.keys().copied().collect();
        for &phase in &entry.phases {
            let gt_rel = PathBuf::from("truth").join(format!(
                "{}_p{}.pts",
                entry.subject_id, phase
            ));
            if raw_dir.join(&gt_rel).exists() {
                entry.gt.insert(phase, gt_rel);
            }
        }
    }

    Ok(CohortManifest {
        root: raw_dir.to_path_buf(),
        subjects: subjects.into_values().collect(),
    })
}

fn collect_volume_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut children: Vec<PathBuf> = Vec::new();
    for entry in entries {
        children.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    children.sort();
    for child in children {
        if child.is_dir() {
            collect_volume_files(&child, out)?;
        } else if child.extension().and_then(|e| e.to_str()) == Some(VOLUME_EXT) {
            out.push(child);
        }
    }
    Ok(())
}

/// Writes the manifest CSV: `subject_id,phase,view,path,gt_path`, rows
/// sorted by subject, phase, view, path. Deterministic byte output.
pub fn save_manifest(manifest: &CohortManifest, path: &Path) -> Result<()> {
    let mut rows: Vec<(String, usize, &str, String, String)> = Vec::new();
    for s in &manifest.subjects {
        for (&phase, sax) in &s.sax {
            let gt = s
                .gt
                .get(&phase)
                .map(|p| path_str(p))
                .unwrap_or_default();
            rows.push((s.subject_id.clone(), phase, "SAX", path_str(sax), gt));
        }
        for (&phase, laxes) in &s.lax {
            for lax in laxes {
                rows.push((s.subject_id.clone(), phase, "LAX", path_str(lax), String::new()));
            }
        }
    }
    rows.sort();

    let mut out = String::from("subject_id,phase,view,path,gt_path\n");
    for (id, phase, view, p, gt) in rows {
        out.push_str(&format!("{id},{phase},{view},{p},{gt}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

/// Loads a manifest and verifies that every referenced file exists.
pub fn load_manifest(path: &Path) -> Result<CohortManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));

    let mut subjects: BTreeMap<String, SubjectEntry> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "subject_id,phase,view,path,gt_path" {
                return Err(Error::format(path, "bad manifest header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::format(
                path,
                format!("line {}: expected 5 fields", lineno + 1),
            ));
        }
        let subject_id = fields[0].to_string();
        let phase: usize = fields[1]
            .parse()
            .map_err(|_| Error::format(path, format!("line {}: bad phase", lineno + 1)))?;
        let view = View::parse(fields[2])
            .ok_or_else(|| Error::format(path, format!("line {}: bad view", lineno + 1)))?;
        let vol_rel = PathBuf::from(fields[3]);
        if !root.join(&vol_rel).exists() {
            return Err(Error::format(
                path,
                format!("referenced path does not exist: {}", fields[3]),
            ));
        }
        let entry = subjects
            .entry(subject_id.clone())
            .or_insert_with(|| SubjectEntry {
                subject_id,
                ..Default::default()
            });
        match view {
            View::Sax => {
                if entry.sax.insert(phase, vol_rel).is_some() {
                    return Err(Error::DuplicateEntry {
                        subject: entry.subject_id.clone(),
                        phase,
                        view: "SAX".into(),
                    });
                }
                if !fields[4].is_empty() {
                    let gt_rel = PathBuf::from(fields[4]);
                    if !root.join(&gt_rel).exists() {
                        return Err(Error::format(
                            path,
                            format!("referenced gt path does not exist: {}", fields[4]),
                        ));
                    }
                    entry.gt.insert(phase, gt_rel);
                }
            }
            View::Lax => entry.lax.entry(phase).or_default().push(vol_rel),
        }
    }

    let mut list: Vec<SubjectEntry> = subjects.into_values().collect();
    for entry in &mut list {
        entry.phases = entry.sax.keys().copied().collect();
        if entry.phases.is_empty() {
            return Err(Error::format(
                path,
                format!("subject {} has no SAX volumes", entry.subject_id),
            ));
        }
    }
    Ok(CohortManifest {
        root,
        subjects: list,
    })
}
