//! Trained model persistence: a PDM blob with the appearance model appended.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::appearance::{AppearanceModel, LandmarkAppearance};
use crate::error::{Error, Result};
use crate::geom::{MeshTopology, StructureLabel, SurfaceGrid};
use crate::io::shape_file::{read_f64, read_u32};
use crate::shape::{AnchorGroups, PointDistributionModel};

pub const PDM_MAGIC: &[u8] = b"PDM 1\n";
pub const IAM_MAGIC: &[u8] = b"IAM 1\n";

pub fn save_models(
    pdm: &PointDistributionModel,
    iam: &AppearanceModel,
    path: &Path,
) -> Result<()> {
    if pdm.landmark_count() != iam.landmark_count() {
        return Err(Error::DimensionError(
            "PDM and IAM landmark counts differ".into(),
        ));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);

    let n = pdm.landmark_count();
    let t = pdm.mode_count();
    w.write_all(PDM_MAGIC).map_err(io_err)?;
    wu32(&mut w, n as u32, path)?;
    wu32(&mut w, t as u32, path)?;
    for v in pdm.mean.iter() {
        wf64(&mut w, *v, path)?;
    }
    for v in &pdm.variances {
        wf64(&mut w, *v, path)?;
    }
    for j in 0..t {
        for v in pdm.modes.column(j).iter() {
            wf64(&mut w, *v, path)?;
        }
    }
    wf64(&mut w, pdm.variance_fraction, path)?;
    for l in &pdm.labels {
        wu32(&mut w, l.code(), path)?;
    }
    wu32(&mut w, pdm.topology.surfaces.len() as u32, path)?;
    for g in &pdm.topology.surfaces {
        wu32(&mut w, g.label.code(), path)?;
        wu32(&mut w, g.start as u32, path)?;
        wu32(&mut w, g.rings as u32, path)?;
        wu32(&mut w, g.cols as u32, path)?;
    }
    for group in [&pdm.anchors.apex, &pdm.anchors.base, &pdm.anchors.rv_mid] {
        wu32(&mut w, group.len() as u32, path)?;
        for &i in group {
            wu32(&mut w, i as u32, path)?;
        }
    }

    w.write_all(IAM_MAGIC).map_err(io_err)?;
    wu32(&mut w, iam.half_len as u32, path)?;
    wf64(&mut w, iam.step_mm, path)?;
    wf64(&mut w, iam.train_q95, path)?;
    for lm in &iam.landmarks {
        for v in lm.mean.iter() {
            wf64(&mut w, *v, path)?;
        }
        for v in lm.covariance.iter() {
            wf64(&mut w, *v, path)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn load_models(path: &Path) -> Result<(PointDistributionModel, AppearanceModel)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    expect_magic(&mut r, PDM_MAGIC, path)?;
    let n = read_u32(&mut r, path)? as usize;
    let t = read_u32(&mut r, path)? as usize;
    let dim = 3 * n;
    let mut mean = DVector::zeros(dim);
    for i in 0..dim {
        mean[i] = read_f64(&mut r, path)?;
    }
    let mut variances = Vec::with_capacity(t);
    for _ in 0..t {
        variances.push(read_f64(&mut r, path)?);
    }
    let mut modes = DMatrix::zeros(dim, t);
    for j in 0..t {
        for i in 0..dim {
            modes[(i, j)] = read_f64(&mut r, path)?;
        }
    }
    let variance_fraction = read_f64(&mut r, path)?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(
            StructureLabel::from_code(read_u32(&mut r, path)?)
                .ok_or_else(|| Error::format(path, "bad landmark label"))?,
        );
    }
    let n_surfaces = read_u32(&mut r, path)? as usize;
    let mut grids = Vec::with_capacity(n_surfaces);
    for _ in 0..n_surfaces {
        let label = StructureLabel::from_code(read_u32(&mut r, path)?)
            .ok_or_else(|| Error::format(path, "bad surface label"))?;
        let start = read_u32(&mut r, path)? as usize;
        let rings = read_u32(&mut r, path)? as usize;
        let cols = read_u32(&mut r, path)? as usize;
        grids.push(SurfaceGrid {
            label,
            start,
            rings,
            cols,
        });
    }
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(3);
    for _ in 0..3 {
        let len = read_u32(&mut r, path)? as usize;
        let mut g = Vec::with_capacity(len);
        for _ in 0..len {
            g.push(read_u32(&mut r, path)? as usize);
        }
        groups.push(g);
    }
    let rv_mid = groups.pop().unwrap();
    let base = groups.pop().unwrap();
    let apex = groups.pop().unwrap();

    let topology = Arc::new(MeshTopology::from_grids(grids));
    if topology.landmark_count() != n {
        return Err(Error::format(path, "grids do not cover landmark count"));
    }
    let pdm = PointDistributionModel {
        mean,
        modes,
        variances,
        variance_fraction,
        labels,
        topology,
        anchors: AnchorGroups { apex, base, rv_mid },
    };

    expect_magic(&mut r, IAM_MAGIC, path)?;
    let k = read_u32(&mut r, path)? as usize;
    let step_mm = read_f64(&mut r, path)?;
    let train_q95 = read_f64(&mut r, path)?;
    let plen = 2 * k + 1;
    let mut landmarks = Vec::with_capacity(n);
    for _ in 0..n {
        let mut m = DVector::zeros(plen);
        for i in 0..plen {
            m[i] = read_f64(&mut r, path)?;
        }
        let mut cov = DMatrix::zeros(plen, plen);
        for i in 0..plen * plen {
            cov[(i % plen, i / plen)] = read_f64(&mut r, path)?;
        }
        landmarks.push(
            LandmarkAppearance::new(m, cov).map_err(|e| Error::format(path, e.to_string()))?,
        );
    }
    let iam = AppearanceModel {
        half_len: k,
        step_mm,
        landmarks,
        train_q95,
    };
    Ok((pdm, iam))
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8], path: &Path) -> Result<()> {
    let mut buf = vec![0u8; magic.len()];
    r.read_exact(&mut buf)
        .map_err(|_| Error::format(path, "truncated model file"))?;
    if buf != magic {
        return Err(Error::format(
            path,
            format!("magic mismatch, expected {:?}", String::from_utf8_lossy(magic)),
        ));
    }
    Ok(())
}

fn wu32<W: Write>(w: &mut W, v: u32, path: &Path) -> Result<()> {
    w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))
}

fn wf64<W: Write>(w: &mut W, v: f64, path: &Path) -> Result<()> {
    w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))
}
