//! Landmark shape files: a magic line, then little-endian binary counts,
//! surface ring grids, coordinates and labels. Self-contained — the mesh
//! topology is rebuilt from the stored grids on load.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::{MeshTopology, PointSet, StructureLabel, SurfaceGrid};

pub const SHAPE_MAGIC: &[u8] = b"VQPTS 1\n";

pub fn save_shape(shape: &PointSet, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);

    w.write_all(SHAPE_MAGIC).map_err(io_err)?;
    write_u32(&mut w, shape.len() as u32, path)?;
    let grids = &shape.topology.surfaces;
    write_u32(&mut w, grids.len() as u32, path)?;
    for g in grids {
        write_u32(&mut w, g.label.code(), path)?;
        write_u32(&mut w, g.start as u32, path)?;
        write_u32(&mut w, g.rings as u32, path)?;
        write_u32(&mut w, g.cols as u32, path)?;
    }
    for p in &shape.points {
        for c in [p.x, p.y, p.z] {
            w.write_all(&c.to_le_bytes()).map_err(io_err)?;
        }
    }
    for l in &shape.labels {
        write_u32(&mut w, l.code(), path)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn load_shape(path: &Path) -> Result<PointSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::format(path, "missing magic"))?;
    if magic != SHAPE_MAGIC {
        return Err(Error::format(path, "magic mismatch"));
    }

    let n_points = read_u32(&mut r, path)? as usize;
    let n_surfaces = read_u32(&mut r, path)? as usize;
    if n_surfaces > 16 {
        return Err(Error::format(path, "implausible surface count"));
    }
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

    let mut points = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let x = read_f64(&mut r, path)?;
        let y = read_f64(&mut r, path)?;
        let z = read_f64(&mut r, path)?;
        points.push(Vector3::new(x, y, z));
    }
    let mut labels = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        labels.push(
            StructureLabel::from_code(read_u32(&mut r, path)?)
                .ok_or_else(|| Error::format(path, "bad landmark label"))?,
        );
    }

    let topology = Arc::new(MeshTopology::from_grids(grids));
    if topology.landmark_count() != n_points {
        return Err(Error::format(path, "grids do not cover landmark count"));
    }
    PointSet::new(points, labels, topology).map_err(|e| Error::format(path, e.to_string()))
}

fn write_u32<W: Write>(w: &mut W, v: u32, path: &Path) -> Result<()> {
    w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_u32<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::format(path, "truncated file"))?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| Error::format(path, "truncated file"))?;
    Ok(f64::from_le_bytes(b))
}
