//! The artifact volume format: a line-oriented UTF-8 header terminated by a
//! blank line, followed by raw unsigned 16-bit little-endian samples,
//! x-fastest, then y, then z.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geom::{View, VoxelVolume};

pub const VOLUME_MAGIC: &str = "VENTRIQ 1";
pub const VOLUME_EXT: &str = "vq";

/// Header fields of a volume file, readable without touching the payload.
#[derive(Debug, Clone)]
pub struct VolumeHeader {
    pub subject: String,
    pub view: View,
    pub phase: usize,
    pub dims: (usize, usize, usize),
    pub spacing: (f64, f64, f64),
    pub origin: Vector3<f64>,
    pub orientation: Matrix3<f64>,
}

pub fn save_volume(volume: &VoxelVolume, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);

    writeln!(w, "{VOLUME_MAGIC}").map_err(io_err)?;
    writeln!(w, "subject {}", volume.subject).map_err(io_err)?;
    writeln!(w, "view {}", volume.view.as_str()).map_err(io_err)?;
    writeln!(w, "phase {}", volume.phase).map_err(io_err)?;
    writeln!(w, "dims {} {} {}", volume.dims.0, volume.dims.1, volume.dims.2).map_err(io_err)?;
    writeln!(
        w,
        "spacing {} {} {}",
        volume.spacing.0, volume.spacing.1, volume.spacing.2
    )
    .map_err(io_err)?;
    writeln!(
        w,
        "origin {} {} {}",
        volume.origin.x, volume.origin.y, volume.origin.z
    )
    .map_err(io_err)?;
    let o = &volume.orientation;
    writeln!(
        w,
        "orient {} {} {} {} {} {} {} {} {}",
        o[(0, 0)],
        o[(0, 1)],
        o[(0, 2)],
        o[(1, 0)],
        o[(1, 1)],
        o[(1, 2)],
        o[(2, 0)],
        o[(2, 1)],
        o[(2, 2)]
    )
    .map_err(io_err)?;
    writeln!(w).map_err(io_err)?;

    let mut bytes = Vec::with_capacity(volume.data.len() * 2);
    for v in &volume.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    Ok(())
}

fn parse_header<R: BufRead>(reader: &mut R, path: &Path) -> Result<VolumeHeader> {
    let mut line = String::new();
    let mut read_line = |line: &mut String| -> Result<()> {
        line.clear();
        let n = reader.read_line(line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Err(Error::format(path, "unexpected end of header"));
        }
        while line.ends_with('\n') || line.ends_with('\r') {
            line.pop();
        }
        Ok(())
    };

    read_line(&mut line)?;
    if line != VOLUME_MAGIC {
        return Err(Error::format(path, format!("magic mismatch: `{line}`")));
    }

    let mut subject = None;
    let mut view = None;
    let mut phase = None;
    let mut dims = None;
    let mut spacing = None;
    let mut origin = None;
    let mut orientation = None;

    loop {
        read_line(&mut line)?;
        if line.is_empty() {
            break;
        }
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| Error::format(path, format!("malformed header line `{line}`")))?;
        let floats = |field: &str, n: usize| -> Result<Vec<f64>> {
            let vals: Vec<f64> = rest
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::format(path, format!("bad {field} value `{rest}`")))?;
            if vals.len() != n {
                return Err(Error::format(
                    path,
                    format!("{field} expects {n} values, got {}", vals.len()),
                ));
            }
            Ok(vals)
        };
        match key {
            "subject" => subject = Some(rest.to_string()),
            "view" => {
                view = Some(
                    View::parse(rest)
                        .ok_or_else(|| Error::format(path, format!("bad view `{rest}`")))?,
                )
            }
            "phase" => {
                phase = Some(
                    rest.parse::<usize>()
                        .map_err(|_| Error::format(path, format!("bad phase `{rest}`")))?,
                )
            }
            "dims" => {
                let v = floats("dims", 3)?;
                if v.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
                    return Err(Error::format(path, format!("bad dims `{rest}`")));
                }
                dims = Some((v[0] as usize, v[1] as usize, v[2] as usize));
            }
            "spacing" => {
                let v = floats("spacing", 3)?;
                if v.iter().any(|&x| x <= 0.0) {
                    return Err(Error::format(path, format!("bad spacing `{rest}`")));
                }
                spacing = Some((v[0], v[1], v[2]));
            }
            "origin" => {
                let v = floats("origin", 3)?;
                origin = Some(Vector3::new(v[0], v[1], v[2]));
            }
            "orient" => {
                let v = floats("orient", 9)?;
                orientation = Some(Matrix3::new(
                    v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8],
                ));
            }
            other => return Err(Error::format(path, format!("unknown header field `{other}`"))),
        }
    }

    Ok(VolumeHeader {
        subject: subject.ok_or_else(|| Error::format(path, "missing subject"))?,
        view: view.ok_or_else(|| Error::format(path, "missing view"))?,
        phase: phase.ok_or_else(|| Error::format(path, "missing phase"))?,
        dims: dims.ok_or_else(|| Error::format(path, "missing dims"))?,
        spacing: spacing.ok_or_else(|| Error::format(path, "missing spacing"))?,
        origin: origin.ok_or_else(|| Error::format(path, "missing origin"))?,
        orientation: orientation.ok_or_else(|| Error::format(path, "missing orient"))?,
    })
}

/// Reads only the header of a volume file.
pub fn load_volume_header(path: &Path) -> Result<VolumeHeader> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    parse_header(&mut reader, path)
}

pub fn load_volume(path: &Path) -> Result<VoxelVolume> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let header = parse_header(&mut reader, path)?;

    let expected = header.dims.0 * header.dims.1 * header.dims.2;
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != expected * 2 {
        return Err(Error::format(
            path,
            format!(
                "data length: {} samples in payload, dims require {expected}",
                bytes.len() / 2
            ),
        ));
    }
    let data: Vec<u16> = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();

    VoxelVolume::new(
        header.dims,
        header.spacing,
        header.origin,
        header.orientation,
        data,
        header.subject,
        header.phase,
        header.view,
    )
    .map_err(|e| Error::format(path, e.to_string()))
}
