//! Planar contours on slice planes.

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::geom::StructureLabel;

/// A closed planar polygon on one slice, in in-plane mm coordinates.
/// The last vertex connects back to the first by convention.
#[derive(Debug, Clone)]
pub struct Contour {
    pub slice_index: usize,
    pub vertices: Vec<Vector2<f64>>,
    pub structure: StructureLabel,
}

impl Contour {
    /// Builds a contour, rejecting fewer than 3 vertices or pairwise
    /// self-intersecting edges.
    pub fn new(
        slice_index: usize,
        vertices: Vec<Vector2<f64>>,
        structure: StructureLabel,
    ) -> Result<Contour> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateContour(format!(
                "{} vertices, need at least 3",
                vertices.len()
            )));
        }
        if self_intersects(&vertices) {
            return Err(Error::DegenerateContour("self-intersecting polygon".into()));
        }
        Ok(Contour {
            slice_index,
            vertices,
            structure,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Absolute shoelace area in mm^2, independent of vertex orientation.
    pub fn area(&self) -> f64 {
        polygon_area_of(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).norm())
            .sum()
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

/// Absolute shoelace area of a closed polygon given by its vertices.
pub fn polygon_area_of(vertices: &[Vector2<f64>]) -> f64 {
    let n = vertices.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    twice.abs() * 0.5
}

/// Absolute shoelace area of a contour (>= 3 vertices required).
pub fn polygon_area(contour: &Contour) -> Result<f64> {
    if contour.vertices.len() < 3 {
        return Err(Error::DegenerateContour("fewer than 3 vertices".into()));
    }
    Ok(contour.area())
}

/// True when any pair of non-adjacent edges properly intersects.
/// O(n^2), fine at the contour sizes this pipeline produces.
fn self_intersects(vertices: &[Vector2<f64>]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let a1 = vertices[i];
        let a2 = vertices[(i + 1) % n];
        for j in (i + 1)..n {
            // skip adjacent edges (they share an endpoint)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let b1 = vertices[j];
            let b2 = vertices[(j + 1) % n];
            if segments_properly_intersect(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    false
}

fn segments_properly_intersect(
    a1: Vector2<f64>,
    a2: Vector2<f64>,
    b1: Vector2<f64>,
    b2: Vector2<f64>,
) -> bool {
    let d1 = cross2(b2 - b1, a1 - b1);
    let d2 = cross2(b2 - b1, a2 - b1);
    let d3 = cross2(a2 - a1, b1 - a1);
    let d4 = cross2(a2 - a1, b2 - a1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[inline]
fn cross2(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}
