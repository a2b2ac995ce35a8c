//! Iso-attenuation contours by marching squares.
//!
//! Node values are converted to dB (floored at [`DB_FLOOR`]) and edges are
//! interpolated linearly in dB. Cells touching a masked node emit nothing.
//! Saddle cells are split according to the mean of their four corners.
//! Segments are produced in row-major cell order and chained through shared
//! grid edges, so output is fully deterministic.

use std::collections::HashMap;

use crate::zones::{attenuation_db_floored, AttenuationField, DB_FLOOR};
use crate::{Error, Result};

/// Ordered vertex list in field coordinates (m). A closed polyline does not
/// repeat its first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub vertices: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Polyline {
    /// Largest distance between any two vertices.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut best = 0.0f64;
        for (a, p) in v.iter().enumerate() {
            for q in &v[a + 1..] {
                best = best.max((p.0 - q.0).hypot(p.1 - q.1));
            }
        }
        best
    }

    /// Enclosed area by the shoelace rule.
    pub fn area(&self) -> Result<f64> {
        if !self.closed {
            return Err(Error::OpenPolyline);
        }
        let v = &self.vertices;
        let twice: f64 = (0..v.len())
            .map(|k| {
                let (x0, y0) = v[k];
                let (x1, y1) = v[(k + 1) % v.len()];
                x0 * y1 - x1 * y0
            })
            .sum();
        Ok(0.5 * twice.abs())
    }

    /// Width of the vertex projections onto the direction `(ux, uy)`.
    pub fn span_along(&self, ux: f64, uy: f64) -> f64 {
        let norm = ux.hypot(uy);
        let proj = self.vertices.iter().map(|(x, y)| (x * ux + y * uy) / norm);
        let (lo, hi) = proj.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p), hi.max(p))
        });
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }
}

/// All polylines of one iso-level.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSet {
    pub level_db: f64,
    pub polylines: Vec<Polyline>,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    /// The closed polyline enclosing the largest area, first one on ties.
    pub fn largest_closed(&self) -> Option<&Polyline> {
        let mut best: Option<(&Polyline, f64)> = None;
        for p in self.polylines.iter().filter(|p| p.closed) {
            let area = p.area().unwrap_or(0.0);
            if best.map_or(true, |(_, a)| area > a) {
                best = Some((p, area));
            }
        }
        best.map(|(p, _)| p)
    }
}

/// Size of a zone of quiet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourExtent {
    /// Largest vertex-to-vertex distance (m).
    pub max_diameter: f64,
    /// Enclosed area (m²).
    pub area: f64,
}

/// Extent of the largest closed polyline in `contours`.
pub fn contour_extent(contours: &ContourSet) -> Result<ContourExtent> {
    let poly = contours.largest_closed().ok_or(Error::NoClosedContour)?;
    Ok(ContourExtent {
        max_diameter: poly.diameter(),
        area: poly.area()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    /// Between nodes (i, j) and (i + 1, j).
    Horizontal(usize, usize),
    /// Between nodes (i, j) and (i, j + 1).
    Vertical(usize, usize),
}

struct Grid<'a> {
    field: &'a AttenuationField,
    db: Vec<Option<f64>>,
    level: f64,
}

impl Grid<'_> {
    fn db(&self, i: usize, j: usize) -> Option<f64> {
        self.db[j * self.field.nx() + i]
    }

    /// Crossing point on an edge, always interpolated from its lower-index
    /// node so both adjacent cells produce identical coordinates.
    fn crossing(&self, edge: EdgeKey) -> (f64, f64) {
        let (i, j, di, dj) = match edge {
            EdgeKey::Horizontal(i, j) => (i, j, 1, 0),
            EdgeKey::Vertical(i, j) => (i, j, 0, 1),
        };
        let a = self.db(i, j).expect("unmasked edge");
        let b = self.db(i + di, j + dj).expect("unmasked edge");
        let t = ((self.level - a) / (b - a)).clamp(0.0, 1.0);
        let (x0, y0) = (self.field.x(i), self.field.y(j));
        let (x1, y1) = (self.field.x(i + di), self.field.y(j + dj));
        (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
    }
}

fn cell_segments(grid: &Grid<'_>, i: usize, j: usize, out: &mut Vec<[EdgeKey; 2]>) {
    let (Some(bl), Some(br), Some(tr), Some(tl)) = (
        grid.db(i, j),
        grid.db(i + 1, j),
        grid.db(i + 1, j + 1),
        grid.db(i, j + 1),
    ) else {
        return;
    };
    let level = grid.level;
    let case = (bl >= level) as u8
        | ((br >= level) as u8) << 1
        | ((tr >= level) as u8) << 2
        | ((tl >= level) as u8) << 3;

    let bottom = EdgeKey::Horizontal(i, j);
    let top = EdgeKey::Horizontal(i, j + 1);
    let left = EdgeKey::Vertical(i, j);
    let right = EdgeKey::Vertical(i + 1, j);
    let center_above = 0.25 * (bl + br + tr + tl) >= level;

    match case {
        0 | 15 => {}
        1 | 14 => out.push([left, bottom]),
        2 | 13 => out.push([bottom, right]),
        3 | 12 => out.push([left, right]),
        4 | 11 => out.push([right, top]),
        6 | 9 => out.push([bottom, top]),
        7 | 8 => out.push([left, top]),
        // bl and tr above
        5 if center_above => {
            out.push([left, top]);
            out.push([bottom, right]);
        }
        5 => {
            out.push([left, bottom]);
            out.push([right, top]);
        }
        // br and tl above
        10 if center_above => {
            out.push([left, bottom]);
            out.push([right, top]);
        }
        10 => {
            out.push([bottom, right]);
            out.push([left, top]);
        }
        _ => unreachable!(),
    }
}

/// Extracts the `level_db` iso-contour of `field` (ε converted to dB).
///
/// Returns an empty set when no cell straddles the level.
pub fn extract_iso_contour(field: &AttenuationField, level_db: f64) -> Result<ContourSet> {
    if !level_db.is_finite() || level_db < DB_FLOOR {
        return Err(Error::InvalidArgument(format!(
            "contour level must be finite and at least {DB_FLOOR} dB, got {level_db}"
        )));
    }
    let unmasked = field.values().iter().filter(|v| v.is_some()).count();
    if unmasked < 4 {
        return Err(Error::InvalidArgument(
            "field needs at least 2x2 unmasked nodes".into(),
        ));
    }
    let grid = Grid {
        field,
        db: field
            .values()
            .iter()
            .map(|v| v.map(attenuation_db_floored))
            .collect(),
        level: level_db,
    };

    let mut segments = Vec::new();
    for j in 0..field.ny() - 1 {
        for i in 0..field.nx() - 1 {
            cell_segments(&grid, i, j, &mut segments);
        }
    }

    let mut by_edge: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for edge in seg {
            by_edge.entry(*edge).or_default().push(s);
        }
    }
    let other_segment = |edge: EdgeKey, from: usize| -> Option<usize> {
        by_edge[&edge].iter().copied().find(|&s| s != from)
    };
    let other_end = |seg: usize, edge: EdgeKey| -> EdgeKey {
        let [a, b] = segments[seg];
        if a == edge {
            b
        } else {
            a
        }
    };

    let mut visited = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let [first, second] = segments[start];

        // forward from `second`
        let mut forward = vec![first, second];
        let mut closed = false;
        let (mut seg, mut edge) = (start, second);
        while let Some(next) = other_segment(edge, seg) {
            if next == start {
                closed = true;
                break;
            }
            if visited[next] {
                break;
            }
            visited[next] = true;
            edge = other_end(next, edge);
            seg = next;
            forward.push(edge);
        }
        if closed {
            // the last pushed edge is `first` again
            forward.pop();
        } else {
            // backward from `first`
            let mut backward = Vec::new();
            let (mut seg, mut edge) = (start, first);
            while let Some(next) = other_segment(edge, seg) {
                if visited[next] {
                    break;
                }
                visited[next] = true;
                edge = other_end(next, edge);
                seg = next;
                backward.push(edge);
            }
            backward.reverse();
            backward.extend(forward);
            forward = backward;
        }

        let mut vertices: Vec<(f64, f64)> = forward.into_iter().map(|e| grid.crossing(e)).collect();
        vertices.dedup();
        if closed && vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() >= 2 {
            polylines.push(Polyline { vertices, closed });
        }
    }

    Ok(ContourSet {
        level_db,
        polylines,
    })
}
