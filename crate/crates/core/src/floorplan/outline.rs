//! Boundary tracing for the union of a unit's cells.

use serde::{Deserialize, Serialize};

use super::geometry::{corner_angle, perimeter, signed_area, Point};
use super::spec::UnitId;
use super::voronoi::{Side, Tessellation};

const JOIN_TOLERANCE: f64 = 1e-6;

/// Closed boundary rings of one unit. Outer rings wind counter-clockwise,
/// holes clockwise; the closing vertex is not repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomOutline {
    pub rings: Vec<Vec<Point>>,
    /// Sum of the cell areas.
    pub area: f64,
}

impl RoomOutline {
    pub fn trace(tess: &Tessellation, assignment: &[Option<UnitId>], room: UnitId) -> Self {
        let mut segments: Vec<(Point, Point)> = Vec::new();
        let mut area = 0.0;
        for (c, owner) in assignment.iter().enumerate() {
            if *owner != Some(room) {
                continue;
            }
            let cell = tess.cell(c);
            area += cell.area;
            let n = cell.vertices.len();
            for k in 0..n {
                let outside = match cell.sides[k] {
                    Side::Border(_) => true,
                    Side::Cell(j) => assignment[j as usize] != Some(room),
                };
                if outside {
                    segments.push((cell.vertices[k], cell.vertices[(k + 1) % n]));
                }
            }
        }
        Self { rings: chain(&segments), area }
    }

    pub fn outer_rings(&self) -> impl Iterator<Item = &Vec<Point>> {
        self.rings.iter().filter(|r| signed_area(r) > 0.0)
    }

    /// Length of the outer boundary, holes excluded.
    pub fn outer_perimeter(&self) -> f64 {
        self.outer_rings().map(|r| perimeter(r)).sum()
    }

    /// Angle between the two walls meeting at every boundary vertex.
    pub fn wall_angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for ring in &self.rings {
            let n = ring.len();
            for i in 0..n {
                out.push(corner_angle(ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]));
            }
        }
        out
    }
}

/// Joins directed segments (interior on the left) into closed rings. Where
/// several continuations meet at a vertex the sharpest left turn wins, which
/// splits pinched regions into separate simple rings.
fn chain(segments: &[(Point, Point)]) -> Vec<Vec<Point>> {
    let mut used = vec![false; segments.len()];
    let mut rings = Vec::new();
    for first in 0..segments.len() {
        if used[first] {
            continue;
        }
        used[first] = true;
        let mut ring = vec![segments[first].0];
        let mut current = first;
        loop {
            let (from, end) = segments[current];
            let incoming = end - from;
            let mut best: Option<(usize, f64)> = None;
            for (idx, &(s, e)) in segments.iter().enumerate() {
                let available = !used[idx] || idx == first;
                if !available || s.distance(end) > JOIN_TOLERANCE {
                    continue;
                }
                let out = e - s;
                let turn = incoming.cross(out).atan2(incoming.dot(out));
                if best.is_none_or(|(_, t)| turn > t) {
                    best = Some((idx, turn));
                }
            }
            match best {
                Some((idx, _)) if idx != first => {
                    used[idx] = true;
                    ring.push(segments[idx].0);
                    current = idx;
                }
                _ => break,
            }
        }
        let ring = simplify(ring);
        if ring.len() >= 3 {
            rings.push(ring);
        }
    }
    rings
}

/// Drops repeated vertices and vertices on a straight run of wall.
fn simplify(mut ring: Vec<Point>) -> Vec<Point> {
    loop {
        let n = ring.len();
        if n < 3 {
            return ring;
        }
        let drop = (0..n).find(|&i| {
            let (prev, at, next) = (ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]);
            let (a, b) = (at - prev, next - at);
            if a.norm() < JOIN_TOLERANCE || b.norm() < JOIN_TOLERANCE {
                return true;
            }
            a.cross(b).abs() <= JOIN_TOLERANCE * a.norm() * b.norm() && a.dot(b) > 0.0
        });
        match drop {
            Some(i) => {
                ring.remove(i);
            }
            None => return ring,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floorplan::geometry::{is_simple_ring, Bounds};
    use std::f64::consts::FRAC_PI_2;

    fn grid_sites(cols: usize, rows: usize) -> Vec<Point> {
        let mut v = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                v.push(Point::new(c as f64 + 0.5, r as f64 + 0.5));
            }
        }
        v
    }

    #[test]
    fn square_room_on_a_grid() {
        let bounds = Bounds { width: 4.0, height: 4.0 };
        // a near-regular grid; tiny offsets keep the triangulation generic
        let sites: Vec<Point> = grid_sites(4, 4)
            .into_iter()
            .enumerate()
            .map(|(i, p)| Point::new(p.x + 1e-7 * (i % 3) as f64, p.y))
            .collect();
        let tess = Tessellation::build(&sites, bounds).unwrap();
        let mut assignment = vec![None; 16];
        for c in [5, 6, 9, 10] {
            assignment[c] = Some(UnitId(1));
        }
        let outline = RoomOutline::trace(&tess, &assignment, UnitId(1));
        assert_eq!(outline.rings.len(), 1);
        assert_eq!(outline.rings[0].len(), 4, "{:?}", outline.rings[0]);
        assert!((outline.area - 4.0).abs() < 1e-5);
        assert!((outline.outer_perimeter() - 8.0).abs() < 1e-5);
        for a in outline.wall_angles() {
            assert!((a - FRAC_PI_2).abs() < 1e-5);
        }
    }

    #[test]
    fn ring_with_a_hole() {
        let bounds = Bounds { width: 3.0, height: 3.0 };
        let sites = grid_sites(3, 3);
        let tess = Tessellation::build_exhaustive(&sites, bounds).unwrap();
        let assignment: Vec<Option<UnitId>> = (0..9).map(|c| if c == 4 { None } else { Some(UnitId(2)) }).collect();
        let outline = RoomOutline::trace(&tess, &assignment, UnitId(2));
        assert_eq!(outline.rings.len(), 2);
        assert_eq!(outline.outer_rings().count(), 1);
        assert!((outline.outer_perimeter() - 12.0).abs() < 1e-9);
        assert_eq!(outline.wall_angles().len(), 8);
    }

    #[test]
    fn diagonal_pinch_splits_into_simple_rings() {
        let bounds = Bounds { width: 2.0, height: 2.0 };
        let tess = Tessellation::build_exhaustive(&grid_sites(2, 2), bounds).unwrap();
        // cells 0 and 3 touch only at the centre point
        let assignment = vec![Some(UnitId(1)), None, None, Some(UnitId(1))];
        let outline = RoomOutline::trace(&tess, &assignment, UnitId(1));
        assert_eq!(outline.rings.len(), 2);
        for ring in &outline.rings {
            assert_eq!(ring.len(), 4);
            assert!(is_simple_ring(ring));
        }
    }
}
