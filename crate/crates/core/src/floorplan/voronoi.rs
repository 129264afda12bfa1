//! Voronoi tessellation clipped to the plot rectangle.
//!
//! Each cell is the plot rectangle clipped by the bisector half-planes of its
//! Delaunay neighbours. Every polygon edge remembers what lies on its other
//! side (a neighbouring cell or a plot border), which is all the layout code
//! needs for adjacency, shared wall lengths and opening placement.

use serde::{Deserialize, Serialize};

use super::geometry::{signed_area, Bounds, Point};
use crate::domain::DomainError;

/// Minimum distance between two sites.
pub const MIN_SITE_SEPARATION: f64 = 1e-6;

const MIN_EDGE_LENGTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorderSide {
    Bottom,
    Right,
    Top,
    Left,
}

/// What lies across a cell edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Cell(u32),
    Border(BorderSide),
}

/// Identifies an edge by the generators on both sides. For cell pairs `cell`
/// is the lower index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub cell: u32,
    pub other: Side,
}

impl EdgeKey {
    pub fn between(a: u32, b: u32) -> Self {
        Self { cell: a.min(b), other: Side::Cell(a.max(b)) }
    }

    pub fn border(cell: u32, side: BorderSide) -> Self {
        Self { cell, other: Side::Border(side) }
    }

    /// The cell on the far side from `from`, if any.
    pub fn across(&self, from: u32) -> Option<u32> {
        match self.other {
            Side::Cell(j) if self.cell == from => Some(j),
            Side::Cell(_) => Some(self.cell),
            Side::Border(_) => None,
        }
    }

    pub fn is_border(&self) -> bool {
        matches!(self.other, Side::Border(_))
    }
}

/// Convex cell polygon, counter-clockwise. `sides[i]` labels the edge from
/// `vertices[i]` to `vertices[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPolygon {
    pub vertices: Vec<Point>,
    pub sides: Vec<Side>,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub key: EdgeKey,
    pub start: Point,
    pub end: Point,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Tessellation {
    bounds: Bounds,
    sites: Vec<Point>,
    cells: Vec<CellPolygon>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
}

impl Tessellation {
    pub fn build(sites: &[Point], bounds: Bounds) -> Result<Self, DomainError> {
        validate_sites(sites, bounds)?;
        let neighbours = delaunay_neighbours(sites);
        let mut cells: Vec<CellPolygon> = (0..sites.len())
            .map(|i| clip_cell(sites, i, neighbours[i].iter().copied(), bounds))
            .collect();
        let total: f64 = cells.iter().map(|c| c.area).sum();
        if (total - bounds.area()).abs() > 1e-7 * bounds.area() {
            // triangulation missed a neighbour somewhere (near-collinear input)
            cells = brute_force_cells(sites, bounds);
        }
        Ok(Self::assemble(sites, bounds, cells))
    }

    /// Tessellation that clips every cell against every other site. Quadratic;
    /// kept as an independent reference for the Delaunay-driven path.
    pub fn build_exhaustive(sites: &[Point], bounds: Bounds) -> Result<Self, DomainError> {
        validate_sites(sites, bounds)?;
        Ok(Self::assemble(sites, bounds, brute_force_cells(sites, bounds)))
    }

    fn assemble(sites: &[Point], bounds: Bounds, cells: Vec<CellPolygon>) -> Self {
        let mut edges: Vec<Edge> = Vec::new();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
        for (i, cell) in cells.iter().enumerate() {
            let n = cell.vertices.len();
            for k in 0..n {
                let (a, b) = (cell.vertices[k], cell.vertices[(k + 1) % n]);
                let length = a.distance(b);
                if length < MIN_EDGE_LENGTH {
                    continue;
                }
                let key = match cell.sides[k] {
                    Side::Cell(j) => EdgeKey::between(i as u32, j),
                    Side::Border(side) => EdgeKey::border(i as u32, side),
                };
                // Both cells see a shared edge; keep the longer copy.
                match incident[key.cell as usize].iter().copied().find(|&idx| edges[idx].key == key) {
                    Some(idx) => {
                        if length > edges[idx].length {
                            edges[idx] = oriented_edge(key, i as u32, a, b, length);
                        }
                    }
                    None => {
                        incident[key.cell as usize].push(edges.len());
                        if let Side::Cell(j) = key.other {
                            incident[j as usize].push(edges.len());
                        }
                        edges.push(oriented_edge(key, i as u32, a, b, length));
                    }
                }
            }
        }
        Self { bounds, sites: sites.to_vec(), cells, edges, incident }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, i: usize) -> &CellPolygon {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[CellPolygon] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, key: &EdgeKey) -> Option<&Edge> {
        self.incident.get(key.cell as usize)?.iter().map(|&i| &self.edges[i]).find(|e| e.key == *key)
    }

    pub fn incident_edges(&self, cell: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.incident[cell].iter().map(move |&i| &self.edges[i])
    }

    /// Neighbouring cells with the shared edge.
    pub fn neighbours(&self, cell: usize) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.incident_edges(cell)
            .filter_map(move |e| e.key.across(cell as u32).map(|j| (j as usize, e)))
    }

    pub fn touches_border(&self, cell: usize) -> bool {
        self.incident_edges(cell).any(|e| e.key.is_border())
    }
}

fn oriented_edge(key: EdgeKey, from_cell: u32, a: Point, b: Point, length: f64) -> Edge {
    // store edges in the winding of `key.cell`
    let (start, end) = if from_cell == key.cell { (a, b) } else { (b, a) };
    Edge { key, start, end, length }
}

fn validate_sites(sites: &[Point], bounds: Bounds) -> Result<(), DomainError> {
    if sites.is_empty() {
        return Err(DomainError::DegenerateTessellation("no sites".into()));
    }
    if let Some((i, p)) = sites.iter().enumerate().find(|(_, p)| !(p.x.is_finite() && p.y.is_finite()) || !bounds.contains(**p)) {
        return Err(DomainError::DegenerateTessellation(format!("site {i} at ({}, {}) lies outside the plot", p.x, p.y)));
    }
    if let Some((i, j)) = find_close_pair(sites, MIN_SITE_SEPARATION) {
        return Err(DomainError::DegenerateTessellation(format!("sites {i} and {j} coincide")));
    }
    Ok(())
}

/// First pair of sites closer than `eps`, if any.
pub fn find_close_pair(sites: &[Point], eps: f64) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| sites[a].x.total_cmp(&sites[b].x).then(a.cmp(&b)));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if sites[j].x - sites[i].x >= eps {
                break;
            }
            if sites[i].distance(sites[j]) < eps {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

fn delaunay_neighbours(sites: &[Point]) -> Vec<Vec<usize>> {
    let n = sites.len();
    let mut out = vec![Vec::new(); n];
    if n < 2 {
        return out;
    }
    let points: Vec<delaunator::Point> = sites.iter().map(|p| delaunator::Point { x: p.x, y: p.y }).collect();
    let tri = delaunator::triangulate(&points);
    if tri.triangles.is_empty() {
        // collinear input: every site may border every other
        for (i, list) in out.iter_mut().enumerate() {
            list.extend((0..n).filter(|&j| j != i));
        }
        return out;
    }
    for t in tri.triangles.chunks_exact(3) {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            out[a].push(b);
            out[b].push(a);
        }
    }
    for list in &mut out {
        list.sort_unstable();
        list.dedup();
    }
    out
}

fn bounds_polygon(bounds: Bounds) -> (Vec<Point>, Vec<Side>) {
    (
        bounds.corners().to_vec(),
        vec![
            Side::Border(BorderSide::Bottom),
            Side::Border(BorderSide::Right),
            Side::Border(BorderSide::Top),
            Side::Border(BorderSide::Left),
        ],
    )
}

fn clip_cell(sites: &[Point], i: usize, others: impl Iterator<Item = usize>, bounds: Bounds) -> CellPolygon {
    let mut poly = Clip::new(bounds);
    for j in others {
        poly.clip(sites[i], sites[j], Side::Cell(j as u32));
    }
    poly.finish()
}

fn brute_force_cells(sites: &[Point], bounds: Bounds) -> Vec<CellPolygon> {
    (0..sites.len())
        .map(|i| {
            let mut order: Vec<usize> = (0..sites.len()).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| {
                sites[i].distance(sites[a]).total_cmp(&sites[i].distance(sites[b])).then(a.cmp(&b))
            });
            let mut poly = Clip::new(bounds);
            for j in order {
                let reach = poly.vertices.iter().map(|v| v.distance(sites[i])).fold(0.0, f64::max);
                if 0.5 * sites[i].distance(sites[j]) > reach {
                    break;
                }
                poly.clip(sites[i], sites[j], Side::Cell(j as u32));
            }
            poly.finish()
        })
        .collect()
}

/// Polygon with one label per edge, plus scratch space reused across clips.
struct Clip {
    vertices: Vec<Point>,
    sides: Vec<Side>,
    scratch_v: Vec<Point>,
    scratch_s: Vec<Side>,
}

impl Clip {
    fn new(bounds: Bounds) -> Self {
        let (vertices, sides) = bounds_polygon(bounds);
        Self { vertices, sides, scratch_v: Vec::with_capacity(16), scratch_s: Vec::with_capacity(16) }
    }

    fn clip(&mut self, own: Point, other: Point, label: Side) {
        if clip_half_plane(&self.vertices, &self.sides, own, other, label, &mut self.scratch_v, &mut self.scratch_s) {
            std::mem::swap(&mut self.vertices, &mut self.scratch_v);
            std::mem::swap(&mut self.sides, &mut self.scratch_s);
        }
    }

    fn finish(self) -> CellPolygon {
        finish(self.vertices, self.sides)
    }
}

/// Writes into `out_v`/`out_s` the part of the polygon on `own`'s side of the
/// bisector with `other`. Returns false, writing nothing, when nothing is cut away.
fn clip_half_plane(
    vertices: &[Point],
    sides: &[Side],
    own: Point,
    other: Point,
    label: Side,
    out_v: &mut Vec<Point>,
    out_s: &mut Vec<Side>,
) -> bool {
    out_v.clear();
    out_s.clear();
    let normal = other - own;
    let mid = own.midpoint(other);
    let f = |p: Point| (p - mid).dot(normal);
    let n = vertices.len();
    if n == 0 || vertices.iter().all(|&p| f(p) <= 0.0) {
        return false;
    }
    let mut fp = f(vertices[0]);
    for k in 0..n {
        let (p, q) = (vertices[k], vertices[(k + 1) % n]);
        let fq = f(q);
        let p_in = fp <= 0.0;
        let q_in = fq <= 0.0;
        if p_in {
            out_v.push(p);
            out_s.push(sides[k]);
            if !q_in {
                out_v.push(p + (q - p) * (fp / (fp - fq)));
                out_s.push(label);
            }
        } else if q_in {
            out_v.push(p + (q - p) * (fp / (fp - fq)));
            out_s.push(sides[k]);
        }
        fp = fq;
    }
    true
}

fn finish(mut vertices: Vec<Point>, mut sides: Vec<Side>) -> CellPolygon {
    // drop zero-length edges; the vertex that starts one carries its label
    let mut k = 0;
    while vertices.len() > 3 && k < vertices.len() {
        let next = (k + 1) % vertices.len();
        if vertices[k].distance(vertices[next]) < 1e-12 {
            vertices.remove(k);
            sides.remove(k);
        } else {
            k += 1;
        }
    }
    let area = signed_area(&vertices);
    CellPolygon { vertices, sides, area }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sites(n: usize, bounds: Bounds, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point::new(rng.random_range(0.0..bounds.width), rng.random_range(0.0..bounds.height)))
            .collect()
    }

    #[test]
    fn cells_partition_the_plot() {
        let bounds = Bounds::default();
        for seed in 0..5 {
            let sites = random_sites(300, bounds, seed);
            let t = Tessellation::build(&sites, bounds).unwrap();
            let total: f64 = t.cells().iter().map(|c| c.area).sum();
            assert!((total - bounds.area()).abs() < 1e-8, "area {total}");
            assert!(t.cells().iter().all(|c| c.area > 0.0));
        }
    }

    #[test]
    fn matches_exhaustive_clipping() {
        let bounds = Bounds { width: 6.0, height: 4.0 };
        for seed in 10..15 {
            let sites = random_sites(60, bounds, seed);
            let fast = Tessellation::build(&sites, bounds).unwrap();
            let slow = Tessellation::build_exhaustive(&sites, bounds).unwrap();
            for i in 0..sites.len() {
                assert!((fast.cell(i).area - slow.cell(i).area).abs() < 1e-9);
            }
            let long = |t: &Tessellation| -> Vec<(EdgeKey, f64)> {
                let mut v: Vec<_> = t.edges().iter().filter(|e| e.length > 1e-6).map(|e| (e.key, e.length)).collect();
                v.sort_by_key(|a| a.0);
                v
            };
            let (a, b) = (long(&fast), long(&slow));
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.0, y.0);
                assert!((x.1 - y.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn shared_edges_agree_from_both_sides() {
        let bounds = Bounds::default();
        let t = Tessellation::build(&random_sites(300, bounds, 3), bounds).unwrap();
        for e in t.edges() {
            if let Side::Cell(j) = e.key.other {
                // the edge lies on the bisector of the two sites
                let (si, sj) = (t.sites()[e.key.cell as usize], t.sites()[j as usize]);
                for p in [e.start, e.end] {
                    assert!((p.distance(si) - p.distance(sj)).abs() < 1e-9);
                }
                assert!(t.neighbours(j as usize).any(|(n, _)| n == e.key.cell as usize));
            }
        }
    }

    #[test]
    fn two_sites_split_the_plot() {
        let bounds = Bounds { width: 2.0, height: 1.0 };
        let t = Tessellation::build(&[Point::new(0.5, 0.5), Point::new(1.5, 0.5)], bounds).unwrap();
        assert!((t.cell(0).area - 1.0).abs() < 1e-12);
        let e = t.edge(&EdgeKey::between(1, 0)).unwrap();
        assert!((e.length - 1.0).abs() < 1e-12);
        assert!(t.touches_border(0));
        assert_eq!(t.neighbours(0).map(|(j, _)| j).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn collinear_sites_fall_back() {
        let bounds = Bounds { width: 4.0, height: 1.0 };
        let sites: Vec<Point> = (0..4).map(|i| Point::new(0.5 + i as f64, 0.5)).collect();
        let t = Tessellation::build(&sites, bounds).unwrap();
        for c in t.cells() {
            assert!((c.area - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_duplicate_and_outside_sites() {
        let bounds = Bounds::default();
        let dup = [Point::new(1.0, 1.0), Point::new(1.0, 1.0 + 1e-9), Point::new(3.0, 3.0)];
        assert!(matches!(Tessellation::build(&dup, bounds), Err(DomainError::DegenerateTessellation(_))));
        assert!(Tessellation::build(&[Point::new(-1.0, 1.0)], bounds).is_err());
        assert!(Tessellation::build(&[], bounds).is_err());
    }
}
