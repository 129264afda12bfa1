//! Constraint scores, fitness and behavior characterizations of a layout.

use std::collections::VecDeque;

use super::geometry::{area_precision, compactness, orthogonality};
use super::outline::RoomOutline;
use super::plan::Plan;
use super::spec::{DesignSpec, UnitId};
use crate::domain::{DomainError, Evaluation};

/// Number of feasibility constraints, (a) through (g).
pub const CONSTRAINTS: usize = 7;

pub(crate) fn evaluate_plan(plan: &Plan<'_>) -> Result<Evaluation, DomainError> {
    let ds = plan.ds;
    let config = plan.config;
    let placed = plan.placed_units();

    let outlines: Vec<(UnitId, RoomOutline)> =
        placed.iter().map(|&id| (id, RoomOutline::trace(plan.tess, &plan.assignment, id))).collect();

    let fitness = mean_area_precision(ds, |id| {
        outlines.iter().find(|(r, _)| *r == id).map_or(0.0, |(_, o)| o.area)
    });

    let fraction = |hits: usize, total: usize, empty: f64| if total == 0 { empty } else { hits as f64 / total as f64 };

    // (a) every unit forms one connected region
    let connected = placed.iter().filter(|&&id| plan.components(id).len() == 1).count();
    let single_region = fraction(connected, placed.len(), 0.0);

    // (b) connected units share enough wall for a door
    let adjacent = ds
        .adjacencies
        .iter()
        .filter(|&&(a, b)| plan.shared_length(a, b) >= config.door_width)
        .count();
    let adjacency = fraction(adjacent, ds.adjacencies.len(), 1.0);

    // (c) areas close enough to the targets
    let area = (fitness / config.area_threshold).clamp(0.0, 1.0);

    // (d) prescribed openings
    let openings = fraction(plan.satisfied_openings(), ds.prescribed_openings(), 1.0);

    // (e) no pathway narrower than the minimum width
    let wide = placed.iter().filter(|&&id| pathways_wide_enough(plan, id)).count();
    let pathways = fraction(wide, placed.len(), 0.0);

    // (f) the cell graph is connected
    let graph = largest_component_fraction(plan);

    // (g) at least half of the cells stay clear of the plot border
    let n = plan.tess.len();
    let inner = (0..n).filter(|&c| !plan.tess.touches_border(c)).count();
    let interior = (inner as f64 / n as f64 / 0.5).min(1.0);

    let constraint_scores = vec![single_region, adjacency, area, openings, pathways, graph, interior];
    let feasibility_score = constraint_scores.iter().sum::<f64>() / CONSTRAINTS as f64;
    let feasible = constraint_scores.iter().all(|&s| s == 1.0) && fitness >= config.area_threshold;

    let bc = bc_vector(ds, &outlines)?;
    Ok(Evaluation { feasible, feasibility_score, constraint_scores, fitness, bc })
}

/// Mean area precision over every unit of the spec; missing units score 0.
pub fn mean_area_precision(ds: &DesignSpec, area_of: impl Fn(UnitId) -> f64) -> f64 {
    let total: f64 = ds.units.iter().map(|u| area_precision(area_of(u.id), u.target_area)).sum();
    total / ds.units.len() as f64
}

/// `(mean compactness, mean wall orthogonality)` of the placed units.
/// Units outside the spec count as compactness 0; an empty layout maps to `(0, 0)`.
pub fn bc_vector(ds: &DesignSpec, outlines: &[(UnitId, RoomOutline)]) -> Result<[f64; 2], DomainError> {
    if outlines.is_empty() {
        return Ok([0.0, 0.0]);
    }
    let mut compact_sum = 0.0;
    let mut angles = Vec::new();
    for (id, outline) in outlines {
        if ds.contains(*id) {
            compact_sum += compactness(outline.area, outline.outer_perimeter())?;
        }
        angles.extend(outline.wall_angles());
    }
    let mean_compactness = compact_sum / outlines.len() as f64;
    Ok([mean_compactness, mean_orthogonality(&angles)?])
}

pub fn mean_orthogonality(angles: &[f64]) -> Result<f64, DomainError> {
    if angles.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for &theta in angles {
        sum += orthogonality(theta.clamp(0.0, std::f64::consts::PI))?;
    }
    Ok(sum / angles.len() as f64)
}

/// A unit passes when no cell hangs on by less than the minimum width and no
/// single wall segment (a bridge of the cell graph) is narrower than it.
pub(crate) fn pathways_wide_enough(plan: &Plan<'_>, room: UnitId) -> bool {
    narrow_links(plan, room).is_none_or(|bridges| bridges.is_empty())
}

/// Bridges of the unit's cell graph narrower than the pathway width, as cell
/// pairs. None when some cell is attached by less than that width in total.
pub(crate) fn narrow_links(plan: &Plan<'_>, room: UnitId) -> Option<Vec<(usize, usize)>> {
    let cells = plan.cells_of(room);
    if cells.len() < 2 {
        return Some(Vec::new());
    }
    let min_width = plan.config.pathway_width;
    let mut local = vec![usize::MAX; plan.assignment.len()];
    for (i, &c) in cells.iter().enumerate() {
        local[c] = i;
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cells.len()];
    for (i, &c) in cells.iter().enumerate() {
        for (nb, e) in plan.tess.neighbours(c) {
            if local[nb] != usize::MAX {
                adj[i].push((local[nb], e.length));
            }
        }
    }
    if adj.iter().any(|list| list.iter().map(|(_, l)| l).sum::<f64>() < min_width) {
        return None;
    }
    Some(
        bridges(&adj)
            .into_iter()
            .filter(|&(_, _, len)| len < min_width)
            .map(|(a, b, _)| (cells[a], cells[b]))
            .collect(),
    )
}

/// Bridge edges of an undirected graph with their lengths.
fn bridges(adj: &[Vec<(usize, f64)>]) -> Vec<(usize, usize, f64)> {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut out = Vec::new();
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // iterative DFS: (node, parent, next neighbour index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (v, parent, next) = stack[top];
            if next < adj[v].len() {
                let (w, _) = adj[v][next];
                stack[top].2 += 1;
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, v, 0));
                } else if w != parent {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        let len = adj[parent].iter().find(|(w, _)| *w == v).map_or(0.0, |(_, l)| *l);
                        out.push((parent, v, len));
                    }
                }
            }
        }
    }
    out
}

fn largest_component_fraction(plan: &Plan<'_>) -> f64 {
    let n = plan.tess.len();
    let mut seen = vec![false; n];
    let mut best = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            size += 1;
            for (nb, _) in plan.tess.neighbours(c) {
                if !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        best = best.max(size);
    }
    best as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn mean_orthogonality_averages_angles() {
        let v = mean_orthogonality(&[FRAC_PI_4, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]).unwrap();
        assert!((v - 0.875).abs() < 1e-12);
        assert_eq!(mean_orthogonality(&[]).unwrap(), 0.0);
    }

    #[test]
    fn bridges_in_a_barbell() {
        // two triangles joined by one edge of length 0.3
        let mut adj = vec![Vec::new(); 6];
        let mut link = |a: usize, b: usize, l: f64| {
            adj[a].push((b, l));
            adj[b].push((a, l));
        };
        link(0, 1, 1.0);
        link(1, 2, 1.0);
        link(2, 0, 1.0);
        link(3, 4, 1.0);
        link(4, 5, 1.0);
        link(5, 3, 1.0);
        link(2, 3, 0.3);
        assert_eq!(bridges(&adj), vec![(2, 3, 0.3)]);
    }
}
