//! Initial generation and the destroy-then-repair mutation.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::genome::{LayoutGenome, Opening};
use super::geometry::{area_precision, Bounds, Point};
use super::evaluate::narrow_links;
use super::plan::Plan;
use super::spec::{DesignSpec, UnitId};
use super::voronoi::{find_close_pair, Tessellation, MIN_SITE_SEPARATION};
use super::DomainConfig;
use crate::domain::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Destruction {
    /// Translate every site by one shared vector.
    ShiftAll,
    /// Move a small random subset of sites independently.
    JitterSubset,
    DeleteRoom,
    /// Grow a unit over its neighbours' cells.
    UnsafeExpand,
    /// Grow a unit over unassigned cells only.
    SafeExpand,
    /// Peel boundary cells off a unit without splitting it.
    Erode,
    DeleteOpenings,
}

impl Destruction {
    pub const ALL: [Destruction; 7] = [
        Destruction::ShiftAll,
        Destruction::JitterSubset,
        Destruction::DeleteRoom,
        Destruction::UnsafeExpand,
        Destruction::SafeExpand,
        Destruction::Erode,
        Destruction::DeleteOpenings,
    ];

    fn moves_sites(self) -> bool {
        matches!(self, Destruction::ShiftAll | Destruction::JitterSubset)
    }
}

/// Mutable layout under construction. The tessellation is rebuilt lazily
/// after site moves.
pub(crate) struct Draft {
    bounds: Bounds,
    sites: Vec<Point>,
    tess: Arc<Tessellation>,
    stale: bool,
    pub assignment: Vec<Option<UnitId>>,
    pub openings: Vec<Opening>,
}

impl Draft {
    pub fn from_genome(genome: &LayoutGenome) -> Result<Self, DomainError> {
        Ok(Self {
            bounds: genome.bounds(),
            sites: genome.sites().to_vec(),
            tess: genome.tessellation()?,
            stale: false,
            assignment: genome.assignment().to_vec(),
            openings: genome.openings().to_vec(),
        })
    }

    fn refresh(&mut self) {
        if self.stale {
            separate_sites(&mut self.sites, self.bounds);
            match Tessellation::build(&self.sites, self.bounds) {
                Ok(t) => self.tess = Arc::new(t),
                // keep the previous geometry rather than produce an invalid genome
                Err(_) => self.sites = self.tess.sites().to_vec(),
            }
            self.stale = false;
        }
    }

    /// Runs `f` on a cell-level plan over the current tessellation.
    pub fn with_plan<T>(&mut self, ds: &DesignSpec, config: &DomainConfig, f: impl FnOnce(&mut Plan<'_>) -> T) -> T {
        self.refresh();
        let tess = Arc::clone(&self.tess);
        let mut plan = Plan::new(&tess, ds, config, std::mem::take(&mut self.assignment), std::mem::take(&mut self.openings));
        let out = f(&mut plan);
        self.assignment = plan.assignment;
        self.openings = plan.openings;
        out
    }

    pub fn into_genome(mut self) -> LayoutGenome {
        self.refresh();
        LayoutGenome::with_tessellation(self.tess, self.assignment, self.openings)
    }
}

/// Pushes apart sites closer than the minimum separation.
pub(crate) fn separate_sites(sites: &mut [Point], bounds: Bounds) {
    for attempt in 0..64 {
        let Some((_, j)) = find_close_pair(sites, 2.0 * MIN_SITE_SEPARATION) else {
            return;
        };
        let angle = attempt as f64 * 2.399963;
        let nudge = Point::new(angle.cos(), angle.sin()) * (1e-4 * (1 + attempt) as f64);
        sites[j] = bounds.reflect(sites[j] + nudge);
    }
}

pub(crate) fn random_sites(count: usize, bounds: Bounds, rng: &mut dyn RngCore) -> Vec<Point> {
    let mut sites: Vec<Point> = (0..count)
        .map(|_| Point::new(rng.random_range(0.0..bounds.width), rng.random_range(0.0..bounds.height)))
        .collect();
    separate_sites(&mut sites, bounds);
    sites
}

pub(crate) fn generate(ds: &DesignSpec, config: &DomainConfig, rng: &mut dyn RngCore) -> LayoutGenome {
    loop {
        let sites = random_sites(config.sites, ds.bounds, rng);
        let Ok(tess) = Tessellation::build(&sites, ds.bounds) else {
            continue;
        };
        let mut plan = Plan::new(&tess, ds, config, vec![None; sites.len()], Vec::new());
        for room in ds.placement_order() {
            plan.place(room, rng);
        }
        plan.place_openings(rng);
        let (assignment, openings) = (plan.assignment, plan.openings);
        return LayoutGenome::with_tessellation(Arc::new(tess), assignment, openings);
    }
}

pub(crate) fn mutate(
    parent: &LayoutGenome,
    ds: &DesignSpec,
    config: &DomainConfig,
    rng: &mut dyn RngCore,
) -> Result<LayoutGenome, DomainError> {
    let mut draft = Draft::from_genome(parent)?;
    let count = rng.random_range(1..=3);
    let mut ops = Destruction::ALL;
    let (chosen, _) = ops.partial_shuffle(rng, count);
    for &op in chosen.iter() {
        destroy(&mut draft, op, ds, config, rng);
    }
    draft.with_plan(ds, config, |plan| repair(plan, rng));
    Ok(draft.into_genome())
}

pub(crate) fn destroy(draft: &mut Draft, op: Destruction, ds: &DesignSpec, config: &DomainConfig, rng: &mut dyn RngCore) {
    if op.moves_sites() {
        let bounds = draft.bounds;
        let [lo, hi] = config.shift_magnitude;
        let offset = |rng: &mut dyn RngCore| {
            let magnitude = rng.random_range(lo..=hi);
            let angle = rng.random_range(0.0..TAU);
            Point::new(angle.cos(), angle.sin()) * magnitude
        };
        match op {
            Destruction::ShiftAll => {
                let v = offset(rng);
                for s in draft.sites.iter_mut() {
                    *s = bounds.reflect(*s + v);
                }
            }
            _ => {
                let n = draft.sites.len();
                let [fmin, fmax] = config.jitter_fraction;
                let min = ((fmin * n as f64).ceil() as usize).max(1);
                let max = ((fmax * n as f64).floor() as usize).max(min);
                let count = rng.random_range(min..=max).min(n);
                let mut idx: Vec<usize> = (0..n).collect();
                let (picked, _) = idx.partial_shuffle(rng, count);
                for &i in picked.iter() {
                    let v = offset(rng);
                    draft.sites[i] = bounds.reflect(draft.sites[i] + v);
                }
            }
        }
        draft.stale = true;
        return;
    }
    draft.with_plan(ds, config, |plan| match op {
        Destruction::DeleteRoom => {
            if let Some(room) = pick_placed(plan, rng) {
                plan.unassign_room(room);
            }
        }
        Destruction::UnsafeExpand | Destruction::SafeExpand => {
            if let Some(room) = pick_placed(plan, rng) {
                let [lo, hi] = config.expand_rings;
                let rings = rng.random_range(lo..=hi);
                let safe = op == Destruction::SafeExpand;
                for _ in 0..rings {
                    let ring = plan.frontier(room, |owner| !safe || owner.is_none());
                    if ring.is_empty() {
                        break;
                    }
                    for c in ring {
                        plan.assign(c, Some(room));
                    }
                }
            }
        }
        Destruction::Erode => {
            if let Some(room) = pick_placed(plan, rng) {
                erode(plan, room, config.erode_fraction, rng);
            }
        }
        Destruction::DeleteOpenings => {
            let p = config.opening_deletion_probability;
            plan.openings.retain(|_| !rng.random_bool(p));
        }
        Destruction::ShiftAll | Destruction::JitterSubset => unreachable!(),
    });
}

fn pick_placed(plan: &Plan<'_>, rng: &mut dyn RngCore) -> Option<UnitId> {
    let placed = plan.placed_units();
    (!placed.is_empty()).then(|| placed[rng.random_range(0..placed.len())])
}

fn is_room_boundary(plan: &Plan<'_>, cell: usize, room: UnitId) -> bool {
    plan.tess.touches_border(cell) || plan.tess.neighbours(cell).any(|(nb, _)| plan.owner(nb) != Some(room))
}

/// Removes up to `fraction` of the unit's cells from its boundary, one at a
/// time, never disconnecting it.
pub(crate) fn erode(plan: &mut Plan<'_>, room: UnitId, fraction: f64, rng: &mut dyn RngCore) {
    let budget = (fraction * plan.cells_of(room).len() as f64).floor() as usize;
    for _ in 0..budget {
        let mut boundary: Vec<usize> =
            plan.cells_of(room).into_iter().filter(|&c| is_room_boundary(plan, c, room)).collect();
        boundary.shuffle(rng);
        let Some(cell) = boundary.into_iter().find(|&c| plan.stays_connected_without(room, c)) else {
            break;
        };
        plan.assign(cell, None);
    }
}

/// Scripted repair, in order: re-place missing units, reconnect split units,
/// grow towards missing adjacencies, fix areas, then fix openings.
pub(crate) fn repair(plan: &mut Plan<'_>, rng: &mut dyn RngCore) {
    let ds = plan.ds;
    let config = plan.config;

    for room in ds.placement_order() {
        let target = ds.unit(room).map_or(0.0, |u| u.target_area);
        if !plan.is_placed(room) && plan.unassigned_area() >= config.area_threshold * target {
            plan.place(room, rng);
        }
    }

    for room in plan.placed_units() {
        let components = plan.components(room);
        if components.len() > 1 {
            for comp in &components[1..] {
                for &c in comp {
                    plan.assign(c, None);
                }
            }
            let target = ds.unit(room).map_or(0.0, |u| u.target_area);
            plan.grow(room, |a| a >= target, rng);
        }
    }

    for &(a, b) in &ds.adjacencies {
        if !(plan.is_placed(a) && plan.is_placed(b)) {
            continue;
        }
        let mut added = 0;
        // a door needs a door-wide stretch of wall, which implies enough shared boundary
        while plan.door_run(a, b) < config.door_width && added < config.adjacency_growth_limit {
            let (first, second) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            let budget = config.adjacency_growth_limit - added;
            let step = grow_towards(plan, first, second, budget).or_else(|| grow_towards(plan, second, first, budget));
            match step {
                Some(n) => added += n,
                None => break,
            }
        }
    }

    for room in plan.placed_units() {
        fit_area(plan, room, rng);
        widen_bridges(plan, room);
    }

    plan.place_openings(rng);
}

/// Extends `from` along the shortest path of unassigned cells to a cell that
/// would give it a door-wide edge with `to`, or failing that any cell next to
/// `to`. Returns the number of cells added.
fn grow_towards(plan: &mut Plan<'_>, from: UnitId, to: UnitId, budget: usize) -> Option<usize> {
    let n = plan.assignment.len();
    let door = plan.config.door_width;
    // 2 = door-wide edge with `to`, 1 = touches `to`
    let mut goal = vec![0u8; n];
    for c in plan.frontier(to, |o| o.is_none()) {
        let contact: f64 = plan.tess.neighbours(c).filter(|&(nb, _)| plan.owner(nb) == Some(to)).map(|(_, e)| e.length).sum();
        let wide = contact >= door;
        goal[c] = if wide { 2 } else { 1 };
    }
    if plan.shared_length(from, to) >= door {
        // touching already; only a door-wide contact is progress
        goal.iter_mut().filter(|g| **g == 1).for_each(|g| *g = 0);
    }
    let mut prev = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut queue = VecDeque::new();
    for c in plan.frontier(from, |o| o.is_none()) {
        prev[c] = c;
        depth[c] = 1;
        queue.push_back(c);
    }
    let mut fallback = None;
    let mut hit = None;
    while let Some(c) = queue.pop_front() {
        if goal[c] == 2 {
            hit = Some(c);
            break;
        }
        if goal[c] == 1 && fallback.is_none() {
            fallback = Some(c);
        }
        if depth[c] >= budget {
            continue;
        }
        for (nb, _) in plan.tess.neighbours(c) {
            if plan.owner(nb).is_none() && prev[nb] == usize::MAX {
                prev[nb] = c;
                depth[nb] = depth[c] + 1;
                queue.push_back(nb);
            }
        }
    }
    let mut c = hit.or(fallback)?;
    let mut added = 0;
    loop {
        plan.assign(c, Some(from));
        added += 1;
        if prev[c] == c {
            break;
        }
        c = prev[c];
    }
    Some(added)
}

/// Adds or removes boundary cells until the unit's area precision reaches the
/// threshold, keeping it connected and, where possible, in contact with the
/// units it must connect to. Cells hanging on by less than the pathway width
/// are trimmed first and avoided when growing.
fn fit_area(plan: &mut Plan<'_>, room: UnitId, rng: &mut dyn RngCore) {
    let Some(target) = plan.ds.unit(room).map(|u| u.target_area) else {
        return;
    };
    let threshold = plan.config.area_threshold;
    let width = plan.config.pathway_width;
    let required: Vec<UnitId> = plan.ds.neighbours(room).collect();
    trim_narrow(plan, room, &required);
    for _ in 0..plan.assignment.len() {
        let area = plan.area_of(room);
        if area_precision(area, target) >= threshold {
            break;
        }
        if area < target {
            let frontier = plan.frontier(room, |o| o.is_none());
            if frontier.is_empty() {
                break;
            }
            let wide: Vec<usize> = frontier.iter().copied().filter(|&c| plan.attachment(c, room) >= width).collect();
            let pool = if wide.is_empty() { &frontier } else { &wide };
            plan.assign(pool[rng.random_range(0..pool.len())], Some(room));
        } else {
            let cells: Vec<usize> = plan
                .cells_of(room)
                .into_iter()
                .filter(|&c| is_room_boundary(plan, c, room))
                .collect();
            let touches_required =
                |c: usize| plan.tess.neighbours(c).any(|(nb, _)| plan.owner(nb).is_some_and(|o| required.contains(&o)));
            let mut preferred: Vec<usize> = cells.iter().copied().filter(|&c| !touches_required(c)).collect();
            preferred.shuffle(rng);
            let mut fallback: Vec<usize> = cells.iter().copied().filter(|&c| touches_required(c)).collect();
            fallback.shuffle(rng);
            let Some(cell) = preferred
                .into_iter()
                .chain(fallback)
                .find(|&c| plan.stays_connected_without(room, c))
            else {
                break;
            };
            plan.assign(cell, None);
        }
    }
    trim_narrow(plan, room, &required);
}

/// Closes narrow bridges of the unit's cell graph with a free cell touching
/// both ends, which puts the bridge on a cycle.
fn widen_bridges(plan: &mut Plan<'_>, room: UnitId) {
    let width = plan.config.pathway_width;
    for _ in 0..plan.assignment.len() {
        let Some(links) = narrow_links(plan, room) else {
            return;
        };
        let patch = links.iter().find_map(|&(u, v)| {
            plan.tess
                .neighbours(u)
                .filter(|&(w, _)| plan.owner(w).is_none())
                .filter_map(|(w, eu)| {
                    let ev = plan.tess.neighbours(w).find(|&(x, _)| x == v)?.1;
                    (eu.length + ev.length >= width).then_some((w, plan.attachment(w, room)))
                })
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(w, _)| w)
        });
        match patch {
            Some(w) => plan.assign(w, Some(room)),
            None => return,
        }
    }
}

/// Unassigns cells joined to the rest of their unit by less than the pathway
/// width, unless that would cost a required neighbour its door-wide wall.
fn trim_narrow(plan: &mut Plan<'_>, room: UnitId, required: &[UnitId]) {
    let width = plan.config.pathway_width;
    let door = plan.config.door_width;
    let mut spared: Vec<usize> = Vec::new();
    loop {
        let cells = plan.cells_of(room);
        if cells.len() < 2 {
            return;
        }
        let candidate = cells.into_iter().find(|&c| {
            !spared.contains(&c) && plan.attachment(c, room) < width && plan.stays_connected_without(room, c)
        });
        let Some(cell) = candidate else {
            return;
        };
        let touching: Vec<UnitId> = required
            .iter()
            .copied()
            .filter(|&o| plan.tess.neighbours(cell).any(|(nb, _)| plan.owner(nb) == Some(o)))
            .filter(|&o| plan.door_run(room, o) >= door)
            .collect();
        plan.assign(cell, None);
        if touching.iter().any(|&o| plan.door_run(room, o) < door) {
            plan.assign(cell, Some(room));
            spared.push(cell);
        }
    }
}
