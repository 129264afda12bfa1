use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::geometry::{Bounds, Point};
use super::spec::UnitId;
use super::voronoi::{EdgeKey, Tessellation};
use crate::domain::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpeningKind {
    /// Between two connected units.
    Door,
    /// From a unit to the outside.
    Entrance,
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub kind: OpeningKind,
    pub edge: EdgeKey,
    /// The unit the opening belongs to, and for doors the unit on the other side.
    pub rooms: (UnitId, Option<UnitId>),
}

impl Opening {
    pub fn door(edge: EdgeKey, a: UnitId, b: UnitId) -> Self {
        Self { kind: OpeningKind::Door, edge, rooms: (a.min(b), Some(a.max(b))) }
    }

    pub fn involves(&self, room: UnitId) -> bool {
        self.rooms.0 == room || self.rooms.1 == Some(room)
    }
}

/// A layout: Voronoi sites, the unit each cell belongs to, and the openings.
///
/// The tessellation is derived from the sites and cached; clones share it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutGenome {
    bounds: Bounds,
    sites: Vec<Point>,
    assignment: Vec<Option<UnitId>>,
    openings: Vec<Opening>,
    #[serde(skip)]
    tessellation: OnceLock<Arc<Tessellation>>,
}

impl PartialEq for LayoutGenome {
    fn eq(&self, other: &Self) -> bool {
        self.bounds == other.bounds
            && self.sites == other.sites
            && self.assignment == other.assignment
            && self.openings == other.openings
    }
}

impl LayoutGenome {
    pub fn new(bounds: Bounds, sites: Vec<Point>, assignment: Vec<Option<UnitId>>, openings: Vec<Opening>) -> Self {
        assert_eq!(sites.len(), assignment.len(), "one assignment slot per site");
        Self { bounds, sites, assignment, openings, tessellation: OnceLock::new() }
    }

    pub(crate) fn with_tessellation(
        tessellation: Arc<Tessellation>,
        assignment: Vec<Option<UnitId>>,
        openings: Vec<Opening>,
    ) -> Self {
        let genome = Self::new(tessellation.bounds(), tessellation.sites().to_vec(), assignment, openings);
        let _ = genome.tessellation.set(tessellation);
        genome
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn assignment(&self) -> &[Option<UnitId>] {
        &self.assignment
    }

    pub fn openings(&self) -> &[Opening] {
        &self.openings
    }

    pub fn tessellation(&self) -> Result<Arc<Tessellation>, DomainError> {
        if let Some(t) = self.tessellation.get() {
            return Ok(Arc::clone(t));
        }
        let built = Arc::new(Tessellation::build(&self.sites, self.bounds)?);
        Ok(Arc::clone(self.tessellation.get_or_init(|| built)))
    }

    /// Units with at least one cell, ascending.
    pub fn placed_units(&self) -> Vec<UnitId> {
        let mut ids: Vec<UnitId> = self.assignment.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}
