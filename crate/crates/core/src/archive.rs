//! MAP-Elites feature map: a square grid over the two behavior axes holding at
//! most one elite per cell.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Evaluation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArchiveError {
    #[error("behavior characterization {0:?} is not finite")]
    NonFiniteBehavior([f64; 2]),
    #[error("invalid archive config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchiveConfig {
    pub resolution: usize,
    pub bc1_range: [f64; 2],
    pub bc2_range: [f64; 2],
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        Self { resolution: 64, bc1_range: [0.0, 1.0], bc2_range: [0.0, 1.0] }
    }
}

impl ArchiveConfig {
    /// Floorplan binning: room compactness `2 pi A / P^2` peaks at 0.5 (a
    /// circle), so the upper half of a [0, 1] axis could never be occupied.
    pub fn floorplan() -> Self {
        Self { bc1_range: [0.0, 0.5], ..Self::default() }
    }
}

impl ArchiveConfig {
    pub fn validate(&self) -> Result<(), ArchiveError> {
        if self.resolution < 2 {
            return Err(ArchiveError::InvalidConfig(format!(
                "resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        for (name, [lo, hi]) in [("bc1_range", self.bc1_range), ("bc2_range", self.bc2_range)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(ArchiveError::InvalidConfig(format!(
                    "{name} must have positive width, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.resolution * self.resolution
    }
}

/// Grid coordinate: `col` bins the first behavior axis, `row` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub col: usize,
    pub row: usize,
}

impl GridCell {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }

    pub fn distance_squared(self, other: GridCell) -> usize {
        let dc = self.col.abs_diff(other.col);
        let dr = self.row.abs_diff(other.row);
        dc * dc + dr * dr
    }

    pub fn manhattan(self, other: GridCell) -> usize {
        self.col.abs_diff(other.col) + self.row.abs_diff(other.row)
    }
}

/// Inclusive-exclusive rectangle of grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub col: usize,
    pub row: usize,
    pub width: usize,
    pub height: usize,
}

impl CellRect {
    pub fn contains(&self, cell: GridCell) -> bool {
        cell.col >= self.col
            && cell.col < self.col + self.width
            && cell.row >= self.row
            && cell.row < self.row + self.height
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = GridCell> + '_ {
        (self.row..self.row + self.height)
            .flat_map(move |row| (self.col..self.col + self.width).map(move |col| GridCell { col, row }))
    }
}

/// Maps a behavior pair onto the grid. Values outside the configured ranges
/// clamp to the boundary bins.
pub fn cell_of(bc: [f64; 2], config: &ArchiveConfig) -> Result<GridCell, ArchiveError> {
    if !bc.iter().all(|v| v.is_finite()) {
        return Err(ArchiveError::NonFiniteBehavior(bc));
    }
    let bin = |v: f64, [lo, hi]: [f64; 2]| -> usize {
        let scaled = (v - lo) / (hi - lo) * config.resolution as f64;
        if scaled <= 0.0 {
            0
        } else {
            (scaled.floor() as usize).min(config.resolution - 1)
        }
    };
    Ok(GridCell { col: bin(bc[0], config.bc1_range), row: bin(bc[1], config.bc2_range) })
}

/// Which scalar of an [`Evaluation`] decides replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityRole {
    Fitness,
    FeasibilityScore,
}

impl QualityRole {
    pub fn quality(self, evaluation: &Evaluation) -> f64 {
        match self {
            QualityRole::Fitness => evaluation.fitness,
            QualityRole::FeasibilityScore => evaluation.feasibility_score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elite<G> {
    pub genome: G,
    pub evaluation: Evaluation,
    pub cell: GridCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    InsertedEmpty,
    Replaced,
    Rejected,
}

impl InsertOutcome {
    pub fn stored(self) -> bool {
        !matches!(self, InsertOutcome::Rejected)
    }
}

#[derive(Debug, Clone)]
pub struct EliteArchive<G> {
    config: ArchiveConfig,
    role: QualityRole,
    grid: Vec<Option<Elite<G>>>,
    // Occupied grid indices in first-insertion order; gives O(1) uniform sampling.
    occupied: Vec<usize>,
}

impl<G> EliteArchive<G> {
    pub fn new(config: ArchiveConfig, role: QualityRole) -> Result<Self, ArchiveError> {
        config.validate()?;
        let mut grid = Vec::with_capacity(config.cell_count());
        grid.resize_with(config.cell_count(), || None);
        Ok(Self { config, role, grid, occupied: Vec::new() })
    }

    pub fn config(&self) -> &ArchiveConfig {
        &self.config
    }

    pub fn role(&self) -> QualityRole {
        self.role
    }

    pub fn resolution(&self) -> usize {
        self.config.resolution
    }

    pub fn cell_of(&self, bc: [f64; 2]) -> Result<GridCell, ArchiveError> {
        cell_of(bc, &self.config)
    }

    pub fn quality(&self, elite: &Elite<G>) -> f64 {
        self.role.quality(&elite.evaluation)
    }

    fn index(&self, cell: GridCell) -> usize {
        debug_assert!(cell.col < self.config.resolution && cell.row < self.config.resolution);
        cell.row * self.config.resolution + cell.col
    }

    pub fn get(&self, cell: GridCell) -> Option<&Elite<G>> {
        if cell.col >= self.config.resolution || cell.row >= self.config.resolution {
            return None;
        }
        self.grid[self.index(cell)].as_ref()
    }

    pub fn is_occupied(&self, cell: GridCell) -> bool {
        self.get(cell).is_some()
    }

    /// Inserts `candidate` at `candidate.cell`. Ties keep the incumbent.
    pub fn try_insert(&mut self, candidate: Elite<G>) -> InsertOutcome {
        let quality = self.quality(&candidate);
        if !quality.is_finite() {
            return InsertOutcome::Rejected;
        }
        let idx = self.index(candidate.cell);
        match &self.grid[idx] {
            None => {
                self.grid[idx] = Some(candidate);
                self.occupied.push(idx);
                InsertOutcome::InsertedEmpty
            }
            Some(incumbent) if quality > self.role.quality(&incumbent.evaluation) => {
                self.grid[idx] = Some(candidate);
                InsertOutcome::Replaced
            }
            Some(_) => InsertOutcome::Rejected,
        }
    }

    /// Bins `evaluation.bc` and inserts.
    pub fn insert(&mut self, genome: G, evaluation: Evaluation) -> Result<InsertOutcome, ArchiveError> {
        let cell = self.cell_of(evaluation.bc)?;
        Ok(self.try_insert(Elite { genome, evaluation, cell }))
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn coverage(&self) -> f64 {
        self.occupied.len() as f64 / self.config.cell_count() as f64
    }

    pub fn qd_score(&self) -> f64 {
        self.iter().map(|e| self.quality(e)).sum()
    }

    pub fn max_fitness(&self) -> Option<f64> {
        self.iter().map(|e| self.quality(e)).reduce(f64::max)
    }

    /// Occupied cells in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = &Elite<G>> {
        self.grid.iter().filter_map(Option::as_ref)
    }

    /// Elites inside `region`, row-major.
    pub fn occupied_in(&self, region: CellRect) -> Vec<&Elite<G>> {
        region.cells().filter_map(|cell| self.get(cell)).collect()
    }

    pub fn occupied_cells_in(&self, region: CellRect) -> Vec<GridCell> {
        region.cells().filter(|&cell| self.is_occupied(cell)).collect()
    }

    /// Uniform draw over all occupied cells.
    pub fn random_elite<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&Elite<G>> {
        if self.occupied.is_empty() {
            return None;
        }
        let idx = self.occupied[rng.random_range(0..self.occupied.len())];
        self.grid[idx].as_ref()
    }

    /// Uniform draw over occupied cells inside `region`.
    pub fn random_elite_in<R: Rng + ?Sized>(&self, region: CellRect, rng: &mut R) -> Option<&Elite<G>> {
        let cells = self.occupied_cells_in(region);
        if cells.is_empty() {
            return None;
        }
        self.get(cells[rng.random_range(0..cells.len())])
    }

    /// Row-major matrix of qualities, `None` for empty cells.
    pub fn quality_matrix(&self) -> Vec<Vec<Option<f64>>> {
        let res = self.config.resolution;
        (0..res)
            .map(|row| {
                (0..res)
                    .map(|col| self.get(GridCell { col, row }).map(|e| self.quality(e)))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elite(cell: GridCell, quality: f64) -> Elite<()> {
        Elite { genome: (), evaluation: Evaluation::simple(true, quality, 1.0, [0.0, 0.0]), cell }
    }

    fn archive() -> EliteArchive<()> {
        EliteArchive::new(ArchiveConfig::default(), QualityRole::Fitness).unwrap()
    }

    #[test]
    fn binning_examples() {
        let cfg = ArchiveConfig::default();
        assert_eq!(cell_of([0.5, 0.5], &cfg).unwrap(), GridCell::new(32, 32));
        assert_eq!(cell_of([1.0, 0.0], &cfg).unwrap(), GridCell::new(63, 0));
        assert_eq!(cell_of([1.7, -0.2], &cfg).unwrap(), GridCell::new(63, 0));
        assert!(matches!(cell_of([f64::NAN, 0.0], &cfg), Err(ArchiveError::NonFiniteBehavior(_))));
        assert!(cell_of([0.0, f64::INFINITY], &cfg).is_err());
    }

    #[test]
    fn binning_respects_custom_ranges() {
        let cfg = ArchiveConfig { resolution: 10, bc1_range: [0.44, 0.86], bc2_range: [0.61, 0.97] };
        assert_eq!(cell_of([0.44, 0.97], &cfg).unwrap(), GridCell::new(0, 9));
        assert_eq!(cell_of([0.65, 0.79], &cfg).unwrap(), GridCell::new(5, 5));
    }

    #[test]
    fn config_validation() {
        assert!(ArchiveConfig { resolution: 1, ..Default::default() }.validate().is_err());
        assert!(ArchiveConfig { bc1_range: [1.0, 1.0], ..Default::default() }.validate().is_err());
        assert!(ArchiveConfig::default().validate().is_ok());
    }

    #[test]
    fn insertion_outcomes() {
        let mut a = archive();
        let c = GridCell::new(3, 4);
        assert_eq!(a.try_insert(elite(c, 0.7)), InsertOutcome::InsertedEmpty);
        assert_eq!(a.try_insert(elite(c, 0.8)), InsertOutcome::Replaced);
        assert_eq!(a.try_insert(elite(c, 0.8)), InsertOutcome::Rejected);
        assert_eq!(a.try_insert(elite(c, 0.5)), InsertOutcome::Rejected);
        assert_eq!(a.get(c).map(|e| e.evaluation.fitness), Some(0.8));
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn infeasible_role_uses_feasibility_score() {
        let mut a: EliteArchive<()> =
            EliteArchive::new(ArchiveConfig::default(), QualityRole::FeasibilityScore).unwrap();
        let c = GridCell::new(0, 0);
        let mk = |fit, feas| Elite { genome: (), evaluation: Evaluation::simple(false, fit, feas, [0.0; 2]), cell: c };
        a.try_insert(mk(0.9, 0.5));
        assert_eq!(a.try_insert(mk(0.1, 0.6)), InsertOutcome::Replaced);
        assert_eq!(a.try_insert(mk(1.0, 0.55)), InsertOutcome::Rejected);
    }

    #[test]
    fn statistics() {
        let mut a = archive();
        assert_eq!(a.coverage(), 0.0);
        assert_eq!(a.qd_score(), 0.0);
        assert_eq!(a.max_fitness(), None);

        a.try_insert(elite(GridCell::new(0, 0), 0.6));
        assert_eq!(a.max_fitness(), Some(0.6));
        a.try_insert(elite(GridCell::new(1, 0), 0.9));
        assert!((a.qd_score() - 1.5).abs() < 1e-12);

        let mut b = archive();
        b.try_insert(elite(GridCell::new(5, 5), 0.62));
        b.try_insert(elite(GridCell::new(6, 5), 0.95));
        b.try_insert(elite(GridCell::new(7, 5), 0.71));
        assert_eq!(b.max_fitness(), Some(0.95));

        let mut c = archive();
        for i in 0..41 {
            c.try_insert(elite(GridCell::new(i, 0), 1.0));
        }
        assert!((c.coverage() - 41.0 / 4096.0).abs() < 1e-15);
        assert!(c.coverage() >= 0.01);
    }

    #[test]
    fn full_archive_has_unit_coverage() {
        let cfg = ArchiveConfig { resolution: 4, ..Default::default() };
        let mut a: EliteArchive<()> = EliteArchive::new(cfg, QualityRole::Fitness).unwrap();
        for cell in (CellRect { col: 0, row: 0, width: 4, height: 4 }).cells() {
            a.try_insert(elite(cell, 1.0));
        }
        assert_eq!(a.coverage(), 1.0);
        assert_eq!(a.qd_score(), 16.0);
    }

    #[test]
    fn region_queries_are_row_major() {
        let mut a = archive();
        for cell in [GridCell::new(12, 14), GridCell::new(10, 10), GridCell::new(18, 10), GridCell::new(40, 40)] {
            a.try_insert(elite(cell, 0.5));
        }
        let region = CellRect { col: 10, row: 10, width: 9, height: 9 };
        let cells: Vec<_> = a.occupied_in(region).iter().map(|e| e.cell).collect();
        assert_eq!(cells, vec![GridCell::new(10, 10), GridCell::new(18, 10), GridCell::new(12, 14)]);
        assert!(a.occupied_in(CellRect { col: 30, row: 0, width: 9, height: 9 }).is_empty());
        let everything = CellRect { col: 0, row: 0, width: 64, height: 64 };
        assert_eq!(a.occupied_in(everything).len(), 4);
    }
}
