use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::archive::{CellRect, EliteArchive, GridCell};

/// Square block of archive cells that parent selection and sampling are
/// restricted to. Always lies fully inside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionWindow {
    /// Lower-left cell.
    pub origin: GridCell,
    /// Side length in cells; odd.
    pub size: usize,
}

impl SelectionWindow {
    pub fn validate_size(size: usize, resolution: usize) -> Result<(), EngineError> {
        if size == 0 || size.is_multiple_of(2) || size > resolution {
            return Err(EngineError::InvalidConfig(format!(
                "window size {size} must be odd and at most the grid resolution {resolution}"
            )));
        }
        Ok(())
    }

    /// Window of `size` centered on `center`, shifted as needed to fit the grid.
    pub fn centered(center: GridCell, size: usize, resolution: usize) -> Self {
        let half = size / 2;
        let max = resolution - size;
        let clamp = |c: usize| c.saturating_sub(half).min(max);
        Self { origin: GridCell::new(clamp(center.col), clamp(center.row)), size }
    }

    pub fn recenter(&self, target: GridCell, resolution: usize) -> Self {
        Self::centered(target, self.size, resolution)
    }

    pub fn center(&self) -> GridCell {
        GridCell::new(self.origin.col + self.size / 2, self.origin.row + self.size / 2)
    }

    pub fn rect(&self) -> CellRect {
        CellRect { col: self.origin.col, row: self.origin.row, width: self.size, height: self.size }
    }

    pub fn contains(&self, cell: GridCell) -> bool {
        self.rect().contains(cell)
    }

    /// Offset of `cell` from the lower-left corner.
    pub fn local(&self, cell: GridCell) -> (usize, usize) {
        (cell.col - self.origin.col, cell.row - self.origin.row)
    }
}

/// Window around the cell of the mean behavior of all feasible elites, or the
/// occupied cell nearest to it (first in row-major order on ties).
pub fn initial_window<G>(feasible: &EliteArchive<G>, size: usize) -> Result<SelectionWindow, EngineError> {
    if feasible.is_empty() {
        return Err(EngineError::EmptyArchive);
    }
    let n = feasible.len() as f64;
    let mut mean = [0.0; 2];
    for elite in feasible.iter() {
        mean[0] += elite.evaluation.bc[0] / n;
        mean[1] += elite.evaluation.bc[1] / n;
    }
    let target = feasible.cell_of(mean)?;
    let center = if feasible.is_occupied(target) {
        target
    } else {
        let mut best: Option<(usize, usize, usize)> = None;
        for elite in feasible.iter() {
            let key = (elite.cell.distance_squared(target), elite.cell.row, elite.cell.col);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let (_, row, col) = best.expect("archive is non-empty");
        GridCell::new(col, row)
    };
    Ok(SelectionWindow::centered(center, size, feasible.resolution()))
}
