//! Rules for picking which elites of the window are shown to the designer.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kmedoids::kmedoids;
use super::window::SelectionWindow;
use super::EngineError;
use crate::archive::{EliteArchive, GridCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DasMethod {
    Random,
    /// Triangles cut by the window diagonals.
    Quadrants,
    /// Sub-squares cut by the center row and column.
    Squares,
    Edges,
    Corners,
    Medoids,
}

impl DasMethod {
    pub const ALL: [DasMethod; 6] = [
        DasMethod::Random,
        DasMethod::Quadrants,
        DasMethod::Squares,
        DasMethod::Edges,
        DasMethod::Corners,
        DasMethod::Medoids,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DasMethod::Random => "random",
            DasMethod::Quadrants => "quadrants",
            DasMethod::Squares => "squares",
            DasMethod::Edges => "edges",
            DasMethod::Corners => "corners",
            DasMethod::Medoids => "medoids",
        }
    }
}

impl fmt::Display for DasMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DasMethod {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DasMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| EngineError::UnknownMethod(s.to_string()))
    }
}

/// Window-local coordinates relative to the center cell.
fn offset(window: &SelectionWindow, cell: GridCell) -> (i64, i64) {
    let (x, y) = window.local(cell);
    let c = (window.size / 2) as i64;
    (x as i64 - c, y as i64 - c)
}

/// Triangle index: 0 = N, 1 = E, 2 = S, 3 = W. Half-open angular sectors put
/// each diagonal into the triangle counterclockwise of it; the center goes E.
pub fn quadrant_of(window: &SelectionWindow, cell: GridCell) -> usize {
    let (dx, dy) = offset(window, cell);
    let (ax, ay) = (dx.abs(), dy.abs());
    if dx > 0 && dy == dx {
        0
    } else if dx < 0 && dy == -dx {
        3
    } else if dx < 0 && dy == dx {
        2
    } else if dx > 0 && dy == -dx {
        1
    } else if dy > ax {
        0
    } else if dy < -ax {
        2
    } else if dx < -ay {
        3
    } else {
        1
    }
}

/// Sub-square index: 0 = lower-left, 1 = lower-right, 2 = upper-right,
/// 3 = upper-left. The center row and column belong to the lower-left square.
pub fn square_of(window: &SelectionWindow, cell: GridCell) -> usize {
    let (dx, dy) = offset(window, cell);
    if dx == 0 || dy == 0 {
        return 0;
    }
    match (dx < 0, dy < 0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    }
}

/// Chebyshev distance from `cell` to each window edge, in the order
/// bottom, right, top, left.
pub fn edge_distances(window: &SelectionWindow, cell: GridCell) -> [usize; 4] {
    let (x, y) = window.local(cell);
    let last = window.size - 1;
    [y, last - x, last - y, x]
}

/// Squared Euclidean distance from `cell` to each window corner, in the order
/// lower-left, lower-right, upper-right, upper-left.
pub fn corner_distances(window: &SelectionWindow, cell: GridCell) -> [usize; 4] {
    let o = window.origin;
    let last = window.size - 1;
    let corners = [
        GridCell::new(o.col, o.row),
        GridCell::new(o.col + last, o.row),
        GridCell::new(o.col + last, o.row + last),
        GridCell::new(o.col, o.row + last),
    ];
    corners.map(|c| cell.distance_squared(c))
}

/// Picks up to `count` distinct occupied cells of the window.
///
/// Each method defines four slots visited in a fixed order, cycling when
/// `count` exceeds four. A slot draws uniformly among its best still
/// available cells; a slot with none draws from all remaining cells.
pub fn sample<G, R: Rng + ?Sized>(
    method: DasMethod,
    archive: &EliteArchive<G>,
    window: &SelectionWindow,
    count: usize,
    rng: &mut R,
) -> Result<Vec<GridCell>, EngineError> {
    let occupied = archive.occupied_cells_in(window.rect());
    if occupied.is_empty() {
        return Err(EngineError::EmptyWindow);
    }
    if method == DasMethod::Medoids {
        return Ok(kmedoids(&occupied, count).into_iter().map(|i| occupied[i]).collect());
    }

    // score(slot, cell): lower is better; None excludes the cell from the slot
    let score = |slot: usize, cell: GridCell| -> Option<usize> {
        match method {
            DasMethod::Random => Some(0),
            DasMethod::Quadrants => (quadrant_of(window, cell) == slot).then_some(0),
            DasMethod::Squares => (square_of(window, cell) == slot).then_some(0),
            DasMethod::Edges => Some(edge_distances(window, cell)[slot]),
            DasMethod::Corners => Some(corner_distances(window, cell)[slot]),
            DasMethod::Medoids => unreachable!(),
        }
    };

    let mut available = occupied;
    let mut chosen = Vec::with_capacity(count.min(available.len()));
    for i in 0..count {
        if available.is_empty() {
            break;
        }
        let slot = i % 4;
        let scored: Vec<(usize, usize)> =
            available.iter().enumerate().filter_map(|(k, &c)| score(slot, c).map(|s| (k, s))).collect();
        let pool: Vec<usize> = match scored.iter().map(|&(_, s)| s).min() {
            Some(best) => scored.into_iter().filter(|&(_, s)| s == best).map(|(k, _)| k).collect(),
            None => (0..available.len()).collect(),
        };
        let pick = pool[rng.random_range(0..pool.len())];
        chosen.push(available.remove(pick));
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> SelectionWindow {
        SelectionWindow { origin: GridCell::new(10, 20), size: 9 }
    }

    fn at(x: usize, y: usize) -> GridCell {
        GridCell::new(10 + x, 20 + y)
    }

    #[test]
    fn quadrant_diagonals_go_counterclockwise() {
        let w = window();
        assert_eq!(quadrant_of(&w, at(4, 4)), 1);
        assert_eq!(quadrant_of(&w, at(8, 8)), 0);
        assert_eq!(quadrant_of(&w, at(0, 8)), 3);
        assert_eq!(quadrant_of(&w, at(0, 0)), 2);
        assert_eq!(quadrant_of(&w, at(8, 0)), 1);
        assert_eq!(quadrant_of(&w, at(4, 8)), 0);
        assert_eq!(quadrant_of(&w, at(8, 4)), 1);
        assert_eq!(quadrant_of(&w, at(4, 0)), 2);
        assert_eq!(quadrant_of(&w, at(0, 4)), 3);
    }

    #[test]
    fn squares_give_center_lines_to_lower_left() {
        let w = window();
        assert_eq!(square_of(&w, at(4, 4)), 0);
        assert_eq!(square_of(&w, at(4, 8)), 0);
        assert_eq!(square_of(&w, at(3, 8)), 3);
        assert_eq!(square_of(&w, at(8, 4)), 0);
        assert_eq!(square_of(&w, at(8, 3)), 1);
        assert_eq!(square_of(&w, at(5, 5)), 2);
        assert_eq!(square_of(&w, at(4, 3)), 0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in DasMethod::ALL {
            assert_eq!(m.name().parse::<DasMethod>().unwrap(), m);
        }
        assert!("diagonal".parse::<DasMethod>().is_err());
    }
}
