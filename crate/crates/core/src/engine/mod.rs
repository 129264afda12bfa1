//! The interactive search loop.

mod das;
mod kmedoids;
mod session;
mod window;

use thiserror::Error;

use crate::archive::ArchiveError;
use crate::domain::DomainError;

pub use das::{corner_distances, edge_distances, quadrant_of, sample, square_of, DasMethod};
pub use kmedoids::{clustering_cost, kmedoids};
pub use session::{ParentSelection, SelectionRecord, Session, SessionConfig};
pub use window::{initial_window, SelectionWindow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("invalid session configuration: {0}")]
    InvalidConfig(String),
    #[error("warm-up reached {evaluations} evaluations with feasible coverage {coverage:.4}, below the target")]
    WarmupExhausted { evaluations: u64, coverage: f64 },
    #[error("the feasible archive is empty")]
    EmptyArchive,
    #[error("no occupied cell inside the selection window")]
    EmptyWindow,
    #[error("no alternatives have been sampled since the last selection")]
    NoAlternatives,
    #[error("alternative {index} does not exist; {available} were offered")]
    InvalidChoice { index: usize, available: usize },
    #[error("unknown sampling method {0:?}")]
    UnknownMethod(String),
}
