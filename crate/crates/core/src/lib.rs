//! Interactive quality-diversity search.
//!
//! The engine keeps two MAP-Elites archives (feasible and infeasible), a
//! selection window that follows the user's choices, and a set of sampling
//! rules that decide which elites are shown at each step. The bundled domain
//! generates constrained apartment floorplans on a Voronoi tessellation.

pub mod archive;
pub mod domain;
pub mod engine;
pub mod floorplan;
pub mod metrics;
pub mod users;

pub use archive::{ArchiveConfig, CellRect, Elite, EliteArchive, GridCell, InsertOutcome, QualityRole};
pub use domain::{Domain, DomainError, Evaluation};
pub use engine::{DasMethod, SelectionWindow, Session, SessionConfig};
pub use floorplan::{DesignSpec, DomainConfig, FloorplanDomain, LayoutGenome};
pub use users::UserId;
