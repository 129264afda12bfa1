use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("degenerate tessellation: {0}")]
    DegenerateTessellation(String),
    #[error("non-finite behavior characterization {0:?}")]
    NonFiniteBehavior([f64; 2]),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("angle {0} is outside [0, pi]")]
    AngleOutOfRange(f64),
}

/// Result of evaluating one individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub feasible: bool,
    /// Mean of `constraint_scores`; quality in the infeasible archive.
    pub feasibility_score: f64,
    pub constraint_scores: Vec<f64>,
    /// Quality in the feasible archive.
    pub fitness: f64,
    pub bc: [f64; 2],
}

impl Evaluation {
    /// Evaluation with no constraint breakdown, mostly useful for synthetic archives.
    pub fn simple(feasible: bool, fitness: f64, feasibility_score: f64, bc: [f64; 2]) -> Self {
        Self { feasible, feasibility_score, constraint_scores: Vec::new(), fitness, bc }
    }
}

/// A search problem the engine can drive.
///
/// Implementations must be deterministic given the RNG stream they are handed:
/// the session relies on this for reproducible runs.
pub trait Domain: Send + Sync {
    type Genome: Clone + Send + Sync;

    fn random_genome(&self, rng: &mut dyn RngCore) -> Self::Genome;

    fn mutate(&self, parent: &Self::Genome, rng: &mut dyn RngCore) -> Self::Genome;

    fn evaluate(&self, genome: &Self::Genome) -> Result<Evaluation, DomainError>;
}
