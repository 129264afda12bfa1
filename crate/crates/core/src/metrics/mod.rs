//! Run metrics, experiment driver and statistics.

mod compare;
mod experiment;
mod measures;
mod stats;

use thiserror::Error;

use crate::engine::EngineError;
use crate::users::{UserError, UserId};

pub use compare::{compare, comparison_user, run_value, run_values, series, write_csv, ComparisonRow, Metric, Winner};
pub use experiment::{
    read_jsonl, run_experiment, run_from, snapshot, warm_up, write_jsonl, AlternativeLog, ArchiveDump, CellDump, Driver,
    ExperimentConfig, RunLog, SelectionLog, Snapshot, UserScore,
};
pub use measures::{auc, local_metrics, local_spread, usc_efficiency, usc_metrics, usc_metrics_of, LocalMetrics, UscMetrics};
pub use stats::{mean, t_test, TTest};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("evaluation counts must increase strictly (repeated or decreasing at {at})")]
    NotIncreasing { at: u64 },
    #[error("no alternatives to measure")]
    NoAlternatives,
    #[error("experiments have {a} and {b} runs; comparisons need equal counts")]
    MismatchedRuns { a: usize, b: usize },
    #[error("metric {0} needs a user")]
    NoUser(&'static str),
    #[error("user {0} was not scored in this run")]
    NotScored(UserId),
    #[error("metric {0} needs selections, but the run has none")]
    NoSelections(&'static str),
    #[error("metric {0} is not a time series")]
    NotASeries(&'static str),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    User(#[from] UserError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
