use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::experiment::{Driver, RunLog};
use super::measures::auc;
use super::stats::{mean, t_test};
use super::MetricsError;
use crate::users::UserId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Coverage,
    MaxFitness,
    QdScore,
    MaxUsc,
    MeanUsc,
    MeanWusc,
    SumWusc,
    UscEfficiency,
    LocalDiversity,
    LocalFitness,
    LocalUsc,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::Coverage,
        Metric::MaxFitness,
        Metric::QdScore,
        Metric::MaxUsc,
        Metric::MeanUsc,
        Metric::MeanWusc,
        Metric::SumWusc,
        Metric::UscEfficiency,
        Metric::LocalDiversity,
        Metric::LocalFitness,
        Metric::LocalUsc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::MaxFitness => "max_fitness",
            Metric::QdScore => "qd_score",
            Metric::MaxUsc => "max_usc",
            Metric::MeanUsc => "mean_usc",
            Metric::MeanWusc => "mean_wusc",
            Metric::SumWusc => "sum_wusc",
            Metric::UscEfficiency => "usc_efficiency",
            Metric::LocalDiversity => "local_diversity",
            Metric::LocalFitness => "local_fitness",
            Metric::LocalUsc => "local_usc",
        }
    }

    /// Whether the metric depends on a user's preferences.
    pub fn needs_user(self) -> bool {
        !matches!(self, Metric::Coverage | Metric::MaxFitness | Metric::QdScore | Metric::LocalDiversity | Metric::LocalFitness)
    }

    /// Whether the metric is a time series summarized by its AUC.
    pub fn is_series(self) -> bool {
        matches!(
            self,
            Metric::Coverage
                | Metric::MaxFitness
                | Metric::QdScore
                | Metric::MaxUsc
                | Metric::MeanUsc
                | Metric::MeanWusc
                | Metric::SumWusc
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| MetricsError::UnknownMetric(s.to_string()))
    }
}

/// Time series of a metric over a run, as `(evaluations, value)`.
pub fn series(log: &RunLog, metric: Metric, user: Option<UserId>) -> Result<Vec<(u64, f64)>, MetricsError> {
    if !metric.is_series() {
        return Err(MetricsError::NotASeries(metric.name()));
    }
    log.snapshots
        .iter()
        .map(|s| {
            let value = match metric {
                Metric::Coverage => s.coverage,
                Metric::MaxFitness => s.max_fitness,
                Metric::QdScore => s.qd_score,
                _ => {
                    let user = user.ok_or(MetricsError::NoUser(metric.name()))?;
                    let m = s.usc_of(user).ok_or(MetricsError::NotScored(user))?;
                    match metric {
                        Metric::MaxUsc => m.max_usc,
                        Metric::MeanUsc => m.mean_usc,
                        Metric::MeanWusc => m.mean_wusc,
                        _ => m.sum_wusc,
                    }
                }
            };
            Ok((s.evals, value))
        })
        .collect()
}

/// Scalar summary of one run: AUC for time series, the efficiency of the
/// choices, or the mean over selections of a per-batch metric.
pub fn run_value(log: &RunLog, metric: Metric, user: Option<UserId>) -> Result<f64, MetricsError> {
    if metric.is_series() {
        return auc(&series(log, metric, user)?);
    }
    if metric == Metric::UscEfficiency {
        return log.usc_efficiency(user.ok_or(MetricsError::NoUser(metric.name()))?);
    }
    if log.selections.is_empty() {
        return Err(MetricsError::NoSelections(metric.name()));
    }
    let per_batch: Vec<f64> = log
        .selections
        .iter()
        .map(|s| match metric {
            Metric::LocalDiversity => Ok(s.local.diversity),
            Metric::LocalFitness => Ok(s.local.mean_fitness),
            _ => {
                // the logged score belongs to the driver; other users are rescored
                let user = user.ok_or(MetricsError::NoUser(metric.name()))?;
                let n = s.alternatives.len() as f64;
                Ok(s.alternatives.iter().map(|a| user.usc(a.bc, s.index)).sum::<f64>() / n)
            }
        })
        .collect::<Result<_, MetricsError>>()?;
    Ok(mean(&per_batch))
}

pub fn run_values(logs: &[RunLog], metric: Metric, user: Option<UserId>) -> Result<Vec<f64>, MetricsError> {
    logs.iter().map(|log| run_value(log, metric, user)).collect()
}

/// The user a comparison is scored for: the one given, else the driver of
/// the first experiment that has one.
pub fn comparison_user(a: &[RunLog], b: &[RunLog], user: Option<UserId>) -> Option<UserId> {
    user.or_else(|| {
        a.iter().chain(b).find_map(|log| match log.config.driver {
            Driver::User(u) => Some(u),
            Driver::Human | Driver::Baseline => None,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: Metric,
    pub user: Option<UserId>,
    pub runs: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub p: f64,
    /// Significance level after dividing alpha by the number of comparisons.
    pub threshold: f64,
    pub significant: bool,
    pub winner: Option<Winner>,
    /// Paired runs in which A scored strictly higher.
    pub a_higher: usize,
}

/// Per-metric t-tests between two experiments with Bonferroni correction
/// over `comparisons` tests.
pub fn compare(
    a: &[RunLog],
    b: &[RunLog],
    metrics: &[Metric],
    user: Option<UserId>,
    alpha: f64,
    comparisons: usize,
) -> Result<Vec<ComparisonRow>, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::MismatchedRuns { a: a.len(), b: b.len() });
    }
    let user = comparison_user(a, b, user);
    let threshold = alpha / comparisons.max(1) as f64;
    metrics
        .iter()
        .map(|&metric| {
            let user = user.filter(|_| metric.needs_user());
            let va = run_values(a, metric, user)?;
            let vb = run_values(b, metric, user)?;
            let test = t_test(&va, &vb)?;
            let significant = test.p < threshold;
            let (mean_a, mean_b) = (mean(&va), mean(&vb));
            let winner = significant.then_some(if mean_a > mean_b { Winner::A } else { Winner::B });
            Ok(ComparisonRow {
                metric,
                user,
                runs: va.len(),
                mean_a,
                mean_b,
                t: test.t,
                p: test.p,
                threshold,
                significant,
                winner,
                a_higher: va.iter().zip(&vb).filter(|(x, y)| x > y).count(),
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "user", "runs", "mean_a", "mean_b", "t", "p", "threshold", "significant", "winner", "a_higher"])?;
    for r in rows {
        w.write_record([
            r.metric.name().to_string(),
            r.user.map(|u| u.to_string()).unwrap_or_default(),
            r.runs.to_string(),
            r.mean_a.to_string(),
            r.mean_b.to_string(),
            r.t.to_string(),
            r.p.to_string(),
            r.threshold.to_string(),
            r.significant.to_string(),
            match r.winner {
                Some(Winner::A) => "a".into(),
                Some(Winner::B) => "b".into(),
                None => String::new(),
            },
            r.a_higher.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
