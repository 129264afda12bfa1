use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::archive::EliteArchive;
use crate::domain::Evaluation;
use crate::users::UserId;

/// Preference metrics of a user over the feasible archive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UscMetrics {
    pub max_usc: f64,
    pub mean_usc: f64,
    /// Mean of user score times fitness.
    pub mean_wusc: f64,
    pub sum_wusc: f64,
}

pub fn usc_metrics<G>(feasible: &EliteArchive<G>, user: UserId, s: usize) -> UscMetrics {
    usc_metrics_of(feasible.iter().map(|e| &e.evaluation), user, s)
}

pub fn usc_metrics_of<'a>(evaluations: impl IntoIterator<Item = &'a Evaluation>, user: UserId, s: usize) -> UscMetrics {
    let mut n = 0usize;
    let mut max_usc = 0.0f64;
    let mut sum_usc = 0.0;
    let mut sum_wusc = 0.0;
    for e in evaluations {
        let usc = user.usc(e.bc, s);
        n += 1;
        max_usc = max_usc.max(usc);
        sum_usc += usc;
        sum_wusc += usc * e.fitness;
    }
    if n == 0 {
        return UscMetrics::default();
    }
    UscMetrics { max_usc, mean_usc: sum_usc / n as f64, mean_wusc: sum_wusc / n as f64, sum_wusc }
}

/// Spread and quality of one batch of alternatives shown together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMetrics {
    /// Mean pairwise Euclidean distance between behaviors; 0 for a single alternative.
    pub diversity: f64,
    pub mean_fitness: f64,
    /// Absent when nobody's preferences are known, as for a human designer.
    pub mean_usc: Option<f64>,
}

pub fn local_metrics(alternatives: &[Evaluation], user: UserId, s: usize) -> Result<LocalMetrics, MetricsError> {
    let mut local = local_spread(alternatives)?;
    let n = alternatives.len() as f64;
    local.mean_usc = Some(alternatives.iter().map(|e| user.usc(e.bc, s)).sum::<f64>() / n);
    Ok(local)
}

/// Diversity and fitness of a batch, without any preference score.
pub fn local_spread(alternatives: &[Evaluation]) -> Result<LocalMetrics, MetricsError> {
    if alternatives.is_empty() {
        return Err(MetricsError::NoAlternatives);
    }
    let n = alternatives.len() as f64;
    let mut distance = 0.0;
    let mut pairs = 0usize;
    for (i, a) in alternatives.iter().enumerate() {
        for b in &alternatives[i + 1..] {
            distance += (a.bc[0] - b.bc[0]).hypot(a.bc[1] - b.bc[1]);
            pairs += 1;
        }
    }
    Ok(LocalMetrics {
        diversity: if pairs == 0 { 0.0 } else { distance / pairs as f64 },
        mean_fitness: alternatives.iter().map(|e| e.fitness).sum::<f64>() / n,
        mean_usc: None,
    })
}

/// Net progress of successive selections relative to their total movement,
/// in [-1, 1]. A sequence that never moves scores 0.
pub fn usc_efficiency(selected: &[f64]) -> Result<f64, MetricsError> {
    if selected.len() < 2 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: selected.len() });
    }
    let (mut net, mut total) = (0.0, 0.0);
    for pair in selected.windows(2) {
        let d = pair[1] - pair[0];
        net += d;
        total += d.abs();
    }
    Ok(if total == 0.0 { 0.0 } else { net / total })
}

/// Trapezoidal area under `(evaluations, value)` points divided by the
/// evaluation span, so a constant series has its own value as AUC.
pub fn auc(series: &[(u64, f64)]) -> Result<f64, MetricsError> {
    if series.len() < 2 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: series.len() });
    }
    let mut area = 0.0;
    for pair in series.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        if x1 <= x0 {
            return Err(MetricsError::NotIncreasing { at: x1 });
        }
        area += (x1 - x0) as f64 * 0.5 * (y0 + y1);
    }
    let span = (series[series.len() - 1].0 - series[0].0) as f64;
    Ok(area / span)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elite(bc: [f64; 2], fitness: f64) -> Evaluation {
        Evaluation::simple(true, fitness, 1.0, bc)
    }

    #[test]
    fn usc_metrics_examples() {
        assert_eq!(usc_metrics_of([], UserId::U1, 1), UscMetrics::default());
        let one = usc_metrics_of(&[elite([0.8, 0.1], 0.9)], UserId::U1, 1);
        assert!((one.max_usc - 0.8).abs() < 1e-12);
        assert!((one.mean_usc - 0.8).abs() < 1e-12);
        assert!((one.mean_wusc - 0.72).abs() < 1e-12);
        assert!((one.sum_wusc - 0.72).abs() < 1e-12);
        let two = usc_metrics_of(&[elite([0.4, 0.0], 1.0), elite([0.8, 0.0], 1.0)], UserId::U1, 1);
        assert!((two.mean_usc - 0.6).abs() < 1e-12);
        assert!((two.sum_wusc - 1.2).abs() < 1e-12);
    }

    #[test]
    fn local_metrics_examples() {
        assert!(local_metrics(&[], UserId::U1, 1).is_err());
        assert_eq!(local_metrics(&[elite([0.3, 0.3], 1.0)], UserId::U1, 1).unwrap().diversity, 0.0);
        let d = local_metrics(&[elite([0.0, 0.0], 1.0), elite([1.0, 1.0], 0.5)], UserId::U3, 1).unwrap();
        assert!((d.diversity - 2f64.sqrt()).abs() < 1e-12);
        assert!((d.mean_fitness - 0.75).abs() < 1e-12);
        assert!((d.mean_usc.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(local_spread(&[elite([0.0, 0.0], 1.0)]).unwrap().mean_usc, None);
        let same = vec![elite([0.2, 0.7], 1.0); 4];
        assert_eq!(local_metrics(&same, UserId::U1, 1).unwrap().diversity, 0.0);
    }

    #[test]
    fn auc_examples() {
        assert!((auc(&[(0, 0.5), (700, 0.5), (3000, 0.5)]).unwrap() - 0.5).abs() < 1e-12);
        assert!((auc(&[(0, 0.0), (10, 1.0)]).unwrap() - 0.5).abs() < 1e-12);
        assert!(auc(&[(0, 1.0)]).is_err());
        assert!(auc(&[(5, 1.0), (5, 2.0)]).is_err());
    }
}
