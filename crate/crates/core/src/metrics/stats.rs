use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Two-tailed.
    pub p: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Two-sample Student's t-test with pooled variance.
///
/// With zero pooled variance the samples are either identical in mean
/// (t = 0, p = 1) or perfectly separated (t = ±inf, p = 0).
pub fn t_test(a: &[f64], b: &[f64]) -> Result<TTest, MetricsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(MetricsError::TooFewPoints { needed: 2, got: a.len().min(b.len()) });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let dof = na + nb - 2.0;
    let pooled = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / dof;
    let diff = ma - mb;
    if pooled == 0.0 {
        return Ok(if diff == 0.0 {
            TTest { t: 0.0, p: 1.0 }
        } else {
            TTest { t: diff.signum() * f64::INFINITY, p: 0.0 }
        });
    }
    let t = diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof).expect("degrees of freedom are positive");
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest { t, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_are_indistinguishable() {
        let a = [0.3, 0.5, 0.4, 0.6];
        let r = t_test(&a, &a).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let r = t_test(&[2.0; 3], &[2.0; 5]).unwrap();
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn separated_constants_are_certain() {
        let r = t_test(&[0.0; 5], &[1.0; 5]).unwrap();
        assert_eq!(r.p, 0.0);
        assert!(r.t < 0.0);
    }

    #[test]
    fn swapping_samples_negates_t() {
        let (a, b) = ([1.0, 2.0, 3.0, 4.0], [2.5, 3.5, 4.5, 6.0]);
        let ab = t_test(&a, &b).unwrap();
        let ba = t_test(&b, &a).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.p, ba.p);
    }

    #[test]
    fn matches_a_hand_computed_case() {
        // means 2 and 4, pooled variance 1, n = 3 each: t = -2 / sqrt(2/3)
        let r = t_test(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap();
        assert!((r.t + 6f64.sqrt()).abs() < 1e-12);
        // two-tailed p of |t| = 2.449 with 4 degrees of freedom
        assert!((r.p - 0.0704).abs() < 5e-4, "{}", r.p);
    }
}
