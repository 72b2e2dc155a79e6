//! Fairness CIs when the sensitive attribute is observed on only a small
//! subset of the calibration data.
//!
//! Setup: a small labeled subset D (attribute observed, size n) and a large
//! unlabeled subset D̃ (size N ≫ n), with a surrogate predictor f_A
//! supplying a predicted attribute for every row. Directly imputing the
//! predictions biases the violation estimate; instead:
//!
//! 1. bound the imputation error ε(h) = Φ_fair(h) − Φ̃_fair(h) on D by a
//!    bootstrap over the rows that carry both the true and the predicted
//!    attribute — the interval collapses to [0, 0] when f_A is exact;
//! 2. bound Φ̃_fair(h) (the violation with respect to the predicted
//!    attribute) on the large D̃ with a standard fairness CI;
//! 3. Minkowski-sum the two intervals: coverage ≥ 1 − 2α.
//!
//! The bootstrap side is asymptotic, so the combined 1 − 2α level is
//! asymptotic too; the naive imputed CI is kept as the biased baseline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ci_fairness::{fairness_ci_union, SignedInterval};
use crate::ci_mean::{CiError, CiMethod, Interval, Side};
use crate::metrics::{self, FairnessMetric};
use crate::seed;

#[derive(Debug, Error)]
pub enum ScarceError {
    #[error("no labeled rows")]
    NoLabeled,
    #[error("confidence levels differ: {0} vs {1}")]
    LevelMismatch(f64, f64),
    #[error("resample kept missing a stratum after {0} retries")]
    RetriesExhausted(usize),
    #[error("bootstrap needs at least 1 resample")]
    NoResamples,
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Ci(#[from] CiError),
}

/// One row of the labeled subset: the model's prediction, the true and the
/// surrogate attribute, and the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub prediction: bool,
    pub attribute: bool,
    pub predicted_attribute: bool,
    pub label: bool,
}

/// Calibration data split by attribute availability, with surrogate
/// predictions for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScarcePartition {
    pub labeled: Vec<LabeledRow>,
    /// (prediction, predicted attribute, label) for the attribute-free rows.
    pub unlabeled: Vec<(bool, bool, bool)>,
}

impl ScarcePartition {
    /// Split a dataset by attribute presence. `predictions` and
    /// `predicted_a` must cover every row in dataset order.
    pub fn new(
        data: &crate::data::Dataset,
        predictions: &[bool],
        predicted_a: &[bool],
    ) -> Result<Self, ScarceError> {
        if predictions.len() != data.len() || predicted_a.len() != data.len() {
            return Err(ScarceError::Metrics(metrics::MetricsError::LengthMismatch(
                data.len(),
                predictions.len().min(predicted_a.len()),
            )));
        }
        let mut labeled = Vec::new();
        let mut unlabeled = Vec::new();
        for (i, s) in data.samples().iter().enumerate() {
            match s.a {
                Some(attribute) => labeled.push(LabeledRow {
                    prediction: predictions[i],
                    attribute,
                    predicted_attribute: predicted_a[i],
                    label: s.y,
                }),
                None => unlabeled.push((predictions[i], predicted_a[i], s.y)),
            }
        }
        if labeled.is_empty() {
            return Err(ScarceError::NoLabeled);
        }
        Ok(Self { labeled, unlabeled })
    }
}

fn plug_in_epsilon(rows: &[&LabeledRow], metric: FairnessMetric) -> Result<f64, ScarceError> {
    let preds: Vec<bool> = rows.iter().map(|r| r.prediction).collect();
    let a_true: Vec<bool> = rows.iter().map(|r| r.attribute).collect();
    let a_hat: Vec<bool> = rows.iter().map(|r| r.predicted_attribute).collect();
    let y: Vec<bool> = rows.iter().map(|r| r.label).collect();
    let phi = metrics::violation(metric, &preds, &a_true, &y)?;
    let phi_tilde = metrics::violation(metric, &preds, &a_hat, &y)?;
    Ok(phi - phi_tilde)
}

const RESAMPLE_RETRY_CAP: usize = 100;

/// Percentile-bootstrap interval on ε(h) = Φ_fair(h) − Φ̃_fair(h) from the
/// labeled rows.
///
/// Each resample draws |D| rows with replacement and evaluates the plug-in
/// difference; resamples that lose a required stratum are redrawn (up to
/// 100 retries) so the quantiles keep all `b_count` values. Deterministic
/// given the seed.
pub fn epsilon_ci_bootstrap(
    labeled: &[LabeledRow],
    metric: FairnessMetric,
    b_count: usize,
    alpha: f64,
    seed_value: u64,
) -> Result<SignedInterval, ScarceError> {
    if labeled.is_empty() {
        return Err(ScarceError::NoLabeled);
    }
    if b_count == 0 {
        return Err(ScarceError::NoResamples);
    }
    if b_count == 1 {
        log::warn!("epsilon bootstrap with a single resample gives a degenerate interval");
    }
    let n = labeled.len();
    let mut values = Vec::with_capacity(b_count);
    for b in 0..b_count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed_value, b as u64));
        let mut attempt = 0;
        let eps = loop {
            let rows: Vec<&LabeledRow> =
                (0..n).map(|_| &labeled[rng.random_range(0..n)]).collect();
            match plug_in_epsilon(&rows, metric) {
                Ok(v) => break v,
                Err(ScarceError::Metrics(metrics::MetricsError::UndefinedStratum { .. })) => {
                    attempt += 1;
                    if attempt >= RESAMPLE_RETRY_CAP {
                        return Err(ScarceError::RetriesExhausted(RESAMPLE_RETRY_CAP));
                    }
                }
                Err(e) => return Err(e),
            }
        };
        values.push(eps);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| -> f64 {
        if values.len() == 1 {
            return values[0];
        }
        let pos = q.clamp(0.0, 1.0) * (values.len() - 1) as f64;
        let idx = pos.floor() as usize;
        let frac = pos - idx as f64;
        if idx + 1 < values.len() {
            values[idx] * (1.0 - frac) + values[idx + 1] * frac
        } else {
            values[values.len() - 1]
        }
    };
    Ok(SignedInterval {
        lo: quantile(alpha / 2.0),
        hi: quantile(1.0 - alpha / 2.0),
        level: 1.0 - alpha,
    })
}

/// Standard fairness CI on Φ̃_fair(h): the union-bound construction with
/// the surrogate attribute in place of the true one, over the large
/// unlabeled subset.
pub fn tilde_fairness_ci(
    predictions: &[bool],
    predicted_a: &[bool],
    y: &[bool],
    metric: FairnessMetric,
    method: &CiMethod,
    alpha: f64,
) -> Result<Interval, ScarceError> {
    Ok(fairness_ci_union(metric, predictions, predicted_a, y, method, alpha)?)
}

/// Combine the ε interval and the Φ̃ interval into an interval on
/// Φ_fair(h): endpoint-wise Minkowski sum, clamped to [0, 1], coverage
/// ≥ 1 − 2α when both inputs hold at 1 − α.
pub fn combined_ci(eps: &SignedInterval, tilde: &Interval) -> Result<Interval, ScarceError> {
    if (eps.level - tilde.level).abs() > 1e-9 {
        return Err(ScarceError::LevelMismatch(eps.level, tilde.level));
    }
    let alpha = 1.0 - eps.level;
    Ok(Interval {
        lo: (tilde.lo + eps.lo).clamp(0.0, 1.0),
        hi: (tilde.hi + eps.hi).clamp(0.0, 1.0),
        level: 1.0 - 2.0 * alpha,
        side: Side::TwoSided,
    })
}

/// The biased baseline: a standard fairness CI computed as if the
/// surrogate attribute were real, over all rows, keeping the true
/// attribute where it was observed. Coverage degrades with the surrogate's
/// error rate; reported for comparison only.
pub fn naive_imputed_ci(
    data: &crate::data::Dataset,
    predictions: &[bool],
    predicted_a: &[bool],
    metric: FairnessMetric,
    method: &CiMethod,
    alpha: f64,
) -> Result<Interval, ScarceError> {
    let imputed: Vec<bool> = data
        .samples()
        .iter()
        .zip(predicted_a)
        .map(|(s, &hat)| s.a.unwrap_or(hat))
        .collect();
    let y = data.labels();
    log::warn!("imputed-attribute interval is biased unless the surrogate is highly accurate");
    Ok(fairness_ci_union(metric, predictions, &imputed, &y, method, alpha)?)
}

/// End-to-end corrected interval from a partition: ε bootstrap on the
/// labeled rows at 1 − α, Φ̃ CI on the unlabeled rows at 1 − α, combined
/// at 1 − 2α.
pub fn corrected_ci(
    partition: &ScarcePartition,
    metric: FairnessMetric,
    method: &CiMethod,
    b_count: usize,
    alpha: f64,
    seed_value: u64,
) -> Result<Interval, ScarceError> {
    let eps = epsilon_ci_bootstrap(&partition.labeled, metric, b_count, alpha, seed_value)?;
    let preds: Vec<bool> = partition.unlabeled.iter().map(|r| r.0).collect();
    let a_hat: Vec<bool> = partition.unlabeled.iter().map(|r| r.1).collect();
    let y: Vec<bool> = partition.unlabeled.iter().map(|r| r.2).collect();
    let tilde = tilde_fairness_ci(&preds, &a_hat, &y, metric, method, alpha)?;
    combined_ci(&eps, &tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticConfig};
    use approx::assert_abs_diff_eq;

    /// Labeled rows from synthetic data with a surrogate of given accuracy.
    fn labeled_rows(n: usize, surrogate_accuracy: f64, seed_value: u64) -> Vec<LabeledRow> {
        let data = generate_synthetic(&SyntheticConfig::with_seed(seed_value), n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed_value ^ 0xabcd);
        data.samples()
            .iter()
            .map(|s| {
                let a = s.a.unwrap();
                let keep = rng.random::<f64>() < surrogate_accuracy;
                LabeledRow {
                    prediction: s.x[0] > 1.0,
                    attribute: a,
                    predicted_attribute: if keep { a } else { !a },
                    label: s.y,
                }
            })
            .collect()
    }

    #[test]
    fn perfect_surrogate_gives_zero_interval() {
        let rows = labeled_rows(80, 1.0, 3);
        let ci = epsilon_ci_bootstrap(&rows, FairnessMetric::DemographicParity, 200, 0.05, 9)
            .unwrap();
        assert_eq!((ci.lo, ci.hi), (0.0, 0.0));
    }

    #[test]
    fn single_resample_degenerates() {
        let rows = labeled_rows(60, 0.7, 4);
        let ci =
            epsilon_ci_bootstrap(&rows, FairnessMetric::DemographicParity, 1, 0.05, 9).unwrap();
        assert_eq!(ci.lo, ci.hi);
    }

    #[test]
    fn epsilon_interval_narrows_with_n() {
        let metric = FairnessMetric::DemographicParity;
        let small = labeled_rows(50, 0.7, 5);
        let large = labeled_rows(500, 0.7, 5);
        let ci_small = epsilon_ci_bootstrap(&small, metric, 300, 0.05, 9).unwrap();
        let ci_large = epsilon_ci_bootstrap(&large, metric, 300, 0.05, 9).unwrap();
        assert!(
            ci_large.hi - ci_large.lo < ci_small.hi - ci_small.lo,
            "width did not shrink: {} vs {}",
            ci_large.hi - ci_large.lo,
            ci_small.hi - ci_small.lo
        );
    }

    #[test]
    fn epsilon_bootstrap_deterministic() {
        let rows = labeled_rows(70, 0.8, 6);
        let a = epsilon_ci_bootstrap(&rows, FairnessMetric::DemographicParity, 250, 0.05, 42)
            .unwrap();
        let b = epsilon_ci_bootstrap(&rows, FairnessMetric::DemographicParity, 250, 0.05, 42)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn combined_interval_arithmetic() {
        let level = 0.95;
        let eps = SignedInterval { lo: -0.05, hi: 0.02, level };
        let tilde = Interval { lo: 0.10, hi: 0.20, level, side: Side::TwoSided };
        let combined = combined_ci(&eps, &tilde).unwrap();
        assert_abs_diff_eq!(combined.lo, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(combined.hi, 0.22, epsilon = 1e-15);
        assert_abs_diff_eq!(combined.level, 0.90, epsilon = 1e-12);

        // identity summand
        let zero = SignedInterval { lo: 0.0, hi: 0.0, level };
        let same = combined_ci(&zero, &tilde).unwrap();
        assert_eq!((same.lo, same.hi), (tilde.lo, tilde.hi));

        // clamp at zero
        let wide = SignedInterval { lo: -0.5, hi: 0.0, level };
        let clamped = combined_ci(&wide, &tilde).unwrap();
        assert_eq!(clamped.lo, 0.0);
        assert_abs_diff_eq!(clamped.hi, 0.2, epsilon = 1e-15);

        // level mismatch is an error
        let other = Interval { lo: 0.1, hi: 0.2, level: 0.9, side: Side::TwoSided };
        assert!(matches!(combined_ci(&eps, &other), Err(ScarceError::LevelMismatch(..))));
    }

    #[test]
    fn tilde_ci_tightens_with_more_rows() {
        let metric = FairnessMetric::DemographicParity;
        let make = |n: usize| {
            let data = generate_synthetic(&SyntheticConfig::with_seed(7), n).unwrap();
            let preds: Vec<bool> = data.samples().iter().map(|s| s.x[0] > 0.6).collect();
            let a_hat: Vec<bool> = data.samples().iter().map(|s| s.a.unwrap()).collect();
            let y = data.labels();
            tilde_fairness_ci(&preds, &a_hat, &y, metric, &CiMethod::Hoeffding, 0.05).unwrap()
        };
        let wide = make(50);
        let tight = make(2500);
        assert!(tight.width() < wide.width());
    }

    #[test]
    fn tilde_ci_one_class_surrogate_errors() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(8), 100).unwrap();
        let preds: Vec<bool> = data.samples().iter().map(|s| s.x[0] > 0.5).collect();
        let a_hat = vec![true; 100];
        let y = data.labels();
        assert!(tilde_fairness_ci(
            &preds,
            &a_hat,
            &y,
            FairnessMetric::DemographicParity,
            &CiMethod::Hoeffding,
            0.05
        )
        .is_err());
    }

    #[test]
    fn naive_coverage_recovers_with_surrogate_accuracy() {
        // the imputed interval is badly miscalibrated under a coin-flip
        // surrogate and recovers as the surrogate improves
        let metric = FairnessMetric::DemographicParity;
        let threshold = 1.0;
        let (_, true_phi) =
            crate::oracle::analytic_point(metric, threshold, &SyntheticConfig::default())
                .unwrap();
        let coverage = |surrogate_accuracy: f64| {
            let redraws = 150;
            let mut hits = 0;
            for r in 0..redraws {
                let data = generate_synthetic(
                    &SyntheticConfig::with_seed(7_000 + r as u64),
                    800,
                )
                .unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(8_000 + r as u64);
                let preds: Vec<bool> =
                    data.samples().iter().map(|s| s.x[0] > threshold).collect();
                let a_hat: Vec<bool> = data
                    .samples()
                    .iter()
                    .map(|s| {
                        let a = s.a.unwrap();
                        if rng.random::<f64>() < surrogate_accuracy {
                            a
                        } else {
                            !a
                        }
                    })
                    .collect();
                // all attributes treated as missing: pure imputation
                let blind = crate::data::Dataset::new(
                    data.samples()
                        .iter()
                        .map(|s| crate::data::Sample { x: s.x.clone(), a: None, y: s.y })
                        .collect(),
                )
                .unwrap();
                let ci = naive_imputed_ci(
                    &blind,
                    &preds,
                    &a_hat,
                    metric,
                    &CiMethod::Hoeffding,
                    0.05,
                )
                .unwrap();
                if ci.contains(true_phi) {
                    hits += 1;
                }
            }
            hits as f64 / redraws as f64
        };
        let poor = coverage(0.5);
        let good = coverage(0.95);
        assert!(poor < 0.90, "coin-flip surrogate looked calibrated: {poor}");
        assert!(good > poor, "coverage did not recover: {good} vs {poor}");
    }

    #[test]
    fn partition_routes_rows() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(9), 40).unwrap();
        let mut samples = data.samples().to_vec();
        for s in samples.iter_mut().take(25) {
            s.a = None;
        }
        let data = crate::data::Dataset::new(samples).unwrap();
        let preds = vec![true; 40];
        let a_hat = vec![false; 40];
        let p = ScarcePartition::new(&data, &preds, &a_hat).unwrap();
        assert_eq!(p.unlabeled.len(), 25);
        assert_eq!(p.labeled.len(), 15);
    }
}
