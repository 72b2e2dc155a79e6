//! Confidence intervals on a model's fairness violation.
//!
//! A violation is |Φ±| per stratum, where Φ± = Σ_j E[g_j | E_j] is a signed
//! gap of conditional expectations. Two routes to an interval on it:
//!
//! - Union bound: a CI per term at level 1 − α/m, Minkowski-summed into a
//!   signed interval, then mapped through |·|. Valid in finite samples
//!   whenever the per-term method is, at the cost of some conservatism.
//! - Subsampling: draw l = min event size rows without replacement from
//!   each event subset and pair them by draw order. The per-row sums
//!   φ_i = Σ_j g_j(row_i^{(j)}) are i.i.d. unbiased estimates of Φ±, so a
//!   single concentration bound applies. No union bound, but up to
//!   (max − min) event-size rows are discarded.
//!
//! EO is handled per stratum: each label stratum's signed gap gets its own
//! pipeline at level 1 − α/2, the absolute intervals are then half-summed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ci_mean::{self, CiError, CiMethod, Interval, Side};
use crate::metrics::{decompose, FairnessMetric, MetricsError, Term};
use crate::seed;

/// An interval on a signed quantity in [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

/// Image of a signed interval under |·|.
pub fn abs_interval(s: &SignedInterval) -> Interval {
    let (lo, hi) = if s.lo <= 0.0 && 0.0 <= s.hi {
        (0.0, (-s.lo).max(s.hi))
    } else if s.lo > 0.0 {
        (s.lo, s.hi)
    } else {
        (-s.hi, -s.lo)
    };
    Interval { lo, hi, level: s.level, side: Side::TwoSided }
}

fn event_rows(a: &[bool], y: &[bool], term: &Term) -> Vec<usize> {
    (0..a.len())
        .filter(|&i| {
            a[i] == term.event.group && term.event.label.is_none_or(|l| l == y[i])
        })
        .collect()
}

fn check_inputs(predictions: &[bool], a: &[bool], y: &[bool]) -> Result<(), CiError> {
    if predictions.len() != a.len() || predictions.len() != y.len() {
        return Err(CiError::Metrics(MetricsError::LengthMismatch(
            predictions.len(),
            a.len().max(y.len()),
        )));
    }
    if predictions.is_empty() {
        return Err(CiError::Metrics(MetricsError::Empty));
    }
    Ok(())
}

fn missing_stratum_error(term: &Term) -> CiError {
    CiError::Metrics(MetricsError::UndefinedStratum {
        group: term.event.group,
        label: term.event.label,
    })
}

/// Union-bound interval on Φ_fair(h) at level 1 − α.
///
/// Each term's conditional rate gets a two-sided `mean_ci` at level
/// 1 − α/m on its event-restricted prediction indicators.
pub fn fairness_ci_union(
    metric: FairnessMetric,
    predictions: &[bool],
    a: &[bool],
    y: &[bool],
    method: &CiMethod,
    alpha: f64,
) -> Result<Interval, CiError> {
    check_inputs(predictions, a, y)?;
    let decomp = decompose(metric);
    let m = decomp.m();
    let mut per_stratum = Vec::new();
    for (s_idx, stratum) in decomp.strata.iter().enumerate() {
        let weight = stratum.terms[0].weight;
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (t_idx, term) in stratum.terms.iter().enumerate() {
            let rows = event_rows(a, y, term);
            if rows.is_empty() {
                return Err(missing_stratum_error(term));
            }
            let samples: Vec<f64> =
                rows.iter().map(|&i| if predictions[i] { 1.0 } else { 0.0 }).collect();
            let stream = (s_idx * 2 + t_idx) as u64;
            let ci = ci_mean::mean_ci(
                &samples,
                &method.with_stream(stream),
                alpha / m as f64,
                Side::TwoSided,
            )?;
            if term.sign > 0.0 {
                lo += ci.lo;
                hi += ci.hi;
            } else {
                lo -= ci.hi;
                hi -= ci.lo;
            }
        }
        let signed = SignedInterval { lo, hi, level: 1.0 - alpha };
        per_stratum.push((weight, abs_interval(&signed)));
    }
    Ok(combine_strata(&per_stratum, alpha))
}

/// Subsampling interval on Φ_fair(h) at level 1 − α.
///
/// Rows are paired by draw order within each event subset; the permutation
/// is derived from `seed`, so the interval is reproducible.
pub fn fairness_ci_subsample(
    metric: FairnessMetric,
    predictions: &[bool],
    a: &[bool],
    y: &[bool],
    method: &CiMethod,
    alpha: f64,
    seed: u64,
) -> Result<Interval, CiError> {
    check_inputs(predictions, a, y)?;
    let decomp = decompose(metric);
    let n_strata = decomp.strata.len();
    let stratum_alpha = alpha / n_strata as f64;
    let mut per_stratum = Vec::new();
    for (s_idx, stratum) in decomp.strata.iter().enumerate() {
        let weight = stratum.terms[0].weight;
        let mut drawn: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut l = usize::MAX;
        let mut max_size = 0usize;
        for (t_idx, term) in stratum.terms.iter().enumerate() {
            let mut rows = event_rows(a, y, term);
            if rows.is_empty() {
                return Err(missing_stratum_error(term));
            }
            l = l.min(rows.len());
            max_size = max_size.max(rows.len());
            let stream = (s_idx * 2 + t_idx) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, stream));
            for i in (1..rows.len()).rev() {
                let j = rng.random_range(0..=i);
                rows.swap(i, j);
            }
            drawn.push((term.sign, rows));
        }
        if (l as f64) < 0.25 * max_size as f64 {
            log::warn!(
                "subsampling keeps only {l} of {max_size} rows in the largest event; \
                 the interval may be loose"
            );
        }
        let phis: Vec<f64> = (0..l)
            .map(|i| {
                drawn
                    .iter()
                    .map(|(sign, rows)| {
                        sign * if predictions[rows[i]] { 1.0 } else { 0.0 }
                    })
                    .sum()
            })
            .collect();
        let ci = ci_mean::mean_ci_in_range(
            &phis,
            (-1.0, 1.0),
            &method.with_stream(s_idx as u64),
            stratum_alpha,
            Side::TwoSided,
        )?;
        let signed = SignedInterval { lo: ci.lo, hi: ci.hi, level: 1.0 - stratum_alpha };
        per_stratum.push((weight, abs_interval(&signed)));
    }
    Ok(combine_strata(&per_stratum, alpha))
}

/// Weighted Minkowski sum of per-stratum absolute intervals, clamped to
/// the unit interval.
fn combine_strata(per_stratum: &[(f64, Interval)], alpha: f64) -> Interval {
    let lo: f64 = per_stratum.iter().map(|(w, i)| w * i.lo).sum();
    let hi: f64 = per_stratum.iter().map(|(w, i)| w * i.hi).sum();
    Interval {
        lo: lo.clamp(0.0, 1.0),
        hi: hi.clamp(0.0, 1.0),
        level: 1.0 - alpha,
        side: Side::TwoSided,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci_mean::hoeffding_halfwidth;
    use crate::metrics::violation;
    use approx::assert_abs_diff_eq;

    #[test]
    fn abs_interval_cases() {
        let level = 0.95;
        let positive = abs_interval(&SignedInterval { lo: 0.1, hi: 0.3, level });
        assert_eq!((positive.lo, positive.hi), (0.1, 0.3));
        let negative = abs_interval(&SignedInterval { lo: -0.3, hi: -0.1, level });
        assert_eq!((negative.lo, negative.hi), (0.1, 0.3));
        let straddling = abs_interval(&SignedInterval { lo: -0.2, hi: 0.1, level });
        assert_eq!((straddling.lo, straddling.hi), (0.0, 0.2));
    }

    /// Balanced two-group data with identical empirical rates.
    fn equal_rate_data(per_group: usize) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
        let mut preds = Vec::new();
        let mut a = Vec::new();
        for group in [true, false] {
            for i in 0..per_group {
                preds.push(i % 2 == 0);
                a.push(group);
            }
        }
        let y = vec![true; preds.len()];
        (preds, a, y)
    }

    #[test]
    fn union_equal_rates_hoeffding_composition() {
        // groups with identical empirical rates: interval = [0, d1 + d2]
        let (preds, a, y) = equal_rate_data(100);
        let ci = fairness_ci_union(
            FairnessMetric::DemographicParity,
            &preds,
            &a,
            &y,
            &CiMethod::Hoeffding,
            0.05,
        )
        .unwrap();
        // per-term level is alpha/m = 0.025, two-sided
        let delta = hoeffding_halfwidth(100, 0.025 / 2.0);
        assert_eq!(ci.lo, 0.0);
        assert_abs_diff_eq!(ci.hi, 2.0 * delta, epsilon = 1e-12);
    }

    #[test]
    fn subsample_min_rule_and_exact_center_on_balance() {
        // unbalanced: l = min group size
        let mut preds = vec![true; 30];
        preds.extend(vec![false; 50]);
        let mut a = vec![true; 30];
        a.extend(vec![false; 50]);
        let y = vec![true; 80];
        let ci = fairness_ci_subsample(
            FairnessMetric::DemographicParity,
            &preds,
            &a,
            &y,
            &CiMethod::Hoeffding,
            0.05,
            3,
        )
        .unwrap();
        // gap is exactly 1.0 regardless of which 30 of the 50 are drawn
        assert!(ci.hi >= 1.0 - 1e-12);

        // balanced groups: mean of phi equals the plug-in signed gap exactly
        let (preds, a, y) = equal_rate_data(40);
        let ci = fairness_ci_subsample(
            FairnessMetric::DemographicParity,
            &preds,
            &a,
            &y,
            &CiMethod::Clt,
            0.05,
            3,
        )
        .unwrap();
        // plug-in gap is 0; CLT interval is symmetric, so |.| maps to [0, w]
        assert_eq!(ci.lo, 0.0);
    }

    #[test]
    fn subsample_no_wider_than_union_on_balanced_data() {
        let data = crate::data::generate_synthetic(
            &crate::data::SyntheticConfig::with_seed(8),
            2000,
        )
        .unwrap();
        // threshold classifier at 0.5, balanced-ish groups; trim to exact balance
        let mut g1: Vec<usize> = Vec::new();
        let mut g0: Vec<usize> = Vec::new();
        for (i, s) in data.samples().iter().enumerate() {
            if s.a == Some(true) {
                g1.push(i);
            } else {
                g0.push(i);
            }
        }
        let k = g1.len().min(g0.len());
        let keep: Vec<usize> = g1[..k].iter().chain(&g0[..k]).copied().collect();
        let preds: Vec<bool> = keep.iter().map(|&i| data.samples()[i].x[0] > 0.5).collect();
        let a: Vec<bool> = keep.iter().map(|&i| data.samples()[i].a.unwrap()).collect();
        let y: Vec<bool> = keep.iter().map(|&i| data.samples()[i].y).collect();

        let union = fairness_ci_union(
            FairnessMetric::DemographicParity,
            &preds,
            &a,
            &y,
            &CiMethod::Hoeffding,
            0.05,
        )
        .unwrap();
        let sub = fairness_ci_subsample(
            FairnessMetric::DemographicParity,
            &preds,
            &a,
            &y,
            &CiMethod::Hoeffding,
            0.05,
            11,
        )
        .unwrap();
        assert!(
            sub.width() <= union.width() + 1e-12,
            "subsample {} vs union {}",
            sub.width(),
            union.width()
        );
    }

    #[test]
    fn union_missing_stratum_errors() {
        let preds = [true, false, true];
        let a = [true, true, true];
        let y = [true, true, false];
        let err = fairness_ci_union(
            FairnessMetric::DemographicParity,
            &preds,
            &a,
            &y,
            &CiMethod::Hoeffding,
            0.05,
        )
        .unwrap_err();
        assert!(matches!(err, CiError::Metrics(MetricsError::UndefinedStratum { .. })));
    }

    #[test]
    fn subsample_deterministic_and_seed_sensitive() {
        let data = crate::data::generate_synthetic(
            &crate::data::SyntheticConfig::with_seed(9),
            400,
        )
        .unwrap();
        let preds: Vec<bool> = data.samples().iter().map(|s| s.x[0] > 0.4).collect();
        let a: Vec<bool> = data.samples().iter().map(|s| s.a.unwrap()).collect();
        let y = data.labels();
        let run = |seed| {
            fairness_ci_subsample(
                FairnessMetric::EqualizedOdds,
                &preds,
                &a,
                &y,
                &CiMethod::Hoeffding,
                0.05,
                seed,
            )
            .unwrap()
        };
        assert_eq!(run(1), run(1));
    }

    #[test]
    fn intervals_cover_plug_in_violation() {
        // the plug-in violation always lies inside both constructions
        let data = crate::data::generate_synthetic(
            &crate::data::SyntheticConfig::with_seed(10),
            1500,
        )
        .unwrap();
        let preds: Vec<bool> = data.samples().iter().map(|s| s.x[0] > 0.6).collect();
        let a: Vec<bool> = data.samples().iter().map(|s| s.a.unwrap()).collect();
        let y = data.labels();
        for metric in FairnessMetric::ALL {
            let v = violation(metric, &preds, &a, &y).unwrap();
            let union = fairness_ci_union(metric, &preds, &a, &y, &CiMethod::Hoeffding, 0.05)
                .unwrap();
            assert!(union.contains(v), "{metric:?} union {union:?} misses {v}");
        }
    }
}
