//! Ground-truth quantities for the synthetic setup and brute-force
//! references for tiny instances. These are the trust anchors the
//! acceptance suite checks everything else against.
//!
//! For the synthetic mechanism (A ~ Bern(p), X|A=a ~ N(m_a, sd²),
//! Y = Z·1(X>t) + (1−Z)·1(X≤t), Z ~ Bern(q)) every quantity of a threshold
//! classifier h_c(X) = 1(X > c) has a closed form through the Gaussian CDF,
//! e.g. P(X > c | A=a) = Φ((m_a − c)/sd). The closed forms cover the whole
//! config family, so the 500k-sample Monte Carlo mode is kept only as a
//! cross-check.
//!
//! The Gaussian CDF is evaluated as ½·erfc(−x/√2) with Cody's rational
//! Chebyshev approximation of the complementary error function (absolute
//! error well below 1e-12 everywhere, ~1e-16 in practice).

// the published CALERF coefficients carry more digits than f64 resolves
#![allow(clippy::excessive_precision)]

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{generate_synthetic, SyntheticConfig};
use crate::metrics::{self, FairnessMetric};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("stratum {{A={group}{}}} is empty", if *label_conditioned { ", Y fixed" } else { "" })]
    EmptyStratum { group: bool, label_conditioned: bool },
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Standard normal CDF, Φ(x) = ½·erfc(−x/√2).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

// Cody's rational Chebyshev approximation of erf/erfc (W. J. Cody 1969,
// the CALERF coefficient set, kept verbatim). Relative error below 1e-15
// in double precision over all three branches, comfortably inside the
// 1e-12 budget the closed forms here are documented to hold.

const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];
const ONE_OVER_SQRT_PI: f64 = 5.641895835477562869e-1;

/// erf(x) for |x| <= 0.46875.
fn erf_small(x: f64) -> f64 {
    let z = x * x;
    let mut num = ERF_A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + ERF_A[i]) * z;
        den = (den + ERF_B[i]) * z;
    }
    x * (num + ERF_A[3]) / (den + ERF_B[3])
}

/// erfc(y)·exp(y²) for 0.46875 <= y <= 4.
fn erfc_mid_scaled(y: f64) -> f64 {
    let mut num = ERF_C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + ERF_C[i]) * y;
        den = (den + ERF_D[i]) * y;
    }
    (num + ERF_C[7]) / (den + ERF_D[7])
}

/// erfc(y)·exp(y²) for y > 4.
fn erfc_large_scaled(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let mut num = ERF_P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + ERF_P[i]) * z;
        den = (den + ERF_Q[i]) * z;
    }
    let r = z * (num + ERF_P[4]) / (den + ERF_Q[4]);
    (ONE_OVER_SQRT_PI - r) / y
}

/// exp(−y²) split so the large quadratic is evaluated on a 1/16-grid
/// value; keeps the scaling accurate for large y.
fn exp_neg_square(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= 0.46875 {
        return 1.0 - erf_small(x);
    } else if y <= 4.0 {
        exp_neg_square(y) * erfc_mid_scaled(y)
    } else if y < 26.7 {
        exp_neg_square(y) * erfc_large_scaled(y)
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// Where a 1-D classifier predicts 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecisionRegion {
    /// 1(X > c) — the canonical threshold family.
    Above(f64),
    /// 1(X < c) — a flipped threshold; still a linear classifier on 1-D data.
    Below(f64),
    Always,
    Never,
}

impl DecisionRegion {
    fn intervals(&self) -> Vec<(f64, f64)> {
        match *self {
            DecisionRegion::Above(c) => vec![(c, f64::INFINITY)],
            DecisionRegion::Below(c) => vec![(f64::NEG_INFINITY, c)],
            DecisionRegion::Always => vec![(f64::NEG_INFINITY, f64::INFINITY)],
            DecisionRegion::Never => vec![],
        }
    }
}

fn validate(config: &SyntheticConfig) -> Result<(), OracleError> {
    if !config.noise_sd.is_finite() || config.noise_sd <= 0.0 {
        return Err(OracleError::InvalidConfig(format!("noise_sd {}", config.noise_sd)));
    }
    if !(0.0..=1.0).contains(&config.group_prob) {
        return Err(OracleError::InvalidConfig(format!("group_prob {}", config.group_prob)));
    }
    if !(0.0..=1.0).contains(&config.label_flip_keep) {
        return Err(OracleError::InvalidConfig(format!(
            "label_flip_keep {}",
            config.label_flip_keep
        )));
    }
    Ok(())
}

/// Mass of (lo, hi) under N(mean, sd²).
fn interval_mass(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let upper = if hi.is_infinite() { 1.0 } else { normal_cdf((hi - mean) / sd) };
    let lower = if lo.is_infinite() { 0.0 } else { normal_cdf((lo - mean) / sd) };
    (upper - lower).max(0.0)
}

fn region_mass(mean: f64, sd: f64, region: &[(f64, f64)]) -> f64 {
    region.iter().map(|&(lo, hi)| interval_mass(mean, sd, lo, hi)).sum()
}

fn intersect(region: &[(f64, f64)], window: (f64, f64)) -> Vec<(f64, f64)> {
    region
        .iter()
        .filter_map(|&(lo, hi)| {
            let l = lo.max(window.0);
            let h = hi.min(window.1);
            (l < h).then_some((l, h))
        })
        .collect()
}

/// Population accuracy and violation of a 1-D classifier in closed form.
pub fn analytic_region_point(
    metric: FairnessMetric,
    region: DecisionRegion,
    config: &SyntheticConfig,
) -> Result<(f64, f64), OracleError> {
    validate(config)?;
    let r = region.intervals();
    let t = config.label_threshold;
    let q = config.label_flip_keep;
    let sd = config.noise_sd;
    let p1 = config.group_prob;
    let means = [config.group_means.0, config.group_means.1];
    let weights = [1.0 - p1, p1];

    let bayes = (t, f64::INFINITY);
    let mut sel = [0.0; 2];
    let mut tpr = [0.0; 2];
    let mut fpr = [0.0; 2];
    let mut acc = 0.0;
    for g in 0..2 {
        let m = means[g];
        let p_r = region_mass(m, sd, &r);
        let p_b = interval_mass(m, sd, bayes.0, bayes.1);
        let p_rb = region_mass(m, sd, &intersect(&r, bayes));
        let p_r_not_b = p_r - p_rb;
        let p_b_not_r = p_b - p_rb;

        sel[g] = p_r;
        let p_y1 = q * p_b + (1.0 - q) * (1.0 - p_b);
        let p_y0 = 1.0 - p_y1;
        let p_h1_y1 = q * p_rb + (1.0 - q) * p_r_not_b;
        let p_h1_y0 = (1.0 - q) * p_rb + q * p_r_not_b;
        if p_y1 <= 0.0 || p_y0 <= 0.0 {
            return Err(OracleError::InvalidConfig(
                "degenerate label distribution".into(),
            ));
        }
        tpr[g] = p_h1_y1 / p_y1;
        fpr[g] = p_h1_y0 / p_y0;

        let symdiff = p_r_not_b + p_b_not_r;
        acc += weights[g] * (q * (1.0 - symdiff) + (1.0 - q) * symdiff);
    }

    let violation = match metric {
        FairnessMetric::DemographicParity => (sel[1] - sel[0]).abs(),
        FairnessMetric::EqualizedOpportunity => (tpr[1] - tpr[0]).abs(),
        FairnessMetric::EqualizedOdds => {
            0.5 * (tpr[1] - tpr[0]).abs() + 0.5 * (fpr[1] - fpr[0]).abs()
        }
    };
    Ok((acc, violation))
}

/// Closed-form accuracy and violation of the threshold classifier 1(X > c).
pub fn analytic_point(
    metric: FairnessMetric,
    c: f64,
    config: &SyntheticConfig,
) -> Result<(f64, f64), OracleError> {
    analytic_region_point(metric, DecisionRegion::Above(c), config)
}

/// Monte Carlo estimate of the same quantities from `n` fresh draws.
pub fn monte_carlo_point(
    metric: FairnessMetric,
    c: f64,
    config: &SyntheticConfig,
    n: usize,
    seed: u64,
) -> Result<(f64, f64), OracleError> {
    let data = generate_synthetic(&SyntheticConfig { seed, ..config.clone() }, n)?;
    let preds: Vec<bool> = data.samples().iter().map(|s| s.x[0] > c).collect();
    let a: Vec<bool> = data.samples().iter().map(|s| s.a.unwrap()).collect();
    let y = data.labels();
    let acc = metrics::accuracy(&preds, &y)?;
    let viol = metrics::violation(metric, &preds, &a, &y)?;
    Ok((acc, viol))
}

/// How a ground-truth curve was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CurveSource {
    Analytic,
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub accuracy: f64,
    pub violation: f64,
}

/// Trade-offs of the threshold family over a grid of cut points, plus the
/// derived optimal curve τ*(ψ) = min violation over thresholds with
/// accuracy ≥ ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthCurve {
    pub metric: FairnessMetric,
    pub source: CurveSource,
    pub points: Vec<CurvePoint>,
    /// (accuracy, min violation at accuracy ≥ this), ascending in accuracy.
    envelope: Vec<(f64, f64)>,
}

impl GroundTruthCurve {
    /// τ*(ψ): the lower envelope at accuracy ψ; 1 when ψ is unattainable.
    pub fn tau_star(&self, psi: f64) -> f64 {
        // first envelope entry with accuracy >= psi
        match self.envelope.iter().find(|(acc, _)| *acc >= psi) {
            Some((_, v)) => *v,
            None => 1.0,
        }
    }

    /// Highest accuracy any threshold attains.
    pub fn max_accuracy(&self) -> f64 {
        self.envelope.last().map(|(a, _)| *a).unwrap_or(0.0)
    }
}

/// Evaluate the threshold family on `grid` and build the optimal curve.
pub fn ground_truth_curve(
    metric: FairnessMetric,
    grid: &[f64],
    config: &SyntheticConfig,
    source: CurveSource,
) -> Result<GroundTruthCurve, OracleError> {
    let mut points = Vec::with_capacity(grid.len());
    for &c in grid {
        let (accuracy, violation) = match source {
            CurveSource::Analytic => analytic_point(metric, c, config)?,
            CurveSource::MonteCarlo { n, seed } => monte_carlo_point(metric, c, config, n, seed)?,
        };
        points.push(CurvePoint { threshold: c, accuracy, violation });
    }
    // suffix-min over points sorted by accuracy gives the envelope
    let mut by_acc: Vec<(f64, f64)> =
        points.iter().map(|p| (p.accuracy, p.violation)).collect();
    by_acc.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut envelope = by_acc;
    let mut best = f64::INFINITY;
    for entry in envelope.iter_mut().rev() {
        best = best.min(entry.1);
        entry.1 = best;
    }
    Ok(GroundTruthCurve { metric, source, points, envelope })
}

/// Uniform grid of `count` thresholds over [lo, hi].
pub fn threshold_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

/// Write a curve as CSV columns (c, accuracy, violation).
pub fn curve_to_csv(curve: &GroundTruthCurve, path: &Path) -> Result<(), OracleError> {
    let mut out = String::from("c,accuracy,violation\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.accuracy, p.violation));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Fairness violation re-derived by direct counting, for tiny datasets.
///
/// Deliberately shares no code with `metrics::violation`; this is the
/// independent oracle the equivalence tests compare against.
pub fn brute_force_violation(
    metric: FairnessMetric,
    predictions: &[bool],
    a: &[bool],
    y: &[bool],
) -> Result<f64, OracleError> {
    assert_eq!(predictions.len(), a.len());
    assert_eq!(predictions.len(), y.len());

    let rate = |group: bool, label: Option<bool>| -> Result<f64, OracleError> {
        let mut total = 0u32;
        let mut positive = 0u32;
        for i in 0..predictions.len() {
            if a[i] != group {
                continue;
            }
            if let Some(l) = label {
                if y[i] != l {
                    continue;
                }
            }
            total += 1;
            if predictions[i] {
                positive += 1;
            }
        }
        if total == 0 {
            return Err(OracleError::EmptyStratum {
                group,
                label_conditioned: label.is_some(),
            });
        }
        Ok(f64::from(positive) / f64::from(total))
    };

    match metric {
        FairnessMetric::DemographicParity => {
            Ok((rate(true, None)? - rate(false, None)?).abs())
        }
        FairnessMetric::EqualizedOpportunity => {
            Ok((rate(true, Some(true))? - rate(false, Some(true))?).abs())
        }
        FairnessMetric::EqualizedOdds => {
            let tpr_gap = (rate(true, Some(true))? - rate(false, Some(true))?).abs();
            let fpr_gap = (rate(true, Some(false))? - rate(false, Some(false))?).abs();
            Ok(0.5 * tpr_gap + 0.5 * fpr_gap)
        }
    }
}
