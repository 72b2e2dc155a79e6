//! Confidence bands on the optimal trade-off curve τ*(ψ) and the audit
//! machinery built on them.
//!
//! Per λ, two one-sided CIs at level 1 − α/2 combine into a guarantee on
//! τ*:
//!
//! - upper: P(τ*(L_acc) ≤ U_fair) ≥ 1 − α, from a lower CI on accuracy and
//!   an upper CI on the violation. Assumption-free: valid even for a badly
//!   trained model, just conservative.
//! - lower: P(τ*(U_acc) ≥ L_fair − Δ) ≥ 1 − α, where Δ ≥ 0 allows for the
//!   model's own sub-optimality. Δ is calibrated by [`sensitivity_delta`]
//!   against a few separately trained models and applied as one constant
//!   downward shift.
//!
//! τ* is monotone in ψ, so per-λ pairs assemble into running envelopes over
//! an accuracy grid. Outside the certified range the band is vacuous
//! (upper 1, lower 0) rather than undefined. Levels are reported per-λ
//! (marginal over Ψ); no multiplicity correction is applied across the grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ci_fairness::{fairness_ci_subsample, fairness_ci_union};
use crate::ci_mean::{mean_ci, CiError, CiMethod, Interval, Side};
use crate::data::Dataset;
use crate::metrics::{self, FairnessMetric};
use crate::model::{self, LinearFilmModel, ModelError, TradeoffPoint, TrainConfig};
use crate::oracle::{self, DecisionRegion, GroundTruthCurve, OracleError};
use crate::seed;

#[derive(Debug, Error)]
pub enum TradeoffError {
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error("empty sweep")]
    EmptySweep,
    #[error("delta {0} must be nonnegative")]
    BadDelta(f64),
    #[error("accuracy {accuracy} outside the band grid [{lo}, {hi}]")]
    OutOfRange { accuracy: f64, lo: f64, hi: f64 },
}

/// Which fairness-CI construction backs the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessCiConstruction {
    Union,
    Subsample,
}

impl std::str::FromStr for FairnessCiConstruction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "union" => Ok(FairnessCiConstruction::Union),
            "subsample" => Ok(FairnessCiConstruction::Subsample),
            other => Err(format!("unknown construction '{other}' (expected union|subsample)")),
        }
    }
}

/// CI configuration shared by band construction and baseline audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiOptions {
    pub method: CiMethod,
    pub construction: FairnessCiConstruction,
    /// Base seed for subsampling permutations; per-λ streams are derived.
    pub seed: u64,
}

impl CiOptions {
    pub fn new(method: CiMethod) -> Self {
        Self { method, construction: FairnessCiConstruction::Union, seed: 0 }
    }
}

/// Per-λ ingredients of the upper band: a lower CI endpoint on accuracy and
/// an upper CI endpoint on the violation, each one-sided at 1 − α/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperPair {
    pub acc_lower: f64,
    pub fair_upper: f64,
    pub lambda: f64,
}

/// Per-λ ingredients of the lower band; `fair_lower` is already shifted
/// down by Δ and clamped at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerPair {
    pub acc_upper: f64,
    pub fair_lower: f64,
    pub lambda: f64,
}

/// One grid entry of an assembled band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub psi: f64,
    pub lower: f64,
    pub upper: f64,
    /// λ whose pair realizes the lower envelope here, when any does.
    pub lambda_lower_src: Option<f64>,
    /// λ whose pair realizes the upper envelope here, when any does.
    pub lambda_upper_src: Option<f64>,
}

/// Monotone confidence band on τ* over an accuracy grid, with the
/// empirical curve it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffBand {
    pub points: Vec<BandPoint>,
    pub alpha: f64,
    pub delta_used: f64,
    pub yoto_curve: Vec<TradeoffPoint>,
}

/// Audit region relative to a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Unlikely,
    Permissible,
    Suboptimal,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::Unlikely => "unlikely",
            Region::Permissible => "permissible",
            Region::Suboptimal => "sub-optimal",
        };
        write!(f, "{s}")
    }
}

fn attributes_of(cal: &Dataset) -> Result<Vec<bool>, TradeoffError> {
    cal.attributes()
        .into_iter()
        .collect::<Option<Vec<bool>>>()
        .ok_or(TradeoffError::Model(ModelError::MissingAttributes))
}

/// Two-sided fairness interval at total budget `alpha` under the chosen
/// construction; band sides read one endpoint off it.
fn fairness_interval(
    metric: FairnessMetric,
    predictions: &[bool],
    a: &[bool],
    y: &[bool],
    opts: &CiOptions,
    alpha: f64,
    stream: u64,
) -> Result<Interval, CiError> {
    let method = opts.method.with_stream(stream);
    match opts.construction {
        FairnessCiConstruction::Union => {
            fairness_ci_union(metric, predictions, a, y, &method, alpha)
        }
        FairnessCiConstruction::Subsample => fairness_ci_subsample(
            metric,
            predictions,
            a,
            y,
            &method,
            alpha,
            seed::derive(opts.seed, stream),
        ),
    }
}

fn agreement_indicators(predictions: &[bool], y: &[bool]) -> Vec<f64> {
    predictions.iter().zip(y).map(|(p, l)| if p == l { 1.0 } else { 0.0 }).collect()
}

/// Per-λ upper-band pairs (L_acc, U_fair) on calibration data.
///
/// The calibration set must be disjoint from the training data; that
/// contract is the caller's.
pub fn upper_band(
    model: &LinearFilmModel,
    lambda_grid: &[f64],
    cal: &Dataset,
    metric: FairnessMetric,
    alpha: f64,
    opts: &CiOptions,
) -> Result<Vec<UpperPair>, TradeoffError> {
    if lambda_grid.is_empty() {
        return Err(TradeoffError::Model(ModelError::EmptyGrid));
    }
    let a = attributes_of(cal)?;
    let y = cal.labels();
    let mut pairs = Vec::with_capacity(lambda_grid.len());
    for (k, &lambda) in lambda_grid.iter().enumerate() {
        let preds = model.predict(cal, lambda, 0.0)?;
        let acc_ci = mean_ci(
            &agreement_indicators(&preds, &y),
            &opts.method.with_stream(2 * k as u64),
            alpha / 2.0,
            Side::Lower,
        )?;
        let fair_ci =
            fairness_interval(metric, &preds, &a, &y, opts, alpha / 2.0, 2 * k as u64 + 1)?;
        pairs.push(UpperPair { acc_lower: acc_ci.lo, fair_upper: fair_ci.hi, lambda });
    }
    Ok(pairs)
}

/// Per-λ lower-band pairs (U_acc, max(0, L_fair − delta)).
pub fn lower_band(
    model: &LinearFilmModel,
    lambda_grid: &[f64],
    cal: &Dataset,
    metric: FairnessMetric,
    alpha: f64,
    delta: f64,
    opts: &CiOptions,
) -> Result<Vec<LowerPair>, TradeoffError> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(TradeoffError::BadDelta(delta));
    }
    if lambda_grid.is_empty() {
        return Err(TradeoffError::Model(ModelError::EmptyGrid));
    }
    let a = attributes_of(cal)?;
    let y = cal.labels();
    let mut pairs = Vec::with_capacity(lambda_grid.len());
    for (k, &lambda) in lambda_grid.iter().enumerate() {
        let preds = model.predict(cal, lambda, 0.0)?;
        let acc_ci = mean_ci(
            &agreement_indicators(&preds, &y),
            &opts.method.with_stream(1_000_003 + 2 * k as u64),
            alpha / 2.0,
            Side::Upper,
        )?;
        let fair_ci = fairness_interval(
            metric,
            &preds,
            &a,
            &y,
            opts,
            alpha / 2.0,
            1_000_003 + 2 * k as u64 + 1,
        )?;
        pairs.push(LowerPair {
            acc_upper: acc_ci.hi,
            fair_lower: (fair_ci.lo - delta).max(0.0),
            lambda,
        });
    }
    Ok(pairs)
}

/// Number of uniform fill points added between the endpoint accuracies.
const GRID_FILL: usize = 100;

/// Assemble per-λ pairs into a monotone band.
///
/// Grid: the sorted union of all CI accuracy endpoints plus uniform fill.
/// At each ψ the upper envelope takes the smallest U_fair among λ whose
/// certified accuracy reaches ψ (vacuously 1 where none does); the lower
/// envelope the largest shifted L_fair among λ whose accuracy certifiably
/// stays below ψ (vacuously 0). Step interpolation between grid points.
pub fn monotonize(
    upper: &[UpperPair],
    lower: &[LowerPair],
    alpha: f64,
    delta_used: f64,
    yoto_curve: Vec<TradeoffPoint>,
) -> TradeoffBand {
    let mut grid: Vec<f64> = upper
        .iter()
        .map(|p| p.acc_lower)
        .chain(lower.iter().map(|p| p.acc_upper))
        .collect();
    if grid.is_empty() {
        return TradeoffBand { points: Vec::new(), alpha, delta_used, yoto_curve };
    }
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for i in 0..=GRID_FILL {
        grid.push(lo + (hi - lo) * i as f64 / GRID_FILL as f64);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let points = grid
        .into_iter()
        .map(|psi| {
            let mut up = 1.0;
            let mut up_src = None;
            for p in upper {
                if p.acc_lower >= psi && p.fair_upper < up {
                    up = p.fair_upper;
                    up_src = Some(p.lambda);
                }
            }
            let mut low = 0.0;
            let mut low_src = None;
            for p in lower {
                if p.acc_upper <= psi && p.fair_lower > low {
                    low = p.fair_lower;
                    low_src = Some(p.lambda);
                }
            }
            // a lower bound may always be relaxed; never let it cross the upper
            if low > up {
                low = up;
            }
            BandPoint {
                psi,
                lower: low,
                upper: up,
                lambda_lower_src: low_src,
                lambda_upper_src: up_src,
            }
        })
        .collect::<Vec<_>>();

    debug_assert!(points.windows(2).all(|w| w[0].upper <= w[1].upper + 1e-12));
    debug_assert!(points.iter().all(|p| p.lower <= p.upper && p.lower >= 0.0));
    TradeoffBand { points, alpha, delta_used, yoto_curve }
}

impl TradeoffBand {
    pub fn grid_range(&self) -> Option<(f64, f64)> {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => Some((a.psi, b.psi)),
            _ => None,
        }
    }

    /// Band endpoints at an accuracy, by right-continuous step
    /// interpolation over the grid.
    pub fn at(&self, accuracy: f64) -> Result<&BandPoint, TradeoffError> {
        let (lo, hi) = self.grid_range().ok_or(TradeoffError::EmptySweep)?;
        if accuracy < lo - 1e-12 || accuracy > hi + 1e-12 {
            return Err(TradeoffError::OutOfRange { accuracy, lo, hi });
        }
        let idx = self.points.partition_point(|p| p.psi <= accuracy + 1e-12);
        Ok(&self.points[idx.saturating_sub(1)])
    }

    /// CSV export: columns (psi, lower, upper, lambda_lower_src,
    /// lambda_upper_src); empty cell where an envelope is vacuous.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("psi,lower,upper,lambda_lower_src,lambda_upper_src\n");
        let fmt_src = |s: Option<f64>| s.map(|v| v.to_string()).unwrap_or_default();
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.psi,
                p.lower,
                p.upper,
                fmt_src(p.lambda_lower_src),
                fmt_src(p.lambda_upper_src)
            ));
        }
        out
    }
}

/// Classify an empirical trade-off point against a band. Points on a band
/// endpoint are Permissible; the band is closed.
pub fn classify(point: &TradeoffPoint, band: &TradeoffBand) -> Result<Region, TradeoffError> {
    let at = band.at(point.accuracy)?;
    if point.violation > at.upper {
        Ok(Region::Suboptimal)
    } else if point.violation < at.lower {
        Ok(Region::Unlikely)
    } else {
        Ok(Region::Permissible)
    }
}

/// Outcome of calibrating Δ against separately trained comparison models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub delta_hat: f64,
    /// Comparison models achieving a better empirical trade-off than the
    /// conditional model somewhere along its curve.
    pub contributing_models: Vec<String>,
    pub per_lambda_gaps: Vec<(f64, f64)>,
}

/// Maximum empirical trade-off gap between the λ-sweep and the best
/// comparison model at matched-or-better accuracy.
///
/// Per λ the reference is the argmin violation over comparison points with
/// accuracy ≥ the sweep point's, with the sweep point itself always in the
/// candidate set, so every gap is ≥ 0 and Δ̂ = 0 whenever no comparison
/// model beats the curve. All points must be evaluated on the same
/// calibration data (caller contract).
pub fn sensitivity_delta(
    yoto_sweep: &[TradeoffPoint],
    comparisons: &[(String, Vec<TradeoffPoint>)],
) -> Result<SensitivityReport, TradeoffError> {
    if yoto_sweep.is_empty() {
        return Err(TradeoffError::EmptySweep);
    }
    let flat: Vec<(&str, &TradeoffPoint)> = comparisons
        .iter()
        .flat_map(|(id, points)| points.iter().map(move |p| (id.as_str(), p)))
        .collect();

    let mut per_lambda_gaps = Vec::with_capacity(yoto_sweep.len());
    let mut delta_hat = 0.0f64;
    for p in yoto_sweep {
        let mut best = p.violation;
        for (_, q) in &flat {
            if q.accuracy >= p.accuracy && q.violation < best {
                best = q.violation;
            }
        }
        let gap = p.violation - best;
        per_lambda_gaps.push((p.lambda.unwrap_or(f64::NAN), gap));
        delta_hat = delta_hat.max(gap);
    }
    let mut contributing = std::collections::BTreeSet::new();
    for (id, q) in &flat {
        if yoto_sweep.iter().any(|p| q.accuracy >= p.accuracy && q.violation < p.violation) {
            contributing.insert(id.to_string());
        }
    }
    Ok(SensitivityReport {
        delta_hat,
        contributing_models: contributing.into_iter().collect(),
        per_lambda_gaps,
    })
}

/// Rectangle corners bounding a baseline's true trade-off at level 1 − α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRegion {
    /// (U_acc, L_fair): most favorable corner.
    pub best_case: TradeoffPoint,
    /// (L_acc, U_fair): least favorable corner.
    pub worst_case: TradeoffPoint,
    pub level: f64,
}

/// Verdict on a baseline once its own estimation uncertainty is included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditVerdict {
    ConfidentlySuboptimal,
    ConfidentlyBeatsYoto,
    Inconclusive,
}

impl std::fmt::Display for AuditVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AuditVerdict::ConfidentlySuboptimal => "confidently sub-optimal",
            AuditVerdict::ConfidentlyBeatsYoto => "confidently beats the swept model",
            AuditVerdict::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

/// Everything the audit reports for one baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineAudit {
    pub plug_in: TradeoffPoint,
    pub plug_in_region: Region,
    pub region: ConfidenceRegion,
    pub verdict: AuditVerdict,
    /// Verdict confidence 1 − 2α (band and baseline CIs combined).
    pub confidence: f64,
}

/// Uncertainty-aware audit of one baseline's predictions against a band.
///
/// The baseline is confidently sub-optimal when even its best-case corner
/// (U_acc, L_fair) classifies Suboptimal, and confidently better than the
/// swept model when even its worst-case corner (L_acc, U_fair) classifies
/// Unlikely; both statements hold at level 1 − 2α by a union bound with
/// the band's own guarantee.
pub fn baseline_region(
    metric: FairnessMetric,
    predictions: &[bool],
    a: &[bool],
    y: &[bool],
    alpha: f64,
    band: &TradeoffBand,
    opts: &CiOptions,
) -> Result<BaselineAudit, TradeoffError> {
    let accuracy = metrics::accuracy(predictions, y)?;
    let violation = metrics::violation(metric, predictions, a, y)?;
    let plug_in = TradeoffPoint { accuracy, violation, lambda: None };

    let agreements = agreement_indicators(predictions, y);
    let acc_upper =
        mean_ci(&agreements, &opts.method.with_stream(11), alpha / 2.0, Side::Upper)?.hi;
    let acc_lower =
        mean_ci(&agreements, &opts.method.with_stream(12), alpha / 2.0, Side::Lower)?.lo;
    let fair = fairness_interval(metric, predictions, a, y, opts, alpha / 2.0, 13)?;

    let best_case = TradeoffPoint { accuracy: acc_upper, violation: fair.lo, lambda: None };
    let worst_case = TradeoffPoint { accuracy: acc_lower, violation: fair.hi, lambda: None };
    let region = ConfidenceRegion { best_case, worst_case, level: 1.0 - alpha };

    let plug_in_region = classify(&plug_in, band)?;
    let verdict = if classify(&best_case, band)? == Region::Suboptimal {
        AuditVerdict::ConfidentlySuboptimal
    } else if classify(&worst_case, band)? == Region::Unlikely {
        AuditVerdict::ConfidentlyBeatsYoto
    } else {
        AuditVerdict::Inconclusive
    };
    Ok(BaselineAudit { plug_in, plug_in_region, region, verdict, confidence: 1.0 - 2.0 * alpha })
}

/// Configuration for the Δ-versus-training-size trend.
#[derive(Debug, Clone)]
pub struct DeltaTrendConfig {
    pub synthetic: crate::data::SyntheticConfig,
    pub train: TrainConfig,
    pub lambda_grid: Vec<f64>,
    /// Validation rows generated per training row.
    pub val_fraction: f64,
}

impl Default for DeltaTrendConfig {
    fn default() -> Self {
        Self {
            synthetic: crate::data::SyntheticConfig::default(),
            train: TrainConfig::default(),
            lambda_grid: model::log_spaced(1e-6, 10.0, 25),
            val_fraction: 0.2,
        }
    }
}

/// The 1-D decision rule a FiLM logistic model realizes at one λ.
fn decision_region(model: &LinearFilmModel, lambda: f64) -> Result<DecisionRegion, ModelError> {
    let (scale, shift) = match &model.film {
        None => (1.0, 0.0),
        Some(film) => {
            let u = film.normalize_lambda(lambda);
            (film.sigma.forward(u), film.mu.forward(u))
        }
    };
    let slope = scale * model.w[0];
    let intercept = scale * model.b + shift;
    let eps = 1e-12;
    Ok(if slope > eps {
        DecisionRegion::Above(-intercept / slope)
    } else if slope < -eps {
        DecisionRegion::Below(-intercept / slope)
    } else if intercept > 0.0 {
        DecisionRegion::Always
    } else {
        DecisionRegion::Never
    })
}

/// Worst-case relative sub-optimality of a trained model against the
/// analytic optimum: max over λ of Δ(h_λ)/τ*(acc(h_λ)), with population
/// quantities from the closed forms. Grid points where τ* vanishes carry
/// no relative-scale information and are skipped.
pub fn worst_relative_gap(
    model: &LinearFilmModel,
    lambda_grid: &[f64],
    metric: FairnessMetric,
    config: &crate::data::SyntheticConfig,
    curve: &GroundTruthCurve,
) -> Result<f64, TradeoffError> {
    let mut worst = 0.0f64;
    for &lambda in lambda_grid {
        let region = decision_region(model, lambda)?;
        let (acc, viol) = oracle::analytic_region_point(metric, region, config)?;
        let tau = curve.tau_star(acc);
        if tau <= 1e-9 {
            continue;
        }
        let delta = (viol - tau).max(0.0);
        worst = worst.max(delta / tau);
    }
    Ok(worst)
}

/// For each training-set size, the median over seeds of the worst-case
/// relative gap between the trained curve and the analytic optimum.
pub fn delta_trend(
    sizes: &[usize],
    seeds_per_size: usize,
    config: &DeltaTrendConfig,
) -> Result<Vec<(usize, f64)>, TradeoffError> {
    let grid = oracle::threshold_grid(-3.0, 3.0, 2001);
    let curve = oracle::ground_truth_curve(
        config.train.metric,
        &grid,
        &config.synthetic,
        oracle::CurveSource::Analytic,
    )?;
    let mut out = Vec::with_capacity(sizes.len());
    for (si, &size) in sizes.iter().enumerate() {
        let mut gaps = Vec::with_capacity(seeds_per_size);
        for s in 0..seeds_per_size {
            let stream = (si * seeds_per_size + s) as u64;
            let data_seed = seed::derive(config.synthetic.seed, stream);
            let n_val = ((size as f64) * config.val_fraction).ceil() as usize;
            let data = crate::data::generate_synthetic(
                &crate::data::SyntheticConfig { seed: data_seed, ..config.synthetic.clone() },
                size + n_val,
            )?;
            let train = data.subset(&(0..size).collect::<Vec<_>>())?;
            let val = data.subset(&(size..size + n_val).collect::<Vec<_>>())?;
            let train_config = TrainConfig {
                seed: seed::derive(config.train.seed, stream),
                ..config.train.clone()
            };
            let model = model::train_yoto(&train, &val, &train_config)?;
            gaps.push(worst_relative_gap(
                &model,
                &config.lambda_grid,
                config.train.metric,
                &config.synthetic,
                &curve,
            )?);
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if gaps.len() % 2 == 1 {
            gaps[gaps.len() / 2]
        } else {
            0.5 * (gaps[gaps.len() / 2 - 1] + gaps[gaps.len() / 2])
        };
        out.push((size, median));
    }
    Ok(out)
}
