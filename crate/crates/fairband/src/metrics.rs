//! Empirical fairness violations, their m-term decomposition, and smooth
//! surrogate losses with hand-derived gradients.
//!
//! The three violations for a binary sensitive attribute:
//!
//! - DP:  |P(h=1 | A=1) − P(h=1 | A=0)|
//! - EOP: |P(h=1 | A=1, Y=1) − P(h=1 | A=0, Y=1)|
//! - EO:  ½|TPR₁ − TPR₀| + ½|FPR₁ − FPR₀|
//!
//! Strata that are empty in the data make a violation undefined, which is
//! reported as an error rather than a silent zero; zeros would corrupt the
//! confidence intervals built on top of these values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("input vectors are empty")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("violation undefined: stratum {{A={group}{}}} is empty", match .label {
        Some(l) => format!(", Y={}", *l as u8),
        None => String::new(),
    })]
    UndefinedStratum { group: bool, label: Option<bool> },
}

/// Group fairness criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FairnessMetric {
    #[serde(rename = "dp")]
    DemographicParity,
    #[serde(rename = "eop")]
    EqualizedOpportunity,
    #[serde(rename = "eo")]
    EqualizedOdds,
}

impl FairnessMetric {
    pub const ALL: [FairnessMetric; 3] = [
        FairnessMetric::DemographicParity,
        FairnessMetric::EqualizedOpportunity,
        FairnessMetric::EqualizedOdds,
    ];
}

impl fmt::Display for FairnessMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FairnessMetric::DemographicParity => "dp",
            FairnessMetric::EqualizedOpportunity => "eop",
            FairnessMetric::EqualizedOdds => "eo",
        };
        write!(f, "{s}")
    }
}

impl FromStr for FairnessMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dp" => Ok(FairnessMetric::DemographicParity),
            "eop" => Ok(FairnessMetric::EqualizedOpportunity),
            "eo" => Ok(FairnessMetric::EqualizedOdds),
            other => Err(format!("unknown fairness metric '{other}' (expected dp|eop|eo)")),
        }
    }
}

/// Shape of the smooth relaxation used as the training regularizer.
///
/// `SigmoidAbs` is the loss-conditional default: the absolute gap of mean
/// sigmoid scores per stratum. `Linear` and `LogSigmoid` are the signed
/// regularizer forms used by the in-processing baselines; being signed,
/// training with them may drive a gap negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurrogateKind {
    #[serde(rename = "sigmoid_abs")]
    SigmoidAbs,
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "logsig")]
    LogSigmoid,
}

impl fmt::Display for SurrogateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurrogateKind::SigmoidAbs => "sigmoid_abs",
            SurrogateKind::Linear => "linear",
            SurrogateKind::LogSigmoid => "logsig",
        };
        write!(f, "{s}")
    }
}

impl FromStr for SurrogateKind {
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid_abs" => Ok(SurrogateKind::SigmoidAbs),
            "linear" => Ok(SurrogateKind::Linear),
            "logsig" => Ok(SurrogateKind::LogSigmoid),
            other => Err(format!(
                "unknown surrogate '{other}' (expected sigmoid_abs|linear|logsig)"
            )),
        }
    }

    type Err = String;
}

/// Fraction of agreements between predictions and labels.
pub fn accuracy(predictions: &[bool], labels: &[bool]) -> Result<f64, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(predictions.len(), labels.len()));
    }
    if predictions.is_empty() {
        return Err(MetricsError::Empty);
    }
    let agree = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(agree as f64 / predictions.len() as f64)
}

/// A conditioning event over (A, Y): `label = None` conditions on A alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub group: bool,
    pub label: Option<bool>,
}

impl Event {
    fn contains(&self, a: bool, y: bool) -> bool {
        a == self.group && self.label.is_none_or(|l| l == y)
    }
}

/// One sign-weighted term g_j = sign · weight · h(X) conditioned on an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub sign: f64,
    pub weight: f64,
    pub event: Event,
}

/// Terms of one signed gap; the violation takes |·| of each stratum's sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumGap {
    pub terms: Vec<Term>,
}

/// Decomposition of a violation into conditional-expectation terms.
///
/// DP and EOP are a single stratum of two terms (m = 2). EO is two strata,
/// one per label value, each carrying weight ½ (m = 4). Events within one
/// stratum are mutually exclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDecomposition {
    pub metric: FairnessMetric,
    pub strata: Vec<StratumGap>,
}

impl TermDecomposition {
    /// Total term count m.
    pub fn m(&self) -> usize {
        self.strata.iter().map(|s| s.terms.len()).sum()
    }

    /// Plug-in evaluation: Σ_strata |Σ_terms sign·weight·Ê[h | event]|.
    /// Matches `violation` exactly on the same data.
    pub fn evaluate(
        &self,
        predictions: &[bool],
        a: &[bool],
        y: &[bool],
    ) -> Result<f64, MetricsError> {
        check_lengths(predictions, a, y)?;
        let mut total = 0.0;
        for stratum in &self.strata {
            let mut gap = 0.0;
            for term in &stratum.terms {
                let rate = event_rate(predictions, a, y, &term.event)?;
                gap += term.sign * term.weight * rate;
            }
            total += gap.abs();
        }
        Ok(total)
    }
}

fn check_lengths(predictions: &[bool], a: &[bool], y: &[bool]) -> Result<(), MetricsError> {
    if predictions.len() != a.len() {
        return Err(MetricsError::LengthMismatch(predictions.len(), a.len()));
    }
    if predictions.len() != y.len() {
        return Err(MetricsError::LengthMismatch(predictions.len(), y.len()));
    }
    if predictions.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

fn event_rate(
    predictions: &[bool],
    a: &[bool],
    y: &[bool],
    event: &Event,
) -> Result<f64, MetricsError> {
    let mut count = 0usize;
    let mut positives = 0usize;
    for i in 0..predictions.len() {
        if event.contains(a[i], y[i]) {
            count += 1;
            if predictions[i] {
                positives += 1;
            }
        }
    }
    if count == 0 {
        return Err(MetricsError::UndefinedStratum { group: event.group, label: event.label });
    }
    Ok(positives as f64 / count as f64)
}

/// The m-term decomposition of a metric.
pub fn decompose(metric: FairnessMetric) -> TermDecomposition {
    let gap = |label: Option<bool>, weight: f64| StratumGap {
        terms: vec![
            Term { sign: 1.0, weight, event: Event { group: true, label } },
            Term { sign: -1.0, weight, event: Event { group: false, label } },
        ],
    };
    let strata = match metric {
        FairnessMetric::DemographicParity => vec![gap(None, 1.0)],
        FairnessMetric::EqualizedOpportunity => vec![gap(Some(true), 1.0)],
        FairnessMetric::EqualizedOdds => vec![gap(Some(true), 0.5), gap(Some(false), 0.5)],
    };
    TermDecomposition { metric, strata }
}

/// Exact empirical fairness violation of hard predictions, in [0, 1].
pub fn violation(
    metric: FairnessMetric,
    predictions: &[bool],
    a: &[bool],
    y: &[bool],
) -> Result<f64, MetricsError> {
    decompose(metric).evaluate(predictions, a, y)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log σ(x) computed stably as −softplus(−x).
fn log_sigmoid(x: f64) -> f64 {
    -(softplus(-x))
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-(x.abs())).exp().ln_1p()
}

/// Mean of g(score) over an event, together with the member indices.
fn event_mean<G: Fn(f64) -> f64>(
    scores: &[f64],
    a: &[bool],
    y: &[bool],
    event: &Event,
    g: G,
) -> Result<(f64, Vec<usize>), MetricsError> {
    let mut members = Vec::new();
    let mut sum = 0.0;
    for i in 0..scores.len() {
        if event.contains(a[i], y[i]) {
            sum += g(scores[i]);
            members.push(i);
        }
    }
    if members.is_empty() {
        return Err(MetricsError::UndefinedStratum { group: event.group, label: event.label });
    }
    Ok((sum / members.len() as f64, members))
}

/// Smooth relaxation of a fairness violation, evaluated on raw logits.
///
/// `SigmoidAbs` takes |·| of each stratum's mean-sigmoid gap (EO strata
/// weighted ½ each, matching the violation). `Linear` and `LogSigmoid` keep
/// the gaps signed, so the returned value may be negative.
pub fn surrogate_loss(
    kind: SurrogateKind,
    metric: FairnessMetric,
    scores: &[f64],
    a: &[bool],
    y: &[bool],
) -> Result<f64, MetricsError> {
    check_score_lengths(scores, a, y)?;
    let decomp = decompose(metric);
    let mut total = 0.0;
    for stratum in &decomp.strata {
        let mut gap = 0.0;
        let weight = stratum.terms[0].weight;
        for term in &stratum.terms {
            let (mean, _) = event_mean(scores, a, y, &term.event, |s| apply_g(kind, s))?;
            gap += term.sign * mean;
        }
        total += weight
            * match kind {
                SurrogateKind::SigmoidAbs => gap.abs(),
                SurrogateKind::Linear | SurrogateKind::LogSigmoid => gap,
            };
    }
    Ok(total)
}

/// Analytic gradient of `surrogate_loss` with respect to the scores.
///
/// At an exactly zero gap the subgradient of |·| is taken as 0, which keeps
/// the symmetric point stationary instead of flapping sign.
pub fn surrogate_gradient(
    kind: SurrogateKind,
    metric: FairnessMetric,
    scores: &[f64],
    a: &[bool],
    y: &[bool],
) -> Result<Vec<f64>, MetricsError> {
    check_score_lengths(scores, a, y)?;
    let decomp = decompose(metric);
    let mut grad = vec![0.0; scores.len()];
    for stratum in &decomp.strata {
        let weight = stratum.terms[0].weight;
        let mut gap = 0.0;
        let mut memberships = Vec::new();
        for term in &stratum.terms {
            let (mean, members) = event_mean(scores, a, y, &term.event, |s| apply_g(kind, s))?;
            gap += term.sign * mean;
            memberships.push((term.sign, members));
        }
        let outer = match kind {
            SurrogateKind::SigmoidAbs => signum_or_zero(gap),
            SurrogateKind::Linear | SurrogateKind::LogSigmoid => 1.0,
        };
        if outer == 0.0 {
            continue;
        }
        for (sign, members) in memberships {
            let scale = weight * outer * sign / members.len() as f64;
            for i in members {
                grad[i] += scale * g_prime(kind, scores[i]);
            }
        }
    }
    Ok(grad)
}

fn apply_g(kind: SurrogateKind, score: f64) -> f64 {
    match kind {
        SurrogateKind::SigmoidAbs => sigmoid(score),
        SurrogateKind::Linear => score,
        SurrogateKind::LogSigmoid => log_sigmoid(score),
    }
}

fn g_prime(kind: SurrogateKind, score: f64) -> f64 {
    match kind {
        SurrogateKind::SigmoidAbs => {
            let s = sigmoid(score);
            s * (1.0 - s)
        }
        SurrogateKind::Linear => 1.0,
        // d/dx log σ(x) = σ(−x)
        SurrogateKind::LogSigmoid => sigmoid(-score),
    }
}

fn signum_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_score_lengths(scores: &[f64], a: &[bool], y: &[bool]) -> Result<(), MetricsError> {
    if scores.len() != a.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), a.len()));
    }
    if scores.len() != y.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), y.len()));
    }
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}
