//! Confidence intervals on the mean of bounded i.i.d. samples.
//!
//! Four constructions:
//!
//! - Hoeffding: half-width √(ln(1/α) / 2n) one-sided, ln(2/α) two-sided.
//!   Finite-sample valid for samples in a known range.
//! - Bernstein: inverts exp(−t² / (2nσ² + (2/3)tB)) = α on the sum scale,
//!   i.e. the positive root of t² − (2B/3)ln(1/α)·t − 2nσ²ln(1/α) = 0,
//!   divided by n. Variance-adaptive; tighter than Hoeffding when σ² is
//!   small. σ² is the per-summand variance (plug-in sample variance by
//!   default, or a known value which preserves strict validity).
//! - CLT: mean ± z·s/√n with the plug-in sample standard deviation.
//!   Asymptotic.
//! - Bootstrap: percentile method over B resample means, deterministic
//!   given the seed. Asymptotic.
//!
//! All public intervals describe rates and are clamped to [0, 1] after
//! construction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum CiError {
    #[error("no samples")]
    Empty,
    #[error("sample {value} outside the declared range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("alpha {0} outside (0, 1)")]
    BadAlpha(f64),
    #[error("{0}")]
    BadMethod(String),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error("too few repetitions: {0} < 100")]
    TooFewReps(usize),
}

/// Sidedness of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// A lower bound: [lo, upper range bound].
    Lower,
    /// An upper bound: [lower range bound, hi].
    Upper,
    TwoSided,
}

/// A closed interval with its confidence level and sidedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Confidence level 1 − α.
    pub level: f64,
    pub side: Side,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Variance used by the Bernstein bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Unbiased sample variance of the provided samples.
    PlugIn,
    /// A known per-summand variance bound.
    Known(f64),
}

/// Interval construction method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CiMethod {
    Hoeffding,
    Bernstein { bound: f64, variance: VarianceMode },
    Clt,
    Bootstrap { resamples: usize, seed: u64 },
}

impl CiMethod {
    /// Bernstein with plug-in variance for samples bounded by 1.
    pub fn bernstein_default() -> Self {
        CiMethod::Bernstein { bound: 1.0, variance: VarianceMode::PlugIn }
    }

    pub fn bootstrap(resamples: usize, seed: u64) -> Self {
        CiMethod::Bootstrap { resamples, seed }
    }

    /// Re-seed a bootstrap method for an independent pipeline; other
    /// methods pass through unchanged.
    pub fn with_stream(&self, stream: u64) -> Self {
        match self {
            CiMethod::Bootstrap { resamples, seed } => CiMethod::Bootstrap {
                resamples: *resamples,
                seed: seed::derive(*seed, stream),
            },
            other => other.clone(),
        }
    }
}

/// One-sided Hoeffding half-width √(ln(1/α) / 2n) for samples in [0, 1].
pub fn hoeffding_halfwidth(n: usize, alpha: f64) -> f64 {
    ((1.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Mean-scale Bernstein half-width: the positive root of
/// t² − (2B/3)·ln(1/α)·t − 2nσ²·ln(1/α) = 0, divided by n.
pub fn bernstein_halfwidth(n: usize, sigma2: f64, bound: f64, alpha: f64) -> f64 {
    let l = (1.0 / alpha).ln();
    let b = (2.0 * bound / 3.0) * l;
    let c = 2.0 * n as f64 * sigma2 * l;
    let t = (b + (b * b + 4.0 * c).sqrt()) / 2.0;
    t / n as f64
}

fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

fn mean_of(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

fn sample_variance(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = mean_of(samples);
    samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}

/// Linear-interpolation empirical quantile of a non-empty sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let idx = pos.floor() as usize;
    let frac = pos - idx as f64;
    if idx + 1 < n {
        sorted[idx] * (1.0 - frac) + sorted[idx + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// CI on the mean of samples in [0, 1]; the result is clamped to [0, 1].
pub fn mean_ci(
    samples: &[f64],
    method: &CiMethod,
    alpha: f64,
    side: Side,
) -> Result<Interval, CiError> {
    mean_ci_in_range(samples, (0.0, 1.0), method, alpha, side)
}

/// CI on the mean of samples within an arbitrary known range.
///
/// Bounded methods (Hoeffding, Bernstein) rescale to [0, 1] internally;
/// CLT and bootstrap act on the raw samples. The result is clamped to the
/// declared range.
pub(crate) fn mean_ci_in_range(
    samples: &[f64],
    range: (f64, f64),
    method: &CiMethod,
    alpha: f64,
    side: Side,
) -> Result<Interval, CiError> {
    if samples.is_empty() {
        return Err(CiError::Empty);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CiError::BadAlpha(alpha));
    }
    let (lo_bound, hi_bound) = range;
    let span = hi_bound - lo_bound;
    let n = samples.len();

    let bounded = matches!(method, CiMethod::Hoeffding | CiMethod::Bernstein { .. });
    if bounded {
        for &v in samples {
            if v < lo_bound - 1e-12 || v > hi_bound + 1e-12 {
                return Err(CiError::OutOfRange { value: v, lo: lo_bound, hi: hi_bound });
            }
        }
    }
    if matches!(method, CiMethod::Clt | CiMethod::Bootstrap { .. }) && n < 30 {
        log::warn!("asymptotic interval on only {n} samples; n >= 30 recommended");
    }

    let mean = mean_of(samples);
    // per-side budget: a two-sided interval spends alpha/2 on each side
    let side_alpha = match side {
        Side::TwoSided => alpha / 2.0,
        Side::Lower | Side::Upper => alpha,
    };

    let (lo, hi) = match method {
        CiMethod::Hoeffding => {
            let delta = span * hoeffding_halfwidth(n, side_alpha);
            (mean - delta, mean + delta)
        }
        CiMethod::Bernstein { bound, variance } => {
            if *bound <= 0.0 {
                return Err(CiError::BadMethod(format!("Bernstein bound {bound} must be > 0")));
            }
            // work on samples rescaled to [0, 1] so the declared bound applies
            let sigma2 = match variance {
                VarianceMode::Known(v) => {
                    if *v < 0.0 {
                        return Err(CiError::BadMethod(format!("variance {v} < 0")));
                    }
                    *v
                }
                VarianceMode::PlugIn => {
                    let scaled: Vec<f64> =
                        samples.iter().map(|v| (v - lo_bound) / span).collect();
                    sample_variance(&scaled)
                }
            };
            let delta = span * bernstein_halfwidth(n, sigma2, *bound, side_alpha);
            (mean - delta, mean + delta)
        }
        CiMethod::Clt => {
            let sd = sample_variance(samples).sqrt();
            let z = normal_quantile(1.0 - side_alpha);
            let delta = z * sd / (n as f64).sqrt();
            (mean - delta, mean + delta)
        }
        CiMethod::Bootstrap { resamples, seed } => {
            if *resamples < 100 {
                return Err(CiError::BadMethod(format!(
                    "bootstrap needs at least 100 resamples, got {resamples}"
                )));
            }
            let mut means = Vec::with_capacity(*resamples);
            for b in 0..*resamples {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(*seed, b as u64));
                let mut sum = 0.0;
                for _ in 0..n {
                    sum += samples[rng.random_range(0..n)];
                }
                means.push(sum / n as f64);
            }
            means.sort_by(|a, b| a.partial_cmp(b).unwrap());
            match side {
                Side::TwoSided => (
                    quantile_sorted(&means, alpha / 2.0),
                    quantile_sorted(&means, 1.0 - alpha / 2.0),
                ),
                Side::Lower => (quantile_sorted(&means, alpha), hi_bound),
                Side::Upper => (lo_bound, quantile_sorted(&means, 1.0 - alpha)),
            }
        }
    };

    let (lo, hi) = match side {
        Side::TwoSided => (lo, hi),
        Side::Lower => (lo, hi_bound),
        Side::Upper => (lo_bound, hi),
    };
    Ok(Interval {
        lo: lo.clamp(lo_bound, hi_bound),
        hi: hi.clamp(lo_bound, hi_bound),
        level: 1.0 - alpha,
        side,
    })
}

/// Fraction of `reps` replications whose interval contains `true_mean`.
///
/// `sampler` draws one replication's sample set from its own RNG; bootstrap
/// methods are re-seeded per replication so replications stay independent.
pub fn coverage_simulation<F>(
    true_mean: f64,
    mut sampler: F,
    method: &CiMethod,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<f64, CiError>
where
    F: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    if reps < 100 {
        return Err(CiError::TooFewReps(reps));
    }
    let mut hits = 0usize;
    for r in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, r as u64));
        let samples = sampler(&mut rng);
        let method_r = method.with_stream(r as u64);
        let interval = mean_ci(&samples, &method_r, alpha, Side::TwoSided)?;
        if interval.contains(true_mean) {
            hits += 1;
        }
    }
    Ok(hits as f64 / reps as f64)
}
