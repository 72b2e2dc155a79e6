//! Logistic regression conditioned on the regularization weight λ through
//! FiLM, with loss-conditional (YOTO) and fixed-λ training.
//!
//! The classifier is a single linear logit w·x + b. For loss-conditional
//! models the scalar logit is modulated by two tiny conditioning nets fed
//! log-scaled λ:
//!
//! ```text
//! logit(x, λ) = σ_film(u) · (w·x + b) + μ_film(u),   u = normalized log₁₀ λ
//! ```
//!
//! Raw λ spans seven decades, so the nets see log₁₀(λ) normalized to [0, 1]
//! over the training range. Fixed-λ models bypass FiLM entirely (scale 1,
//! shift 0). Thresholding the logit at 0 gives hard predictions.

mod mlp;
mod train;

pub use mlp::{Mlp, MlpGrads};
pub use train::{
    batch_objective_and_gradient, dataset_objective, fit_separate, fit_yoto,
    forward_parameter_gradient, train_attribute_predictor, train_separate, train_yoto,
    EpochLoss, ModelGradients, TrainingRun,
};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, Standardizer};
use crate::metrics::{self, FairnessMetric, SurrogateKind};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature dimension mismatch: model has {model}, input has {input}")]
    DimensionMismatch { model: usize, input: usize },
    #[error("lambda {0} is not a positive finite real")]
    BadLambda(f64),
    #[error("empty {0} split")]
    EmptySplit(&'static str),
    #[error("training data has rows without a sensitive attribute")]
    MissingAttributes,
    #[error("invalid train config: {0}")]
    BadConfig(String),
    #[error("empty lambda grid")]
    EmptyGrid,
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error("model file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// λ-conditioning half of a loss-conditional model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilmNets {
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub mu: Mlp,
    pub sigma: Mlp,
}

impl FilmNets {
    /// log₁₀(λ) mapped affinely so the training range covers [0, 1].
    pub fn normalize_lambda(&self, lambda: f64) -> f64 {
        let lo = self.lambda_low.log10();
        let hi = self.lambda_high.log10();
        (lambda.log10() - lo) / (hi - lo)
    }
}

/// Logistic-regression weights plus optional FiLM conditioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFilmModel {
    pub w: Vec<f64>,
    pub b: f64,
    /// `None` for fixed-λ models: scale 1, shift 0.
    pub film: Option<FilmNets>,
}

/// One point on an empirical trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub accuracy: f64,
    pub violation: f64,
    /// The λ that produced the point; absent for external baselines.
    pub lambda: Option<f64>,
}

/// Hyperparameters shared by YOTO and fixed-λ training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Early-stop after this many epochs without validation improvement.
    pub patience: usize,
    pub seed: u64,
    pub surrogate: SurrogateKind,
    pub metric: FairnessMetric,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda_low: 1e-6,
            lambda_high: 10.0,
            learning_rate: 0.1,
            max_epochs: 1000,
            batch_size: 256,
            // the conditioning nets take a while to differentiate the
            // high-λ regime from the low; stopping early leaves the model
            // stuck at the constant classifier for every λ
            patience: 150,
            seed: 0,
            surrogate: SurrogateKind::SigmoidAbs,
            metric: FairnessMetric::DemographicParity,
        }
    }
}

impl TrainConfig {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if !(self.lambda_low.is_finite() && self.lambda_low > 0.0)
            || !(self.lambda_high.is_finite() && self.lambda_high > self.lambda_low)
        {
            return Err(ModelError::BadConfig(format!(
                "need 0 < lambda_low < lambda_high, got {} and {}",
                self.lambda_low, self.lambda_high
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(ModelError::BadConfig(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 || self.batch_size == 0 {
            return Err(ModelError::BadConfig("max_epochs and batch_size must be >= 1".into()));
        }
        Ok(())
    }

    /// The fixed λ grid that validation losses are averaged over.
    pub fn validation_lambda_grid(&self) -> Vec<f64> {
        log_spaced(self.lambda_low, self.lambda_high, 5)
    }
}

/// `count` log-spaced values covering [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let llo = lo.log10();
    let lhi = hi.log10();
    if count == 1 {
        return vec![10f64.powf((llo + lhi) / 2.0)];
    }
    (0..count)
        .map(|i| 10f64.powf(llo + (lhi - llo) * i as f64 / (count - 1) as f64))
        .collect()
}

impl LinearFilmModel {
    /// The conditioned logit. Fixed-λ models ignore λ entirely.
    pub fn forward(&self, x: &[f64], lambda: f64) -> Result<f64, ModelError> {
        if x.len() != self.w.len() {
            return Err(ModelError::DimensionMismatch { model: self.w.len(), input: x.len() });
        }
        let base = self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b;
        match &self.film {
            None => Ok(base),
            Some(film) => {
                if !lambda.is_finite() || lambda <= 0.0 {
                    return Err(ModelError::BadLambda(lambda));
                }
                if lambda < film.lambda_low || lambda > film.lambda_high {
                    log::warn!(
                        "lambda {lambda} outside training range [{}, {}]; extrapolating",
                        film.lambda_low,
                        film.lambda_high
                    );
                }
                let u = film.normalize_lambda(lambda);
                Ok(film.sigma.forward(u) * base + film.mu.forward(u))
            }
        }
    }

    /// Hard predictions 1(logit > threshold) over a dataset.
    pub fn predict(
        &self,
        data: &Dataset,
        lambda: f64,
        threshold: f64,
    ) -> Result<Vec<bool>, ModelError> {
        data.samples()
            .iter()
            .map(|s| Ok(self.forward(&s.x, lambda)? > threshold))
            .collect()
    }

    /// Accuracy and fairness violation at one λ.
    pub fn evaluate_at(
        &self,
        lambda: f64,
        data: &Dataset,
        metric: FairnessMetric,
        threshold: f64,
    ) -> Result<TradeoffPoint, ModelError> {
        let preds = self.predict(data, lambda, threshold)?;
        let y = data.labels();
        let a: Vec<bool> = data
            .attributes()
            .into_iter()
            .collect::<Option<Vec<bool>>>()
            .ok_or(ModelError::MissingAttributes)?;
        let accuracy = metrics::accuracy(&preds, &y)?;
        let violation = metrics::violation(metric, &preds, &a, &y)?;
        Ok(TradeoffPoint { accuracy, violation, lambda: Some(lambda) })
    }

    pub fn feature_dim(&self) -> usize {
        self.w.len()
    }

    pub fn parameter_count(&self) -> usize {
        let film = self
            .film
            .as_ref()
            .map(|f| f.mu.parameter_count() + f.sigma.parameter_count())
            .unwrap_or(0);
        self.w.len() + 1 + film
    }

    /// Flattened parameter vector: w, b, μ-net, σ-net. Used by the
    /// finite-difference checks.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        out.extend_from_slice(&self.w);
        out.push(self.b);
        if let Some(film) = &self.film {
            film.mu.flatten_into(&mut out);
            film.sigma.flatten_into(&mut out);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count(), "parameter vector length");
        let mut it = params.iter();
        for w in &mut self.w {
            *w = *it.next().unwrap();
        }
        self.b = *it.next().unwrap();
        if let Some(film) = &mut self.film {
            film.mu.unflatten_from(&mut it);
            film.sigma.unflatten_from(&mut it);
        }
    }
}

/// Evaluate trade-off points over a λ grid with hard-threshold predictions.
pub fn sweep(
    model: &LinearFilmModel,
    lambda_grid: &[f64],
    data: &Dataset,
    metric: FairnessMetric,
    threshold: f64,
) -> Result<Vec<TradeoffPoint>, ModelError> {
    if lambda_grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    lambda_grid
        .iter()
        .map(|&lambda| model.evaluate_at(lambda, data, metric, threshold))
        .collect()
}

/// How a saved model was trained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ModelKind {
    Yoto,
    Separate { lambda: f64 },
}

/// The versioned on-disk document: parameters plus the training context
/// needed to reuse them (metric, surrogate, validation λ grid, and the
/// feature scaler fitted on the training split, when one was used).
///
/// Parameters are stored as decimal arrays with explicit shapes. Floats are
/// written with the shortest decimal representation that parses back to the
/// identical bits, so save/load round-trips are bit-faithful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub kind: ModelKind,
    pub feature_dim: usize,
    pub metric: FairnessMetric,
    pub surrogate: SurrogateKind,
    pub seed: u64,
    pub validation_lambda_grid: Vec<f64>,
    pub scaler: Option<Standardizer>,
    pub model: LinearFilmModel,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub fn save_model(doc: &ModelDocument, path: &Path) -> Result<(), ModelError> {
    let json = serde_json::to_string_pretty(doc)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelDocument, ModelError> {
    let text = std::fs::read_to_string(path)?;
    let doc: ModelDocument = serde_json::from_str(&text)?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(ModelError::Format(format!(
            "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
            doc.format_version
        )));
    }
    if doc.feature_dim != doc.model.w.len() {
        return Err(ModelError::Format(format!(
            "feature_dim {} does not match weight vector length {}",
            doc.feature_dim,
            doc.model.w.len()
        )));
    }
    Ok(doc)
}
