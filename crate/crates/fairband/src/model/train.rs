//! Mini-batch gradient descent for loss-conditional and fixed-λ models.
//!
//! The objective is the regularized loss CE + λ·L_fair with the smooth
//! surrogate L_fair from [`crate::metrics`]. Loss-conditional training
//! resamples λ from LogUniform(λ_lo, λ_hi) once per batch; fixed-λ training
//! keeps it constant and bypasses FiLM. Early stopping watches the
//! validation loss averaged over a fixed λ grid (5 log-spaced values,
//! recorded in the model file) and restores the best parameters.
//!
//! Gradients are hand-derived through the FiLM nets; plain fixed-step
//! descent keeps runs bit-reproducible for a given seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::metrics::{
    self, decompose, FairnessMetric, SurrogateKind,
};

use super::mlp::{Mlp, MlpGrads};
use super::{FilmNets, LinearFilmModel, ModelError, TrainConfig};

/// Losses recorded after each epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// A trained model plus its per-epoch loss trace.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub model: LinearFilmModel,
    pub history: Vec<EpochLoss>,
    pub stopped_early: bool,
}

/// Gradients mirroring [`LinearFilmModel`].
#[derive(Debug, Clone)]
pub struct ModelGradients {
    pub w: Vec<f64>,
    pub b: f64,
    pub film: Option<(MlpGrads, MlpGrads)>,
}

impl ModelGradients {
    fn zeros(model: &LinearFilmModel) -> Self {
        Self {
            w: vec![0.0; model.w.len()],
            b: 0.0,
            film: model
                .film
                .as_ref()
                .map(|f| (MlpGrads::zeros(&f.mu), MlpGrads::zeros(&f.sigma))),
        }
    }

    /// Flattened in the same order as [`LinearFilmModel::parameters`].
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = self.w.clone();
        out.push(self.b);
        if let Some((mu, sigma)) = &self.film {
            for grads in [mu, sigma] {
                for (gw, gb) in &grads.layers {
                    out.extend_from_slice(gw);
                    out.extend_from_slice(gb);
                }
            }
        }
        out
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-(x.abs())).exp().ln_1p()
}

struct Conditioning {
    scale: f64,
    shift: f64,
    caches: Option<(super::mlp::MlpCache, super::mlp::MlpCache)>,
}

fn condition(model: &LinearFilmModel, lambda: f64) -> Result<Conditioning, ModelError> {
    match &model.film {
        None => Ok(Conditioning { scale: 1.0, shift: 0.0, caches: None }),
        Some(film) => {
            if !lambda.is_finite() || lambda <= 0.0 {
                return Err(ModelError::BadLambda(lambda));
            }
            let u = film.normalize_lambda(lambda);
            let (shift, mu_cache) = film.mu.forward_cached(u);
            let (scale, sigma_cache) = film.sigma.forward_cached(u);
            Ok(Conditioning { scale, shift, caches: Some((mu_cache, sigma_cache)) })
        }
    }
}

/// Are all conditioning events of the metric populated in these rows?
fn strata_present(metric: FairnessMetric, a: &[bool], y: &[bool]) -> bool {
    decompose(metric).strata.iter().all(|stratum| {
        stratum.terms.iter().all(|term| {
            (0..a.len())
                .any(|i| a[i] == term.event.group && term.event.label.is_none_or(|l| l == y[i]))
        })
    })
}

/// Loss and exact parameter gradient of CE + λ·L_fair on a row subset.
///
/// A batch missing one of the metric's strata contributes its CE term only;
/// erroring out would abort training on routine mini-batch imbalance.
pub fn batch_objective_and_gradient(
    model: &LinearFilmModel,
    data: &Dataset,
    rows: &[usize],
    lambda: f64,
    metric: FairnessMetric,
    surrogate: SurrogateKind,
) -> Result<(f64, ModelGradients), ModelError> {
    let n = rows.len();
    assert!(n > 0, "empty batch");
    let cond = condition(model, lambda)?;

    let mut bases = Vec::with_capacity(n);
    let mut scores = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for &i in rows {
        let s = &data.samples()[i];
        let base = model.w.iter().zip(&s.x).map(|(w, v)| w * v).sum::<f64>() + model.b;
        bases.push(base);
        scores.push(cond.scale * base + cond.shift);
        a.push(s.a.ok_or(ModelError::MissingAttributes)?);
        y.push(s.y);
    }

    let mut loss = 0.0;
    let mut dz = vec![0.0; n];
    for i in 0..n {
        let z = scores[i];
        let target = if y[i] { 1.0 } else { 0.0 };
        loss += (softplus(z) - target * z) / n as f64;
        dz[i] = (sigmoid(z) - target) / n as f64;
    }

    if lambda > 0.0 && strata_present(metric, &a, &y) {
        let l_fair = metrics::surrogate_loss(surrogate, metric, &scores, &a, &y)?;
        let g_fair = metrics::surrogate_gradient(surrogate, metric, &scores, &a, &y)?;
        loss += lambda * l_fair;
        for i in 0..n {
            dz[i] += lambda * g_fair[i];
        }
    }

    let mut grads = ModelGradients::zeros(model);
    let mut d_scale = 0.0;
    let mut d_shift = 0.0;
    for (idx, &i) in rows.iter().enumerate() {
        let g = dz[idx];
        let s = &data.samples()[i];
        for (gw, xv) in grads.w.iter_mut().zip(&s.x) {
            *gw += g * cond.scale * xv;
        }
        grads.b += g * cond.scale;
        d_scale += g * bases[idx];
        d_shift += g;
    }
    if let (Some(film), Some((mu_cache, sigma_cache)), Some((mu_g, sigma_g))) =
        (&model.film, &cond.caches, &mut grads.film)
    {
        film.mu.backward(mu_cache, d_shift, mu_g);
        film.sigma.backward(sigma_cache, d_scale, sigma_g);
    }
    Ok((loss, grads))
}

/// Gradient of a single conditioned logit with respect to every parameter.
pub fn forward_parameter_gradient(
    model: &LinearFilmModel,
    x: &[f64],
    lambda: f64,
) -> Result<Vec<f64>, ModelError> {
    if x.len() != model.w.len() {
        return Err(ModelError::DimensionMismatch { model: model.w.len(), input: x.len() });
    }
    let cond = condition(model, lambda)?;
    let base = model.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + model.b;
    let mut grads = ModelGradients::zeros(model);
    for (gw, xv) in grads.w.iter_mut().zip(x) {
        *gw = cond.scale * xv;
    }
    grads.b = cond.scale;
    if let (Some(film), Some((mu_cache, sigma_cache)), Some((mu_g, sigma_g))) =
        (&model.film, &cond.caches, &mut grads.film)
    {
        film.mu.backward(mu_cache, 1.0, mu_g);
        film.sigma.backward(sigma_cache, base, sigma_g);
    }
    Ok(grads.to_vec())
}

/// Full-dataset objective at one λ; used for validation.
pub fn dataset_objective(
    model: &LinearFilmModel,
    data: &Dataset,
    lambda: f64,
    metric: FairnessMetric,
    surrogate: SurrogateKind,
) -> Result<f64, ModelError> {
    let cond = condition(model, lambda)?;
    let mut scores = Vec::with_capacity(data.len());
    let mut a = Vec::with_capacity(data.len());
    let mut y = Vec::with_capacity(data.len());
    for s in data.samples() {
        let base = model.w.iter().zip(&s.x).map(|(w, v)| w * v).sum::<f64>() + model.b;
        scores.push(cond.scale * base + cond.shift);
        a.push(s.a.ok_or(ModelError::MissingAttributes)?);
        y.push(s.y);
    }
    let n = scores.len() as f64;
    let mut loss = 0.0;
    for i in 0..scores.len() {
        let target = if y[i] { 1.0 } else { 0.0 };
        loss += (softplus(scores[i]) - target * scores[i]) / n;
    }
    if lambda > 0.0 && strata_present(metric, &a, &y) {
        loss += lambda * metrics::surrogate_loss(surrogate, metric, &scores, &a, &y)?;
    }
    Ok(loss)
}

fn apply_step(model: &mut LinearFilmModel, grads: &ModelGradients, lr: f64) {
    for (w, g) in model.w.iter_mut().zip(&grads.w) {
        *w -= lr * g;
    }
    model.b -= lr * grads.b;
    if let (Some(film), Some((mu_g, sigma_g))) = (&mut model.film, &grads.film) {
        film.mu.step(mu_g, lr);
        film.sigma.step(sigma_g, lr);
    }
}

fn sample_log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let e = rng.random_range(lo.log10()..hi.log10());
    10f64.powf(e)
}

enum Mode {
    Yoto,
    Fixed(f64),
}

fn fit(
    train: &Dataset,
    val: &Dataset,
    config: &TrainConfig,
    mode: Mode,
) -> Result<TrainingRun, ModelError> {
    config.validate()?;
    if train.is_empty() {
        return Err(ModelError::EmptySplit("train"));
    }
    if val.is_empty() {
        return Err(ModelError::EmptySplit("validation"));
    }
    if !train.attributes_complete() || !val.attributes_complete() {
        return Err(ModelError::MissingAttributes);
    }
    if let Mode::Fixed(lambda) = mode {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(ModelError::BadLambda(lambda));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = LinearFilmModel {
        w: vec![0.0; train.feature_dim()],
        b: 0.0,
        film: match mode {
            Mode::Yoto => Some(FilmNets {
                lambda_low: config.lambda_low,
                lambda_high: config.lambda_high,
                mu: Mlp::conditioning_net(&mut rng, 0.0),
                sigma: Mlp::conditioning_net(&mut rng, 1.0),
            }),
            Mode::Fixed(_) => None,
        },
    };

    let val_lambdas = match mode {
        Mode::Yoto => config.validation_lambda_grid(),
        Mode::Fixed(lambda) => vec![lambda],
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best_loss = f64::INFINITY;
    let mut best_model = model.clone();
    let mut patience_left = config.patience;
    let mut history = Vec::new();
    let mut stopped_early = false;

    for epoch in 0..config.max_epochs {
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(config.batch_size) {
            let lambda = match mode {
                Mode::Yoto => sample_log_uniform(&mut rng, config.lambda_low, config.lambda_high),
                Mode::Fixed(lambda) => lambda,
            };
            let (loss, grads) = batch_objective_and_gradient(
                &model,
                train,
                batch,
                lambda,
                config.metric,
                config.surrogate,
            )?;
            apply_step(&mut model, &grads, config.learning_rate);
            epoch_loss += loss;
            batches += 1;
        }
        let train_loss = epoch_loss / batches as f64;
        let mut val_loss = 0.0;
        for &lambda in &val_lambdas {
            val_loss +=
                dataset_objective(&model, val, lambda, config.metric, config.surrogate)?;
        }
        val_loss /= val_lambdas.len() as f64;
        history.push(EpochLoss { epoch, train_loss, val_loss });

        if val_loss < best_loss {
            best_loss = val_loss;
            best_model = model.clone();
            patience_left = config.patience;
        } else if patience_left == 0 {
            stopped_early = true;
            break;
        } else {
            patience_left -= 1;
        }
    }
    Ok(TrainingRun { model: best_model, history, stopped_early })
}

/// Loss-conditional training; see the module docs for the objective.
pub fn train_yoto(
    train: &Dataset,
    val: &Dataset,
    config: &TrainConfig,
) -> Result<LinearFilmModel, ModelError> {
    Ok(fit_yoto(train, val, config)?.model)
}

/// Like [`train_yoto`] but keeps the per-epoch loss trace.
pub fn fit_yoto(
    train: &Dataset,
    val: &Dataset,
    config: &TrainConfig,
) -> Result<TrainingRun, ModelError> {
    fit(train, val, config, Mode::Yoto)
}

/// Fixed-λ training with FiLM bypassed; λ = 0 is plain logistic regression.
pub fn train_separate(
    train: &Dataset,
    val: &Dataset,
    lambda: f64,
    config: &TrainConfig,
) -> Result<LinearFilmModel, ModelError> {
    Ok(fit_separate(train, val, lambda, config)?.model)
}

/// Like [`train_separate`] but keeps the per-epoch loss trace.
pub fn fit_separate(
    train: &Dataset,
    val: &Dataset,
    lambda: f64,
    config: &TrainConfig,
) -> Result<TrainingRun, ModelError> {
    fit(train, val, config, Mode::Fixed(lambda))
}

/// Convenience logistic-regression trainer for a sensitive-attribute
/// surrogate f_A: fits a = f(x) on the rows where the attribute is present,
/// by full-batch descent on the cross-entropy. Deterministic (zero init).
pub fn train_attribute_predictor(
    data: &Dataset,
    epochs: usize,
    learning_rate: f64,
) -> Result<LinearFilmModel, ModelError> {
    let rows: Vec<&crate::data::Sample> =
        data.samples().iter().filter(|s| s.a.is_some()).collect();
    if rows.is_empty() {
        return Err(ModelError::EmptySplit("labeled"));
    }
    let n = rows.len() as f64;
    let mut model = LinearFilmModel { w: vec![0.0; data.feature_dim()], b: 0.0, film: None };
    for _ in 0..epochs {
        let mut gw = vec![0.0; model.w.len()];
        let mut gb = 0.0;
        for s in &rows {
            let z = model.w.iter().zip(&s.x).map(|(w, v)| w * v).sum::<f64>() + model.b;
            let target = if s.a == Some(true) { 1.0 } else { 0.0 };
            let g = (sigmoid(z) - target) / n;
            for (gwj, xv) in gw.iter_mut().zip(&s.x) {
                *gwj += g * xv;
            }
            gb += g;
        }
        for (w, g) in model.w.iter_mut().zip(&gw) {
            *w -= learning_rate * g;
        }
        model.b -= learning_rate * gb;
    }
    Ok(model)
}
