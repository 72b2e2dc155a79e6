//! The `fairband` command line: synthesize or ingest data, train models,
//! sweep trade-off curves, build confidence bands, audit baselines, and run
//! scarce-attribute corrections.
//!
//! Subcommands: `synth | train | sweep | band | audit | scarce | delta-trend`.
//!
//! Every command is deterministic given its flags and config file (all
//! seeds are explicit), and flags override config-file values. Exit codes
//! are a stable scripting contract: 0 success, 2 usage or config error,
//! 3 data error, 4 numeric failure.

mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::ci_mean::CiMethod;
use crate::data::{self, CsvSchema, Dataset, Standardizer, SyntheticConfig};
use crate::metrics::{FairnessMetric, SurrogateKind};
use crate::model::{
    self, fit_separate, fit_yoto, load_model, log_spaced, save_model, ModelDocument, ModelKind,
    TradeoffPoint, TrainConfig, TrainingRun,
};
use crate::scarce;
use crate::tradeoff::{
    self, baseline_region, monotonize, sensitivity_delta, CiOptions, FairnessCiConstruction,
    Region, SensitivityReport, TradeoffBand,
};

/// Exit codes per error class.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: bad flags, contradictory or invalid configuration.
    Usage(String),
    /// Exit 3: missing or malformed input data.
    Data(String),
    /// Exit 4: a numeric procedure failed on valid inputs.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<data::DataError> for CliError {
    fn from(e: data::DataError) -> Self {
        match e {
            data::DataError::BadFractions(..) | data::DataError::InvalidConfig(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<model::ModelError> for CliError {
    fn from(e: model::ModelError) -> Self {
        match e {
            model::ModelError::BadConfig(_)
            | model::ModelError::BadLambda(_)
            | model::ModelError::EmptyGrid => CliError::Usage(e.to_string()),
            model::ModelError::Metrics(_) => CliError::Numeric(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<crate::ci_mean::CiError> for CliError {
    fn from(e: crate::ci_mean::CiError) -> Self {
        use crate::ci_mean::CiError::*;
        match e {
            BadAlpha(_) | BadMethod(_) | TooFewReps(_) => CliError::Usage(e.to_string()),
            Empty | OutOfRange { .. } | Metrics(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<tradeoff::TradeoffError> for CliError {
    fn from(e: tradeoff::TradeoffError) -> Self {
        use tradeoff::TradeoffError::*;
        match e {
            Ci(inner) => inner.into(),
            Model(inner) => inner.into(),
            Data(inner) => inner.into(),
            Metrics(_) | Oracle(_) | OutOfRange { .. } => CliError::Numeric(e.to_string()),
            EmptySweep | BadDelta(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<scarce::ScarceError> for CliError {
    fn from(e: scarce::ScarceError) -> Self {
        use scarce::ScarceError::*;
        match e {
            LevelMismatch(..) | NoResamples => CliError::Usage(e.to_string()),
            RetriesExhausted(_) => CliError::Numeric(e.to_string()),
            NoLabeled | Metrics(_) => CliError::Data(e.to_string()),
            Ci(inner) => inner.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("json: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "fairband",
    version,
    about = "Accuracy-fairness trade-off bands and model audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV
    Synth(SynthArgs),
    /// Train a loss-conditional or fixed-λ model
    Train(TrainArgs),
    /// Evaluate a trained model's trade-off curve over a λ grid
    Sweep(SweepArgs),
    /// Build confidence bands around the optimal trade-off curve
    Band(BandArgs),
    /// Audit baseline predictions against a band
    Audit(AuditArgs),
    /// Corrected fairness intervals with scarce sensitive attributes
    Scarce(ScarceArgs),
    /// Trained-curve sub-optimality versus training-set size
    DeltaTrend(DeltaTrendArgs),
}

/// Optional config document; flags override any value set here.
#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    dataset: DatasetSection,
    run: RunSection,
    train: TrainSection,
    ci: CiSection,
    grid: GridSection,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct DatasetSection {
    path: Option<PathBuf>,
    features: Option<Vec<String>>,
    sensitive: Option<String>,
    label: Option<String>,
    synth_n: Option<usize>,
    synth_seed: Option<u64>,
    group_prob: Option<f64>,
    mean0: Option<f64>,
    mean1: Option<f64>,
    noise_sd: Option<f64>,
    label_flip_keep: Option<f64>,
    label_threshold: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct RunSection {
    metric: Option<FairnessMetric>,
    surrogate: Option<SurrogateKind>,
    alpha: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct TrainSection {
    learning_rate: Option<f64>,
    max_epochs: Option<usize>,
    batch_size: Option<usize>,
    patience: Option<usize>,
    lambda_low: Option<f64>,
    lambda_high: Option<f64>,
    val_fraction: Option<f64>,
    split_seed: Option<u64>,
    standardize: Option<bool>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct CiSection {
    construction: Option<FairnessCiConstruction>,
    bootstrap_resamples: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
struct GridSection {
    low: Option<f64>,
    high: Option<f64>,
    count: Option<usize>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Data(format!("config {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("config: {e}")))
        }
    }
}

/// Dataset source and schema flags shared by several commands; exactly one
/// of `--data` and `--synth-n` must be given (config may supply either).
#[derive(Args, Debug, Clone, Default)]
struct DataSource {
    /// CSV dataset path
    #[arg(long)]
    data: Option<PathBuf>,
    /// Feature column names, comma separated
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    /// Sensitive-attribute column name
    #[arg(long)]
    sensitive: Option<String>,
    /// Label column name
    #[arg(long)]
    label: Option<String>,
    /// Generate this many synthetic rows instead of reading a CSV
    #[arg(long)]
    synth_n: Option<usize>,
    /// Seed for the synthetic generator
    #[arg(long)]
    synth_seed: Option<u64>,
}

fn synthetic_from(section: &DatasetSection, seed: u64) -> SyntheticConfig {
    let defaults = SyntheticConfig::default();
    SyntheticConfig {
        group_prob: section.group_prob.unwrap_or(defaults.group_prob),
        group_means: (
            section.mean0.unwrap_or(defaults.group_means.0),
            section.mean1.unwrap_or(defaults.group_means.1),
        ),
        noise_sd: section.noise_sd.unwrap_or(defaults.noise_sd),
        label_flip_keep: section.label_flip_keep.unwrap_or(defaults.label_flip_keep),
        label_threshold: section.label_threshold.unwrap_or(defaults.label_threshold),
        seed,
    }
}

impl DataSource {
    fn resolve(&self, file: &DatasetSection) -> Result<Dataset, CliError> {
        let csv_path = self.data.clone().or_else(|| file.path.clone());
        let synth_n = self.synth_n.or(file.synth_n);
        match (csv_path, synth_n) {
            (Some(_), Some(_)) => Err(CliError::Usage(
                "exactly one dataset source: --data or --synth-n, not both".into(),
            )),
            (None, None) => {
                Err(CliError::Usage("a dataset source is required: --data or --synth-n".into()))
            }
            (Some(path), None) => {
                let features = if self.features.is_empty() {
                    file.features.clone().unwrap_or_default()
                } else {
                    self.features.clone()
                };
                if features.is_empty() {
                    return Err(CliError::Usage("--features is required with --data".into()));
                }
                let label = self
                    .label
                    .clone()
                    .or_else(|| file.label.clone())
                    .ok_or_else(|| CliError::Usage("--label is required with --data".into()))?;
                let sensitive = self.sensitive.clone().or_else(|| file.sensitive.clone());
                let schema = CsvSchema { features, sensitive, label };
                Ok(data::load_csv(&path, &schema)?)
            }
            (None, Some(n)) => {
                if n == 0 {
                    return Err(CliError::Usage("--synth-n must be at least 1".into()));
                }
                let seed = self.synth_seed.or(file.synth_seed).unwrap_or(0);
                Ok(data::generate_synthetic(&synthetic_from(file, seed), n)?)
            }
        }
    }

    fn echo(&self, file: &DatasetSection) -> serde_json::Value {
        serde_json::json!({
            "data": self.data.clone().or_else(|| file.path.clone()),
            "synth_n": self.synth_n.or(file.synth_n),
            "synth_seed": self.synth_seed.or(file.synth_seed),
        })
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Number of rows
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    group_prob: Option<f64>,
    #[arg(long)]
    mean0: Option<f64>,
    #[arg(long)]
    mean1: Option<f64>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    label_flip_keep: Option<f64>,
    #[arg(long)]
    label_threshold: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let file = load_config(&args.config)?;
    let n = args.n.or(file.dataset.synth_n).unwrap_or(0);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mut section = file.dataset.clone();
    section.group_prob = args.group_prob.or(section.group_prob);
    section.mean0 = args.mean0.or(section.mean0);
    section.mean1 = args.mean1.or(section.mean1);
    section.noise_sd = args.noise_sd.or(section.noise_sd);
    section.label_flip_keep = args.label_flip_keep.or(section.label_flip_keep);
    section.label_threshold = args.label_threshold.or(section.label_threshold);
    let seed = args.seed.or(section.synth_seed).unwrap_or(0);
    let config = synthetic_from(&section, seed);
    let dataset = data::generate_synthetic(&config, n)?;
    data::write_csv(&dataset, &args.out)?;
    println!("wrote {}: {dataset}", args.out.display());
    Ok(())
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    source: DataSource,
    /// yoto (loss-conditional) or separate (fixed λ)
    #[arg(long, default_value = "yoto")]
    mode: String,
    /// Regularization weight; required in separate mode
    #[arg(long)]
    lambda: Option<f64>,
    /// Output model JSON path
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch loss CSV (default: <out>_losses.csv)
    #[arg(long)]
    loss_log: Option<PathBuf>,
    #[arg(long)]
    metric: Option<FairnessMetric>,
    #[arg(long)]
    surrogate: Option<SurrogateKind>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    lambda_low: Option<f64>,
    #[arg(long)]
    lambda_high: Option<f64>,
    /// Fraction of rows held out for validation / early stopping
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Skip fitting the feature standardizer on the training split
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn build_train_config(args: &TrainArgs, file: &FileConfig) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        lambda_low: args.lambda_low.or(file.train.lambda_low).unwrap_or(d.lambda_low),
        lambda_high: args.lambda_high.or(file.train.lambda_high).unwrap_or(d.lambda_high),
        learning_rate: args
            .learning_rate
            .or(file.train.learning_rate)
            .unwrap_or(d.learning_rate),
        max_epochs: args.max_epochs.or(file.train.max_epochs).unwrap_or(d.max_epochs),
        batch_size: args.batch_size.or(file.train.batch_size).unwrap_or(d.batch_size),
        patience: args.patience.or(file.train.patience).unwrap_or(d.patience),
        seed: args.seed.or(file.run.seed).unwrap_or(d.seed),
        surrogate: args.surrogate.or(file.run.surrogate).unwrap_or(d.surrogate),
        metric: args.metric.or(file.run.metric).unwrap_or(d.metric),
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let file = load_config(&args.config)?;
    let full = args.source.resolve(&file.dataset)?;
    if !full.attributes_complete() {
        let field = args
            .source
            .sensitive
            .clone()
            .or_else(|| file.dataset.sensitive.clone())
            .unwrap_or_else(|| "sensitive".into());
        return Err(CliError::Data(format!(
            "training requires the sensitive column '{field}' on every row"
        )));
    }
    let config = build_train_config(&args, &file);
    let val_fraction = args.val_fraction.or(file.train.val_fraction).unwrap_or(0.2);
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(CliError::Usage(format!("val_fraction {val_fraction} outside (0,1)")));
    }
    let split_seed = args.split_seed.or(file.train.split_seed).unwrap_or(1);
    // three-way split keeps the splitter's contract; the middle share is
    // unused here and stays available as held-out data
    let half = val_fraction / 2.0;
    let (train_raw, val_raw, _) =
        data::split(&full, (1.0 - val_fraction, half, half), split_seed)?;

    let standardize = !args.no_standardize
        && file.train.standardize.unwrap_or(true);
    let scaler = if standardize { Some(Standardizer::fit(&train_raw)) } else { None };
    let (train, val) = match &scaler {
        Some(s) => (s.apply(&train_raw)?, s.apply(&val_raw)?),
        None => (train_raw, val_raw),
    };

    let kind;
    let run: TrainingRun = match args.mode.as_str() {
        "yoto" => {
            kind = ModelKind::Yoto;
            fit_yoto(&train, &val, &config)?
        }
        "separate" => {
            let lambda = args.lambda.ok_or_else(|| {
                CliError::Usage("separate mode requires an explicit --lambda".into())
            })?;
            kind = ModelKind::Separate { lambda };
            fit_separate(&train, &val, lambda, &config)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown mode '{other}' (expected yoto|separate)"
            )))
        }
    };
    if run.model.parameters().iter().any(|p| !p.is_finite()) {
        return Err(CliError::Numeric(
            "training diverged: non-finite parameters (reduce --learning-rate)".into(),
        ));
    }

    let doc = ModelDocument {
        format_version: model::MODEL_FORMAT_VERSION,
        kind,
        feature_dim: run.model.feature_dim(),
        metric: config.metric,
        surrogate: config.surrogate,
        seed: config.seed,
        validation_lambda_grid: config.validation_lambda_grid(),
        scaler,
        model: run.model.clone(),
    };
    save_model(&doc, &args.out)?;

    let loss_path = args
        .loss_log
        .clone()
        .unwrap_or_else(|| args.out.with_extension("losses.csv"));
    let mut losses = String::from("epoch,train_loss,val_loss\n");
    for e in &run.history {
        losses.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.val_loss));
    }
    std::fs::write(&loss_path, losses)?;
    println!(
        "trained {} model over {} epochs{}; wrote {} and {}",
        args.mode,
        run.history.len(),
        if run.stopped_early { " (early stop)" } else { "" },
        args.out.display(),
        loss_path.display()
    );
    Ok(())
}

fn grid_from(args_low: Option<f64>, args_high: Option<f64>, args_count: Option<usize>, file: &GridSection, doc: &ModelDocument) -> Result<Vec<f64>, CliError> {
    let (default_low, default_high) = match &doc.model.film {
        Some(f) => (f.lambda_low, f.lambda_high),
        None => (1e-6, 10.0),
    };
    let low = args_low.or(file.low).unwrap_or(default_low);
    let high = args_high.or(file.high).unwrap_or(default_high);
    let count = args_count.or(file.count).unwrap_or(25);
    if !(low > 0.0 && low < high) || count == 0 {
        return Err(CliError::Usage(format!(
            "bad lambda grid: low {low}, high {high}, count {count}"
        )));
    }
    Ok(log_spaced(low, high, count))
}

fn prepared_dataset(doc: &ModelDocument, raw: Dataset) -> Result<Dataset, CliError> {
    match &doc.scaler {
        Some(s) => Ok(s.apply(&raw)?),
        None => Ok(raw),
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    source: DataSource,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    grid_low: Option<f64>,
    #[arg(long)]
    grid_high: Option<f64>,
    #[arg(long)]
    grid_count: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let file = load_config(&args.config)?;
    let doc = load_model(&args.model)?;
    let dataset = prepared_dataset(&doc, args.source.resolve(&file.dataset)?)?;
    let grid = grid_from(args.grid_low, args.grid_high, args.grid_count, &file.grid, &doc)?;
    let points = model::sweep(&doc.model, &grid, &dataset, doc.metric, 0.0)?;
    let mut out = String::from("lambda,accuracy,violation\n");
    for p in &points {
        out.push_str(&format!("{},{},{}\n", p.lambda.unwrap_or(f64::NAN), p.accuracy, p.violation));
    }
    std::fs::write(&args.out, out)?;
    println!("wrote {} trade-off points to {}", points.len(), args.out.display());
    Ok(())
}

/// On-disk companion of a band CSV: everything needed to audit against it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandSidecar {
    pub alpha: f64,
    pub metric: FairnessMetric,
    pub method: String,
    pub construction: FairnessCiConstruction,
    pub bootstrap_resamples: usize,
    pub ci_seed: u64,
    pub delta_used: f64,
    pub sensitivity: Option<SensitivityReport>,
    pub yoto_curve: Vec<TradeoffPoint>,
    /// Effective configuration echoed for provenance.
    pub config: serde_json::Value,
}

fn parse_method(name: &str, resamples: usize, seed: u64) -> Result<CiMethod, CliError> {
    match name {
        "hoeffding" => Ok(CiMethod::Hoeffding),
        "bernstein" => Ok(CiMethod::bernstein_default()),
        "clt" => Ok(CiMethod::Clt),
        "bootstrap" => Ok(CiMethod::Bootstrap { resamples, seed }),
        other => Err(CliError::Usage(format!(
            "unknown method '{other}' (expected hoeffding|bernstein|clt|bootstrap)"
        ))),
    }
}

#[derive(Args, Debug)]
struct BandArgs {
    #[arg(long)]
    model: PathBuf,
    /// Calibration CSV; must be disjoint from the training data
    #[arg(long)]
    cal: Option<PathBuf>,
    #[command(flatten)]
    source: DataSource,
    /// CI method; repeat the flag to emit several bands
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    construction: Option<FairnessCiConstruction>,
    #[arg(long)]
    bootstrap_resamples: Option<usize>,
    #[arg(long)]
    ci_seed: Option<u64>,
    /// Separately trained model files for the sensitivity analysis
    #[arg(long = "compare")]
    compare: Vec<PathBuf>,
    #[arg(long)]
    grid_low: Option<f64>,
    #[arg(long)]
    grid_high: Option<f64>,
    #[arg(long)]
    grid_count: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Also render an SVG plot per band
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_band(args: BandArgs) -> Result<(), CliError> {
    let file = load_config(&args.config)?;
    let doc = load_model(&args.model)?;
    let mut source = args.source.clone();
    if let Some(cal) = &args.cal {
        if source.data.is_some() {
            return Err(CliError::Usage("--cal and --data are the same input; give one".into()));
        }
        source.data = Some(cal.clone());
    }
    let cal = prepared_dataset(&doc, source.resolve(&file.dataset)?)?;
    let alpha = args.alpha.or(file.run.alpha).unwrap_or(0.05);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha {alpha} outside (0,1)")));
    }
    let grid = grid_from(args.grid_low, args.grid_high, args.grid_count, &file.grid, &doc)?;
    let resamples =
        args.bootstrap_resamples.or(file.ci.bootstrap_resamples).unwrap_or(500);
    let ci_seed = args.ci_seed.or(file.ci.seed).unwrap_or(0);
    let construction = args
        .construction
        .or(file.ci.construction)
        .unwrap_or(FairnessCiConstruction::Union);
    let methods = if args.methods.is_empty() {
        vec!["hoeffding".to_string()]
    } else {
        args.methods.clone()
    };

    let yoto_curve = model::sweep(&doc.model, &grid, &cal, doc.metric, 0.0)?;

    // sensitivity analysis against the comparison models
    let mut comparisons: Vec<(String, Vec<TradeoffPoint>)> = Vec::new();
    for path in &args.compare {
        let cmp_doc = load_model(path)?;
        let cmp_data = prepared_dataset(&cmp_doc, source.resolve(&file.dataset)?)?;
        let points = match cmp_doc.kind {
            ModelKind::Separate { lambda } => {
                vec![cmp_doc.model.evaluate_at(lambda, &cmp_data, doc.metric, 0.0)?]
            }
            ModelKind::Yoto => model::sweep(&cmp_doc.model, &grid, &cmp_data, doc.metric, 0.0)?,
        };
        comparisons.push((path.display().to_string(), points));
    }
    let sensitivity = if comparisons.is_empty() {
        log::warn!(
            "no --compare models: delta = 0, the lower band assumes the swept model is optimal"
        );
        None
    } else {
        Some(sensitivity_delta(&yoto_curve, &comparisons)?)
    };
    let delta = sensitivity.as_ref().map(|s| s.delta_hat).unwrap_or(0.0);

    std::fs::create_dir_all(&args.out_dir)?;
    for name in &methods {
        let method = parse_method(name, resamples, crate::seed::derive(ci_seed, hash_name(name)))?;
        let opts = CiOptions { method, construction, seed: ci_seed };
        let upper = tradeoff::upper_band(&doc.model, &grid, &cal, doc.metric, alpha, &opts)?;
        let lower =
            tradeoff::lower_band(&doc.model, &grid, &cal, doc.metric, alpha, delta, &opts)?;
        let band = monotonize(&upper, &lower, alpha, delta, yoto_curve.clone());

        let csv_path = args.out_dir.join(format!("band_{name}.csv"));
        std::fs::write(&csv_path, band.to_csv())?;
        let sidecar = BandSidecar {
            alpha,
            metric: doc.metric,
            method: name.clone(),
            construction,
            bootstrap_resamples: resamples,
            ci_seed,
            delta_used: delta,
            sensitivity: sensitivity.clone(),
            yoto_curve: yoto_curve.clone(),
            config: serde_json::json!({
                "model": args.model,
                "dataset": source.echo(&file.dataset),
                "alpha": alpha,
                "grid": {"low": grid.first(), "high": grid.last(), "count": grid.len()},
                "compare": args.compare,
            }),
        };
        let json_path = args.out_dir.join(format!("band_{name}.json"));
        std::fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)?;
        if args.svg {
            let svg_path = args.out_dir.join(format!("band_{name}.svg"));
            std::fs::write(&svg_path, svg::render_band(&band, &doc.metric.to_string(), &[]))?;
        }
        println!(
            "band [{name}] over {} grid points, delta {delta}: {}",
            band.points.len(),
            csv_path.display()
        );
    }
    Ok(())
}

fn hash_name(name: &str) -> u64 {
    name.bytes().fold(1469598103934665603u64, |h, b| (h ^ b as u64).wrapping_mul(1099511628211))
}

/// Reload a band from its CSV and JSON sidecar.
pub fn load_band(csv_path: &Path) -> Result<(TradeoffBand, BandSidecar), CliError> {
    let sidecar_path = csv_path.with_extension("json");
    let sidecar: BandSidecar =
        serde_json::from_str(&std::fs::read_to_string(&sidecar_path).map_err(|e| {
            CliError::Data(format!("band sidecar {}: {e}", sidecar_path.display()))
        })?)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(csv_path)?;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let parse = |i: usize| -> Result<f64, CliError> {
            field(i)
                .parse()
                .map_err(|_| CliError::Data(format!("band csv: bad number '{}'", field(i))))
        };
        let optional = |i: usize| -> Option<f64> { field(i).parse().ok() };
        points.push(tradeoff::BandPoint {
            psi: parse(0)?,
            lower: parse(1)?,
            upper: parse(2)?,
            lambda_lower_src: optional(3),
            lambda_upper_src: optional(4),
        });
    }
    let band = TradeoffBand {
        points,
        alpha: sidecar.alpha,
        delta_used: sidecar.delta_used,
        yoto_curve: sidecar.yoto_curve.clone(),
    };
    Ok((band, sidecar))
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Band CSV produced by `band` (sidecar JSON read from the same stem)
    #[arg(long)]
    band: PathBuf,
    /// Baseline prediction CSVs as name=path; repeatable
    #[arg(long = "baseline")]
    baselines: Vec<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Verdict table CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the band with baseline points
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn parse_name_path(spec: &str) -> Result<(String, PathBuf), CliError> {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => Err(CliError::Usage(format!("--baseline expects name=path, got '{spec}'"))),
    }
}

/// prediction, sensitive-attribute, and label columns, in that order.
type PredictionColumns = (Vec<bool>, Vec<bool>, Vec<bool>);

/// Baseline prediction CSV: columns prediction, sens, label (binary).
fn read_prediction_csv(path: &Path) -> Result<PredictionColumns, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{}: missing column '{name}'", path.display())))
    };
    let (pi, ai, yi) = (idx("prediction")?, idx("sens")?, idx("label")?);
    let mut preds = Vec::new();
    let mut a = Vec::new();
    let mut y = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize, what: &str| -> Result<bool, CliError> {
            match record.get(i).map(str::trim) {
                Some("0") => Ok(false),
                Some("1") => Ok(true),
                other => Err(CliError::Data(format!(
                    "{} row {}: {what} '{}' is not binary",
                    path.display(),
                    row + 1,
                    other.unwrap_or("")
                ))),
            }
        };
        preds.push(parse(pi, "prediction")?);
        a.push(parse(ai, "sens")?);
        y.push(parse(yi, "label")?);
    }
    if preds.is_empty() {
        return Err(CliError::Data(format!("{}: no rows", path.display())));
    }
    Ok((preds, a, y))
}

fn cmd_audit(args: AuditArgs) -> Result<(), CliError> {
    let (band, sidecar) = load_band(&args.band)?;
    let alpha = args.alpha.unwrap_or(sidecar.alpha);
    let method = parse_method(&sidecar.method, sidecar.bootstrap_resamples, sidecar.ci_seed)?;
    let opts =
        CiOptions { method, construction: sidecar.construction, seed: sidecar.ci_seed };

    let mut rows = Vec::new();
    let mut marks = Vec::new();
    let mut tally: BTreeMap<&'static str, usize> = BTreeMap::new();
    for spec in &args.baselines {
        let (name, path) = parse_name_path(spec)?;
        let (preds, a, y) = read_prediction_csv(&path)?;
        let audit = baseline_region(sidecar.metric, &preds, &a, &y, alpha, &band, &opts)?;
        let region_name = match audit.plug_in_region {
            Region::Unlikely => "unlikely",
            Region::Permissible => "permissible",
            Region::Suboptimal => "sub-optimal",
        };
        *tally.entry(region_name).or_insert(0) += 1;
        println!(
            "{name}: acc {:.4}, violation {:.4} -> {} (verdict: {}, confidence {:.2})",
            audit.plug_in.accuracy,
            audit.plug_in.violation,
            audit.plug_in_region,
            audit.verdict,
            audit.confidence
        );
        rows.push(format!(
            "{name},{},{},{},{},{},{},{},{:?},{}",
            audit.plug_in.accuracy,
            audit.plug_in.violation,
            audit.plug_in_region,
            audit.region.best_case.accuracy,
            audit.region.best_case.violation,
            audit.region.worst_case.accuracy,
            audit.region.worst_case.violation,
            audit.verdict,
            audit.confidence
        ));
        marks.push((name, audit.plug_in, audit.plug_in_region));
    }
    let total = rows.len().max(1);
    for (region, count) in &tally {
        println!("  {region}: {count}/{} ({:.1}%)", rows.len(), 100.0 * *count as f64 / total as f64);
    }
    if let Some(out) = &args.out {
        let mut csv = String::from(
            "baseline,accuracy,violation,region,best_acc,best_fair,worst_acc,worst_fair,verdict,confidence\n",
        );
        for row in &rows {
            csv.push_str(row);
            csv.push('\n');
        }
        std::fs::write(out, csv)?;
        println!("wrote {}", out.display());
    }
    if let Some(svg_path) = &args.svg {
        std::fs::write(
            svg_path,
            svg::render_band(&band, &sidecar.metric.to_string(), &marks),
        )?;
    }
    Ok(())
}

#[derive(Args, Debug)]
struct ScarceArgs {
    /// Labeled rows CSV: prediction, sens, label
    #[arg(long)]
    labeled: PathBuf,
    /// Unlabeled rows CSV: prediction, label
    #[arg(long)]
    unlabeled: PathBuf,
    /// Surrogate attribute CSV: one predicted_sens column, labeled rows
    /// first, then unlabeled rows
    #[arg(long)]
    surrogate: PathBuf,
    #[arg(long)]
    metric: Option<FairnessMetric>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    b_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn read_two_column_csv(path: &Path) -> Result<(Vec<bool>, Vec<bool>), CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{}: missing column '{name}'", path.display())))
    };
    let (pi, yi) = (idx("prediction")?, idx("label")?);
    let mut preds = Vec::new();
    let mut y = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<bool, CliError> {
            match record.get(i).map(str::trim) {
                Some("0") => Ok(false),
                Some("1") => Ok(true),
                other => Err(CliError::Data(format!(
                    "{} row {}: '{}' is not binary",
                    path.display(),
                    row + 1,
                    other.unwrap_or("")
                ))),
            }
        };
        preds.push(parse(pi)?);
        y.push(parse(yi)?);
    }
    Ok((preds, y))
}

fn read_surrogate_csv(path: &Path) -> Result<Vec<bool>, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let idx = headers.iter().position(|h| h == "predicted_sens").ok_or_else(|| {
        CliError::Data(format!("{}: missing column 'predicted_sens'", path.display()))
    })?;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        match record.get(idx).map(str::trim) {
            Some("0") => out.push(false),
            Some("1") => out.push(true),
            other => {
                return Err(CliError::Data(format!(
                    "{} row {}: '{}' is not binary",
                    path.display(),
                    row + 1,
                    other.unwrap_or("")
                )))
            }
        }
    }
    Ok(out)
}

fn cmd_scarce(args: ScarceArgs) -> Result<(), CliError> {
    let file = load_config(&args.config)?;
    let metric = args.metric.or(file.run.metric).unwrap_or(FairnessMetric::DemographicParity);
    let alpha = args.alpha.or(file.run.alpha).unwrap_or(0.05);
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(CliError::Usage(format!(
            "alpha {alpha} outside (0, 0.5): the combined level is 1-2*alpha"
        )));
    }
    let b_count = args.b_count.or(file.ci.bootstrap_resamples).unwrap_or(500);
    let seed = args.seed.or(file.ci.seed).unwrap_or(0);
    let method_name = args.method.clone().unwrap_or_else(|| "hoeffding".into());
    let method = parse_method(&method_name, b_count, seed)?;

    let (l_preds, l_a, l_y) = read_prediction_csv(&args.labeled)?;
    let (u_preds, u_y) = read_two_column_csv(&args.unlabeled)?;
    let a_hat = read_surrogate_csv(&args.surrogate)?;
    if a_hat.len() != l_preds.len() + u_preds.len() {
        return Err(CliError::Data(format!(
            "surrogate file has {} rows, expected {} labeled + {} unlabeled",
            a_hat.len(),
            l_preds.len(),
            u_preds.len()
        )));
    }
    let (l_hat, u_hat) = a_hat.split_at(l_preds.len());

    let labeled: Vec<scarce::LabeledRow> = (0..l_preds.len())
        .map(|i| scarce::LabeledRow {
            prediction: l_preds[i],
            attribute: l_a[i],
            predicted_attribute: l_hat[i],
            label: l_y[i],
        })
        .collect();
    let eps = scarce::epsilon_ci_bootstrap(&labeled, metric, b_count, alpha, seed)?;
    let tilde = scarce::tilde_fairness_ci(&u_preds, u_hat, &u_y, metric, &method, alpha)?;
    let corrected = scarce::combined_ci(&eps, &tilde)?;

    // naive baseline over all rows, imputing only where unobserved
    let mut samples = Vec::new();
    for i in 0..l_preds.len() {
        samples.push(crate::data::Sample { x: vec![0.0], a: Some(l_a[i]), y: l_y[i] });
    }
    for (i, &p) in u_preds.iter().enumerate() {
        let _ = p;
        samples.push(crate::data::Sample { x: vec![0.0], a: None, y: u_y[i] });
    }
    let all = Dataset::new(samples).map_err(|e| CliError::Data(e.to_string()))?;
    let all_preds: Vec<bool> = l_preds.iter().chain(u_preds.iter()).copied().collect();
    let naive = scarce::naive_imputed_ci(&all, &all_preds, &a_hat, metric, &method, alpha)?;

    let report = serde_json::json!({
        "metric": metric,
        "method": method_name,
        "alpha": alpha,
        "epsilon": {"lo": eps.lo, "hi": eps.hi, "level": eps.level},
        "tilde": {"lo": tilde.lo, "hi": tilde.hi, "level": tilde.level},
        "corrected": {"lo": corrected.lo, "hi": corrected.hi, "level": corrected.level},
        "naive": {"lo": naive.lo, "hi": naive.hi, "level": naive.level,
                   "warning": "biased unless the surrogate is highly accurate"},
        "rows": {"labeled": l_preds.len(), "unlabeled": u_preds.len()},
        "seed": seed,
    });
    println!(
        "epsilon [{:.4}, {:.4}] at {:.3}\ntilde [{:.4}, {:.4}] at {:.3}\n\
         corrected [{:.4}, {:.4}] at {:.3}\nnaive (biased) [{:.4}, {:.4}] at {:.3}",
        eps.lo,
        eps.hi,
        eps.level,
        tilde.lo,
        tilde.hi,
        tilde.level,
        corrected.lo,
        corrected.hi,
        corrected.level,
        naive.lo,
        naive.hi,
        naive.level
    );
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)?)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

#[derive(Args, Debug)]
struct DeltaTrendArgs {
    /// Training-set sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    seeds_per_size: usize,
    #[arg(long)]
    metric: Option<FairnessMetric>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    grid_count: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_delta_trend(args: DeltaTrendArgs) -> Result<(), CliError> {
    let file = load_config(&args.config)?;
    if args.sizes.is_empty() {
        return Err(CliError::Usage("--sizes requires at least one size".into()));
    }
    if args.seeds_per_size == 0 {
        return Err(CliError::Usage("--seeds-per-size must be at least 1".into()));
    }
    let metric = args.metric.or(file.run.metric).unwrap_or(FairnessMetric::DemographicParity);
    let seed = args.seed.or(file.run.seed).unwrap_or(0);
    let mut config = tradeoff::DeltaTrendConfig::default();
    config.synthetic.seed = seed;
    config.train.metric = metric;
    config.train.seed = seed;
    if let Some(epochs) = args.max_epochs.or(file.train.max_epochs) {
        config.train.max_epochs = epochs;
    }
    if let Some(count) = args.grid_count.or(file.grid.count) {
        config.lambda_grid = log_spaced(1e-6, 10.0, count.max(1));
    }
    let trend = tradeoff::delta_trend(&args.sizes, args.seeds_per_size, &config)?;
    let mut csv = String::from("size,median_relative_gap\n");
    for (size, gap) in &trend {
        println!("train size {size}: median worst-case relative gap {gap:.4}");
        csv.push_str(&format!("{size},{gap}\n"));
    }
    if let Some(out) = &args.out {
        std::fs::write(out, csv)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

/// Parse and run from process arguments; returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args())
}

/// Entry point used by tests: any iterable of arguments.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Band(args) => cmd_band(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Scarce(args) => cmd_scarce(args),
        Command::DeltaTrend(args) => cmd_delta_trend(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
