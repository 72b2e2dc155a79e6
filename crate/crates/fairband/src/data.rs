//! Dataset representation, CSV ingestion, deterministic splitting, and the
//! synthetic generator used throughout the test suites.
//!
//! A dataset is a list of `(x, a, y)` triples: a feature vector, an optional
//! binary sensitive attribute and a binary label. Missing sensitive
//! attributes are encoded per-row as `None` (an empty cell in CSV) so that
//! the scarce-attribute flows consume the same type.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset is empty")]
    Empty,
    #[error("sample {index} has {got} features, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("sample {index} has a non-finite feature value")]
    NonFiniteFeature { index: usize },
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("missing column '{0}' in CSV header")]
    MissingColumn(String),
    #[error("split fractions must lie in (0,1) and sum to 1, got ({0}, {1}, {2})")]
    BadFractions(f64, f64, f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One record: features, optional binary sensitive attribute, binary label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub a: Option<bool>,
    pub y: bool,
}

/// A nonempty collection of samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    feature_dim: usize,
}

impl Dataset {
    /// Build a dataset, validating the shared feature dimension and
    /// finiteness of every feature value.
    pub fn new(samples: Vec<Sample>) -> Result<Self, DataError> {
        let first = samples.first().ok_or(DataError::Empty)?;
        let feature_dim = first.x.len();
        for (index, s) in samples.iter().enumerate() {
            if s.x.len() != feature_dim {
                return Err(DataError::DimensionMismatch {
                    index,
                    expected: feature_dim,
                    got: s.x.len(),
                });
            }
            if s.x.iter().any(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteFeature { index });
            }
        }
        Ok(Self { samples, feature_dim })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn labels(&self) -> Vec<bool> {
        self.samples.iter().map(|s| s.y).collect()
    }

    /// Sensitive attributes; `None` entries mark rows where the attribute
    /// was not observed.
    pub fn attributes(&self) -> Vec<Option<bool>> {
        self.samples.iter().map(|s| s.a).collect()
    }

    /// True when every row carries a sensitive attribute.
    pub fn attributes_complete(&self) -> bool {
        self.samples.iter().all(|s| s.a.is_some())
    }

    /// Pull the rows at `indices` into a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, DataError> {
        Dataset::new(indices.iter().map(|&i| self.samples[i].clone()).collect())
    }
}

/// Parameters of the synthetic generator.
///
/// The mechanism: A ~ Bern(`group_prob`), X | A=a ~ N(`group_means[a]`,
/// `noise_sd`²), and Y = Z·1(X > `label_threshold`) + (1−Z)·1(X ≤ threshold)
/// with Z ~ Bern(`label_flip_keep`). Defaults give the setup where the Bayes
/// classifier 1(X > 0.5) has accuracy 0.9.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub group_prob: f64,
    pub group_means: (f64, f64),
    pub noise_sd: f64,
    pub label_flip_keep: f64,
    pub label_threshold: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            group_prob: 0.5,
            group_means: (0.0, 1.0),
            noise_sd: 0.2,
            label_flip_keep: 0.9,
            label_threshold: 0.5,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn validate(&self) -> Result<(), DataError> {
        if !(0.0..=1.0).contains(&self.group_prob) {
            return Err(DataError::InvalidConfig(format!(
                "group_prob {} outside [0,1]",
                self.group_prob
            )));
        }
        if !(0.0..=1.0).contains(&self.label_flip_keep) {
            return Err(DataError::InvalidConfig(format!(
                "label_flip_keep {} outside [0,1]",
                self.label_flip_keep
            )));
        }
        if !self.noise_sd.is_finite() || self.noise_sd <= 0.0 {
            return Err(DataError::InvalidConfig(format!(
                "noise_sd {} must be a positive real",
                self.noise_sd
            )));
        }
        if !self.group_means.0.is_finite()
            || !self.group_means.1.is_finite()
            || !self.label_threshold.is_finite()
        {
            return Err(DataError::InvalidConfig("non-finite mean or threshold".into()));
        }
        Ok(())
    }
}

/// Standard normal draw via Box-Muller; two uniforms consumed per call keeps
/// the stream layout fixed.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draw `n` samples by the stated mechanism; bit-identical for a fixed seed.
pub fn generate_synthetic(config: &SyntheticConfig, n: usize) -> Result<Dataset, DataError> {
    config.validate()?;
    if n == 0 {
        return Err(DataError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.random::<f64>() < config.group_prob;
        let mean = if a { config.group_means.1 } else { config.group_means.0 };
        let x = mean + config.noise_sd * standard_normal(&mut rng);
        let keep = rng.random::<f64>() < config.label_flip_keep;
        let above = x > config.label_threshold;
        let y = if keep { above } else { !above };
        samples.push(Sample { x: vec![x], a: Some(a), y });
    }
    Dataset::new(samples)
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub features: Vec<String>,
    pub sensitive: Option<String>,
    pub label: String,
}

enum ColumnKind {
    Numeric,
    /// Distinct category strings, sorted; one-hot encoded in this order.
    Categorical(Vec<String>),
}

/// Load an RFC-4180 style CSV with a header row.
///
/// Numeric feature columns pass through; columns with any non-numeric cell
/// are one-hot encoded by sorted category name, which keeps the encoding
/// reproducible across platforms. An empty cell in the sensitive column
/// marks the attribute as missing for that row. Row numbers in errors are
/// 1-based data rows (the header is row 0).
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let col_index = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };

    let feature_cols: Vec<usize> =
        schema.features.iter().map(|f| col_index(f)).collect::<Result<_, _>>()?;
    let label_col = col_index(&schema.label)?;
    let sensitive_col = match &schema.sensitive {
        Some(name) => Some(col_index(name)?),
        None => None,
    };

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for record in reader.records() {
        rows.push(record?);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }

    // First pass: classify each feature column. A column is numeric when
    // every cell parses as a float (non-finite values stay numeric and are
    // rejected per row below); otherwise it is categorical.
    let mut kinds = Vec::with_capacity(feature_cols.len());
    for &col in &feature_cols {
        let mut numeric = true;
        let mut categories = BTreeSet::new();
        for row in &rows {
            let cell = row.get(col).unwrap_or("");
            if cell.trim().parse::<f64>().is_err() {
                numeric = false;
            }
            categories.insert(cell.trim().to_string());
        }
        if numeric {
            kinds.push(ColumnKind::Numeric);
        } else {
            kinds.push(ColumnKind::Categorical(categories.into_iter().collect()));
        }
    }

    let mut samples = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let rownum = i + 1;
        let mut x = Vec::new();
        for (&col, kind) in feature_cols.iter().zip(&kinds) {
            let cell = row.get(col).unwrap_or("").trim();
            match kind {
                ColumnKind::Numeric => {
                    let v: f64 = cell.parse().map_err(|_| DataError::Row {
                        row: rownum,
                        message: format!("unparseable numeric '{cell}'"),
                    })?;
                    if !v.is_finite() {
                        return Err(DataError::Row {
                            row: rownum,
                            message: format!("non-finite feature value '{cell}'"),
                        });
                    }
                    x.push(v);
                }
                ColumnKind::Categorical(cats) => {
                    for cat in cats {
                        x.push(if cat == cell { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        let a = match sensitive_col {
            None => None,
            Some(col) => {
                let cell = row.get(col).unwrap_or("").trim();
                if cell.is_empty() {
                    None
                } else {
                    Some(parse_binary(cell).ok_or_else(|| DataError::Row {
                        row: rownum,
                        message: format!("sensitive value '{cell}' is not binary"),
                    })?)
                }
            }
        };
        let label_cell = row.get(label_col).unwrap_or("").trim();
        let y = parse_binary(label_cell).ok_or_else(|| DataError::Row {
            row: rownum,
            message: format!("label value '{label_cell}' is not binary"),
        })?;
        samples.push(Sample { x, a, y });
    }
    Dataset::new(samples)
}

fn parse_binary(cell: &str) -> Option<bool> {
    match cell {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

/// Write a dataset as CSV with header `f1..fd,sens,label`; missing sensitive
/// attributes become empty cells. Inverse of `load_csv` under the same schema.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=data.feature_dim()).map(|i| format!("f{i}")).collect();
    header.push("sens".into());
    header.push("label".into());
    writer.write_record(&header)?;
    for s in data.samples() {
        let mut row: Vec<String> = s.x.iter().map(|v| format!("{v}")).collect();
        row.push(match s.a {
            Some(true) => "1".into(),
            Some(false) => "0".into(),
            None => String::new(),
        });
        row.push(if s.y { "1".into() } else { "0".into() });
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Deterministic three-way partition into (train, cal, test).
///
/// Cal and test sizes are `round(fraction · N)`; rounding remainder goes to
/// the training split. The permutation is a Fisher-Yates shuffle of row
/// indices seeded by `seed`.
pub fn split(
    data: &Dataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset), DataError> {
    let (ft, fc, fe) = fractions;
    let in_range = |f: f64| f > 0.0 && f < 1.0;
    if !in_range(ft) || !in_range(fc) || !in_range(fe) || (ft + fc + fe - 1.0).abs() > 1e-9 {
        return Err(DataError::BadFractions(ft, fc, fe));
    }
    let n = data.len();
    let n_cal = (fc * n as f64).round() as usize;
    let n_test = (fe * n as f64).round() as usize;
    if n_cal + n_test >= n || n_cal == 0 || n_test == 0 {
        return Err(DataError::BadFractions(ft, fc, fe));
    }
    let n_train = n - n_cal - n_test;

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }

    let train = data.subset(&indices[..n_train])?;
    let cal = data.subset(&indices[n_train..n_train + n_cal])?;
    let test = data.subset(&indices[n_train + n_cal..])?;
    Ok((train, cal, test))
}

/// Per-feature affine transform fitted on a training split: zero mean, unit
/// variance. Indicator columns (every training value 0 or 1, e.g. one-hot
/// encodings) and constant columns pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Self {
        let d = train.feature_dim();
        let n = train.len() as f64;
        let mut mean = vec![0.0; d];
        let mut binary = vec![true; d];
        for s in train.samples() {
            for (j, v) in s.x.iter().enumerate() {
                mean[j] += v;
                if *v != 0.0 && *v != 1.0 {
                    binary[j] = false;
                }
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for s in train.samples() {
            for ((v, m), acc) in s.x.iter().zip(&mean).zip(var.iter_mut()) {
                *acc += (v - m) * (v - m);
            }
        }
        for j in 0..d {
            if binary[j] {
                mean[j] = 0.0;
            }
        }
        let sd = var
            .into_iter()
            .zip(&binary)
            .map(|(v, &is_binary)| {
                let s = (v / n).sqrt();
                if is_binary || s <= 1e-12 {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Self { mean, sd }
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset, DataError> {
        let samples = data
            .samples()
            .iter()
            .map(|s| Sample {
                x: s
                    .x
                    .iter()
                    .zip(self.mean.iter().zip(&self.sd))
                    .map(|(v, (m, sd))| (v - m) / sd)
                    .collect(),
                a: s.a,
                y: s.y,
            })
            .collect();
        Dataset::new(samples)
    }

    /// Identity transform for `dim` features.
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], sd: vec![1.0; dim] }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let with_attr = self.samples.iter().filter(|s| s.a.is_some()).count();
        let positives = self.samples.iter().filter(|s| s.y).count();
        write!(
            f,
            "{} rows, {} features, {} with sensitive attribute, {} positive labels",
            self.len(),
            self.feature_dim,
            with_attr,
            positives
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn schema() -> CsvSchema {
        CsvSchema {
            features: vec!["f1".into(), "f2".into()],
            sensitive: Some("sens".into()),
            label: "label".into(),
        }
    }

    #[test]
    fn synthetic_noiseless_labels() {
        let config = SyntheticConfig {
            label_flip_keep: 1.0,
            seed: 3,
            ..SyntheticConfig::default()
        };
        let data = generate_synthetic(&config, 1000).unwrap();
        for s in data.samples() {
            assert_eq!(s.y, s.x[0] > 0.5);
        }
    }

    #[test]
    fn synthetic_degenerate_noise() {
        let config = SyntheticConfig {
            noise_sd: 1e-9,
            seed: 5,
            ..SyntheticConfig::default()
        };
        let data = generate_synthetic(&config, 1000).unwrap();
        for s in data.samples() {
            if s.a == Some(true) {
                assert!((s.x[0] - 1.0).abs() < 1e-6);
            } else {
                assert!(s.x[0].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn synthetic_large_sample_rates() {
        // Monte Carlo oracle for the stated mechanism: empirical P(A=1) and
        // P(Y=1 | X>0.5) approach 0.5 and 0.9.
        let data = generate_synthetic(&SyntheticConfig::with_seed(11), 1_000_000).unwrap();
        let n = data.len() as f64;
        let p_a = data.samples().iter().filter(|s| s.a == Some(true)).count() as f64 / n;
        assert!((p_a - 0.5).abs() < 0.002, "P(A=1) = {p_a}");
        let above: Vec<_> = data.samples().iter().filter(|s| s.x[0] > 0.5).collect();
        let p_y = above.iter().filter(|s| s.y).count() as f64 / above.len() as f64;
        assert!((p_y - 0.9).abs() < 0.002, "P(Y=1|X>0.5) = {p_y}");
    }

    #[test]
    fn synthetic_group_means() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(17), 100_000).unwrap();
        for group in [false, true] {
            let xs: Vec<f64> = data
                .samples()
                .iter()
                .filter(|s| s.a == Some(group))
                .map(|s| s.x[0])
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let target = if group { 1.0 } else { 0.0 };
            let tol = 4.0 * (0.2 / (xs.len() as f64).sqrt());
            assert!((mean - target).abs() < tol, "group {group} mean {mean}");
        }
    }

    #[test]
    fn synthetic_deterministic() {
        let config = SyntheticConfig::with_seed(23);
        let a = generate_synthetic(&config, 500).unwrap();
        let b = generate_synthetic(&config, 500).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn synthetic_rejects_bad_config() {
        let config = SyntheticConfig { noise_sd: 0.0, ..SyntheticConfig::default() };
        assert!(generate_synthetic(&config, 10).is_err());
        let config = SyntheticConfig { group_prob: 1.5, ..SyntheticConfig::default() };
        assert!(generate_synthetic(&config, 10).is_err());
    }

    #[test]
    fn csv_round_trip_shape() {
        let file = write_temp("f1,f2,sens,label\n0.5,1.0,0,1\n1.5,2.0,1,0\n2.5,3.0,0,1\n3.5,4.0,1,0\n");
        let data = load_csv(file.path(), &schema()).unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(data.feature_dim(), 2);
        assert_eq!(data.samples()[0].a, Some(false));
        assert!(data.samples()[0].y);
    }

    #[test]
    fn csv_empty_sensitive_cell_is_missing() {
        let file = write_temp("f1,f2,sens,label\n0.5,1.0,0,1\n1.5,2.0,1,0\n2.5,3.0,,1\n");
        let data = load_csv(file.path(), &schema()).unwrap();
        assert_eq!(data.samples()[2].a, None);
        assert_eq!(data.samples()[1].a, Some(true));
    }

    #[test]
    fn csv_nonbinary_label_names_row() {
        let file = write_temp("f1,f2,sens,label\n0.5,1.0,0,1\n1.5,2.0,1,2\n");
        let err = load_csv(file.path(), &schema()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("label"), "{msg}");
    }

    #[test]
    fn csv_missing_column() {
        let file = write_temp("f1,sens,label\n0.5,0,1\n");
        let err = load_csv(file.path(), &schema()).unwrap_err();
        assert!(matches!(err, DataError::MissingColumn(ref c) if c == "f2"));
    }

    #[test]
    fn csv_one_hot_sorted() {
        let file = write_temp("f1,f2,sens,label\nred,1.0,0,1\nblue,2.0,1,0\ngreen,3.0,0,1\n");
        let data = load_csv(file.path(), &schema()).unwrap();
        // categories sorted: blue, green, red
        assert_eq!(data.feature_dim(), 4);
        assert_eq!(&data.samples()[0].x[..3], &[0.0, 0.0, 1.0]);
        assert_eq!(&data.samples()[1].x[..3], &[1.0, 0.0, 0.0]);
        assert_eq!(&data.samples()[2].x[..3], &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn csv_non_finite_numeric_rejected() {
        let file = write_temp("f1,f2,sens,label\ninf,1.0,0,1\n2.0,2.0,1,0\n");
        // "inf" parses as f64 but is not finite, so the column is numeric
        // and row 1 must be rejected.
        let err = load_csv(file.path(), &schema()).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn csv_write_then_load() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(2), 50).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synth.csv");
        write_csv(&data, &path).unwrap();
        let loaded = load_csv(
            &path,
            &CsvSchema {
                features: vec!["f1".into()],
                sensitive: Some("sens".into()),
                label: "label".into(),
            },
        )
        .unwrap();
        assert_eq!(data, loaded);
    }

    #[test]
    fn split_sizes_and_partition() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(1), 100).unwrap();
        let (train, cal, test) = split(&data, (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(cal.len(), 10);
        assert_eq!(test.len(), 10);

        // Union of splits equals the input multiset.
        let mut all: Vec<String> = train
            .samples()
            .iter()
            .chain(cal.samples())
            .chain(test.samples())
            .map(|s| format!("{s:?}"))
            .collect();
        let mut orig: Vec<String> = data.samples().iter().map(|s| format!("{s:?}")).collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_deterministic() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(1), 200).unwrap();
        let a = split(&data, (0.6, 0.2, 0.2), 9).unwrap();
        let b = split(&data, (0.6, 0.2, 0.2), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_seed_changes_partition() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(1), 1000).unwrap();
        let (a, _, _) = split(&data, (0.6, 0.2, 0.2), 1).unwrap();
        let (b, _, _) = split(&data, (0.6, 0.2, 0.2), 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(1), 100).unwrap();
        assert!(split(&data, (1.0, 0.0, 0.0), 1).is_err());
        assert!(split(&data, (0.5, 0.3, 0.3), 1).is_err());
    }

    #[test]
    fn standardizer_zero_mean_unit_variance() {
        let data = generate_synthetic(&SyntheticConfig::with_seed(4), 5000).unwrap();
        let scaler = Standardizer::fit(&data);
        let scaled = scaler.apply(&data).unwrap();
        let n = scaled.len() as f64;
        let mean: f64 = scaled.samples().iter().map(|s| s.x[0]).sum::<f64>() / n;
        let var: f64 = scaled.samples().iter().map(|s| s.x[0] * s.x[0]).sum::<f64>() / n;
        assert!(mean.abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-10);
    }

    #[test]
    fn standardizer_leaves_indicator_columns_alone() {
        let samples = (0..40)
            .map(|i| Sample {
                x: vec![i as f64, (i % 2) as f64],
                a: Some(i % 2 == 0),
                y: i % 3 == 0,
            })
            .collect();
        let data = Dataset::new(samples).unwrap();
        let scaler = Standardizer::fit(&data);
        let scaled = scaler.apply(&data).unwrap();
        for (before, after) in data.samples().iter().zip(scaled.samples()) {
            assert_eq!(before.x[1], after.x[1], "one-hot column rescaled");
        }
        assert_ne!(data.samples()[1].x[0], scaled.samples()[1].x[0]);
    }
}
