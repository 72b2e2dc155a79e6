//! Estimation and auditing of accuracy-fairness trade-off curves.
//!
//! The library trains a loss-conditional (FiLM) logistic-regression model whose
//! conditioning input is the fairness regularization weight λ, sweeps it over a
//! λ grid to trace an empirical trade-off curve, and builds confidence bands
//! around the optimal trade-off τ*(ψ) — the minimum fairness violation
//! achievable at accuracy ψ — from a held-out calibration set. A model's
//! empirical (accuracy, violation) pair can then be classified as
//! `Permissible`, `Suboptimal`, or `Unlikely` relative to the band.
//!
//! Modules:
//! - [`data`]: dataset type, CSV ingestion, splitting, synthetic generator
//! - [`metrics`]: fairness violations (DP / EOP / EO), surrogate losses
//! - [`model`]: FiLM-conditioned logistic regression, YOTO and fixed-λ training
//! - [`ci_mean`]: Hoeffding / Bernstein / CLT / bootstrap mean intervals
//! - [`ci_fairness`]: union-bound and subsampling intervals on a violation
//! - [`tradeoff`]: upper/lower bands, sensitivity analysis, region classification
//! - [`scarce`]: intervals when sensitive attributes are mostly missing
//! - [`oracle`]: analytic ground truth for the synthetic setup, brute-force checks
//! - [`cli`]: the `fairband` command-line pipeline
//!
//! The `examples/` directory contains one runnable walkthrough per capability;
//! start with `cargo run --example synthetic_band`.

pub mod ci_fairness;
pub mod ci_mean;
pub mod cli;
pub mod data;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod scarce;
pub mod tradeoff;

mod seed;

pub use ci_fairness::SignedInterval;
pub use ci_mean::{CiMethod, Interval, Side};
pub use data::{Dataset, Sample, SyntheticConfig};
pub use metrics::{FairnessMetric, SurrogateKind};
pub use model::{LinearFilmModel, TradeoffPoint, TrainConfig};
pub use tradeoff::{Region, TradeoffBand};
