//! End-to-end walkthrough: generate synthetic data, train the
//! loss-conditional model, calibrate the sub-optimality allowance against
//! two separately trained models, build a confidence band around the
//! optimal trade-off curve, and classify a few points against it.
//!
//! ```bash
//! cargo run --release --example synthetic_band
//! ```

use fairband::ci_mean::CiMethod;
use fairband::data::{generate_synthetic, split, SyntheticConfig};
use fairband::metrics::FairnessMetric;
use fairband::model::{log_spaced, sweep, train_separate, train_yoto, TradeoffPoint, TrainConfig};
use fairband::tradeoff::{
    classify, lower_band, monotonize, sensitivity_delta, upper_band, CiOptions,
};

fn main() {
    let metric = FairnessMetric::DemographicParity;
    let alpha = 0.05;

    println!("generating 8000 synthetic rows and splitting 70/15/15 ...");
    let data = generate_synthetic(&SyntheticConfig::with_seed(1), 8000).unwrap();
    let (train, val, cal) = split(&data, (0.70, 0.15, 0.15), 7).unwrap();

    println!("training the loss-conditional model ...");
    let config = TrainConfig { seed: 3, ..TrainConfig::default() };
    let yoto = train_yoto(&train, &val, &config).unwrap();

    println!("training two fixed-lambda comparison models ...");
    let mut comparisons: Vec<(String, Vec<TradeoffPoint>)> = Vec::new();
    for lambda in [0.05, 1.5] {
        let sep = train_separate(&train, &val, lambda, &config).unwrap();
        let point = sep.evaluate_at(lambda, &cal, metric, 0.0).unwrap();
        println!("  separate lambda {lambda}: accuracy {:.4}, violation {:.4}", point.accuracy, point.violation);
        comparisons.push((format!("separate-{lambda}"), vec![point]));
    }

    let grid = log_spaced(1e-6, 10.0, 25);
    let curve = sweep(&yoto, &grid, &cal, metric, 0.0).unwrap();
    let report = sensitivity_delta(&curve, &comparisons).unwrap();
    println!("sensitivity delta = {:.4} (contributing: {:?})", report.delta_hat, report.contributing_models);

    let opts = CiOptions::new(CiMethod::Hoeffding);
    let upper = upper_band(&yoto, &grid, &cal, metric, alpha, &opts).unwrap();
    let lower =
        lower_band(&yoto, &grid, &cal, metric, alpha, report.delta_hat, &opts).unwrap();
    let band = monotonize(&upper, &lower, alpha, report.delta_hat, curve);

    let (lo, hi) = band.grid_range().unwrap();
    println!("\nband over accuracy [{lo:.4}, {hi:.4}] at level {:.2}:", 1.0 - alpha);
    println!("{:>9} {:>8} {:>8}", "psi", "lower", "upper");
    for p in band.points.iter().step_by(band.points.len() / 12) {
        println!("{:>9.4} {:>8.4} {:>8.4}", p.psi, p.lower, p.upper);
    }

    println!("\nclassifying points against the band:");
    let probes = [
        ("the swept curve's middle point", band.yoto_curve[12]),
        ("a deliberately unfair point", TradeoffPoint {
            accuracy: (lo + hi) / 2.0,
            violation: 0.99,
            lambda: None,
        }),
        ("an implausibly fair point", TradeoffPoint {
            accuracy: hi - 0.01,
            violation: 0.0,
            lambda: None,
        }),
    ];
    for (label, point) in probes {
        match classify(&point, &band) {
            Ok(region) => println!(
                "  ({:.4}, {:.4}) {label}: {region}",
                point.accuracy, point.violation
            ),
            Err(e) => println!("  ({:.4}, {:.4}) {label}: {e}", point.accuracy, point.violation),
        }
    }
}
