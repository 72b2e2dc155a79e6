//! Conditioning one model on λ versus training one model per λ: the two
//! routes land on the same trade-offs, at a fraction of the cost.
//!
//! ```bash
//! cargo run --release --example yoto_vs_separate
//! ```

use fairband::data::{generate_synthetic, split, SyntheticConfig};
use fairband::metrics::FairnessMetric;
use fairband::model::{sweep, train_separate, train_yoto, TrainConfig};

fn main() {
    let metric = FairnessMetric::DemographicParity;
    let data = generate_synthetic(&SyntheticConfig::with_seed(1), 6250).unwrap();
    let (train, val, _) = split(&data, (0.8, 0.1, 0.1), 7).unwrap();
    let test = generate_synthetic(&SyntheticConfig::with_seed(99), 10_000).unwrap();
    let config = TrainConfig { seed: 3, ..TrainConfig::default() };

    let t0 = std::time::Instant::now();
    let yoto = train_yoto(&train, &val, &config).unwrap();
    let yoto_time = t0.elapsed();

    let lambdas = [1e-3, 0.05, 0.4, 1.0, 3.0, 10.0];
    let yoto_points = sweep(&yoto, &lambdas, &test, metric, 0.0).unwrap();

    println!(
        "{:>8} | {:>8} {:>8} | {:>8} {:>8}",
        "lambda", "cond.acc", "cond.dp", "sep.acc", "sep.dp"
    );
    let t1 = std::time::Instant::now();
    for (k, &lambda) in lambdas.iter().enumerate() {
        let sep = train_separate(&train, &val, lambda, &config).unwrap();
        let sp = sep.evaluate_at(lambda, &test, metric, 0.0).unwrap();
        println!(
            "{:>8.3} | {:>8.4} {:>8.4} | {:>8.4} {:>8.4}",
            lambda, yoto_points[k].accuracy, yoto_points[k].violation, sp.accuracy, sp.violation
        );
    }
    let separate_time = t1.elapsed();
    println!(
        "\none conditional training: {yoto_time:?}; {} separate trainings: {separate_time:?}",
        lambdas.len()
    );
    println!("(around lambda 1 the regularized optimum itself jumps between the");
    println!("sharp and the constant classifier, so both routes are unstable there)");
}
