//! Uncertainty-aware auditing: each baseline gets a best-case and a
//! worst-case trade-off corner; a verdict is only issued when even the
//! favorable corner cannot rescue it.
//!
//! ```bash
//! cargo run --release --example audit_baselines
//! ```

use fairband::ci_mean::CiMethod;
use fairband::data::{generate_synthetic, split, SyntheticConfig};
use fairband::metrics::FairnessMetric;
use fairband::model::{log_spaced, sweep, train_yoto, TrainConfig};
use fairband::tradeoff::{
    baseline_region, lower_band, monotonize, upper_band, CiOptions,
};

fn main() {
    let metric = FairnessMetric::DemographicParity;
    let alpha = 0.05;
    // wider group overlap makes unfair baselines land mid-curve, where
    // the audit has certified upper bounds to compare against
    let config = SyntheticConfig { noise_sd: 0.8, seed: 2, ..Default::default() };
    let data = generate_synthetic(&config, 8000).unwrap();
    let (train, val, cal) = split(&data, (0.7, 0.1, 0.2), 5).unwrap();

    println!("training the conditional model ...");
    let yoto = train_yoto(&train, &val, &TrainConfig { seed: 9, ..TrainConfig::default() })
        .unwrap();
    let grid = log_spaced(1e-6, 10.0, 25);
    let opts = CiOptions::new(CiMethod::Hoeffding);
    let curve = sweep(&yoto, &grid, &cal, metric, 0.0).unwrap();
    let upper = upper_band(&yoto, &grid, &cal, metric, alpha, &opts).unwrap();
    let lower = lower_band(&yoto, &grid, &cal, metric, alpha, 0.0, &opts).unwrap();
    let band = monotonize(&upper, &lower, alpha, 0.0, curve);

    let a: Vec<bool> = cal.samples().iter().map(|s| s.a.unwrap()).collect();
    let y = cal.labels();
    let baselines: Vec<(&str, Vec<bool>)> = vec![
        ("threshold 0.7", cal.samples().iter().map(|s| s.x[0] > 0.7).collect()),
        ("threshold 1.2", cal.samples().iter().map(|s| s.x[0] > 1.2).collect()),
        ("predict group", a.clone()),
        ("always accept", vec![true; cal.len()]),
    ];

    println!(
        "\n{:<15} {:>7} {:>7}  {:<12} {:>18} {:>18}  verdict",
        "baseline", "acc", "viol", "region", "best (acc, viol)", "worst (acc, viol)"
    );
    for (name, preds) in &baselines {
        match baseline_region(metric, preds, &a, &y, alpha, &band, &opts) {
            Ok(audit) => println!(
                "{:<15} {:>7.4} {:>7.4}  {:<12} ({:>7.4}, {:>6.4}) ({:>7.4}, {:>6.4})  {} at {:.2}",
                name,
                audit.plug_in.accuracy,
                audit.plug_in.violation,
                audit.plug_in_region.to_string(),
                audit.region.best_case.accuracy,
                audit.region.best_case.violation,
                audit.region.worst_case.accuracy,
                audit.region.worst_case.violation,
                audit.verdict,
                audit.confidence,
            ),
            Err(e) => println!("{name:<15} audit failed: {e}"),
        }
    }
}
