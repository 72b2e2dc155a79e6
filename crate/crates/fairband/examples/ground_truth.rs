//! The synthetic oracle: closed-form trade-offs of the threshold family,
//! cross-checked against a large Monte Carlo draw, with the optimal curve
//! τ*(ψ) derived as the lower envelope. Writes the curve to a CSV.
//!
//! ```bash
//! cargo run --release --example ground_truth
//! ```

use fairband::data::SyntheticConfig;
use fairband::metrics::FairnessMetric;
use fairband::oracle::{
    analytic_point, curve_to_csv, ground_truth_curve, threshold_grid, CurveSource,
};

fn main() {
    let config = SyntheticConfig::default();
    let metric = FairnessMetric::DemographicParity;

    let (acc, dp) = analytic_point(metric, 0.5, &config).unwrap();
    println!("threshold at the label boundary 0.5: accuracy {acc:.6}, violation {dp:.6}");

    let grid = threshold_grid(-3.0, 3.0, 121);
    let analytic = ground_truth_curve(metric, &grid, &config, CurveSource::Analytic).unwrap();
    let mc = ground_truth_curve(
        metric,
        &grid,
        &config,
        CurveSource::MonteCarlo { n: 500_000, seed: 7 },
    )
    .unwrap();
    let max_gap = analytic
        .points
        .iter()
        .zip(&mc.points)
        .map(|(a, m)| (a.accuracy - m.accuracy).abs().max((a.violation - m.violation).abs()))
        .fold(0.0f64, f64::max);
    println!("closed form vs 500k-sample Monte Carlo: max discrepancy {max_gap:.5}");

    println!("\noptimal curve tau*(psi) = min violation at accuracy >= psi:");
    println!("{:>6} {:>9}", "psi", "tau*");
    for i in 0..=10 {
        let psi = 0.5 + 0.045 * i as f64;
        println!("{:>6.3} {:>9.5}", psi, analytic.tau_star(psi));
    }
    println!("(psi above {:.4} is unattainable: tau* = 1)", analytic.max_accuracy());

    let out = std::env::temp_dir().join("ground_truth_curve.csv");
    curve_to_csv(&analytic, &out).unwrap();
    println!("\nwrote the threshold-family curve to {}", out.display());
}
