//! A small random-matrix study: mean expected-accuracy gain and accuracy gain
//! for each pair of reference and source ambiguity bins.
//!
//! ```text
//! cargo run --release --example simulate_trends -- 7
//! ```

use can_core::simulation::{run_grid, SimulationConfig};

fn main() -> can_core::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = SimulationConfig {
        m_values: vec![2, 3, 5, 10],
        trials: 20,
        n: 50,
        alphas: vec![0.5, 1.0, 2.0],
        seed,
        ..SimulationConfig::default()
    };
    let report = run_grid(&cfg)?;
    println!("rng: {}", report.rng_algorithm);
    println!(
        "{:<12} {:<12} {:>10} {:>10} {:>6}",
        "A0 bin", "b0 bin", "delta", "Delta", "n"
    );
    for cell in report.summary() {
        println!(
            "{:<12} {:<12} {:>10.4} {:>10.4} {:>6}",
            cell.interval_a.label(),
            cell.interval_b.label(),
            cell.mean_delta,
            cell.mean_accuracy_gain,
            cell.count
        );
    }
    let spread_a = report.spread_across_reference_bins(|c| c.mean_delta);
    let spread_b = report.spread_across_source_bins(|c| c.mean_delta);
    println!("largest spread across A0 bins {spread_a:.4}, across b0 bins {spread_b:.4}");
    report.write_summary_csv(std::io::stdout())?;
    Ok(())
}
