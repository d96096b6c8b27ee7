//! Pre-warning time on an open road versus a site in a bend, where the
//! cameras only see the last 30 m.
//!
//! cargo run --release --example curve_occlusion

use roadwatch::simulation::{run_pipeline, Scenario, SimulationReport};
use roadwatch::tracking::TrackerConfig;

fn describe(name: &str, report: &SimulationReport) {
    let mut deltas: Vec<f64> = report.deltas().collect();
    deltas.sort_by(f64::total_cmp);
    let q = |p: f64| deltas[((deltas.len() - 1) as f64 * p) as usize];
    println!(
        "{name:<13} {} warnings, pre-warning min {:.2} s, median {:.2} s, max {:.2} s",
        deltas.len(),
        q(0.0),
        q(0.5),
        q(1.0)
    );
    for (bin, count) in report.histogram() {
        println!(
            "  {bin:>2}-{:<2} s {}",
            bin + 1,
            "#".repeat((count as usize).div_ceil(5))
        );
    }
}

fn main() {
    let config = TrackerConfig::default();
    for (name, scenario) in [
        ("country road", Scenario::country_road()),
        ("curve", Scenario::curve()),
    ] {
        describe(name, &run_pipeline(&scenario, &config, 10.0).unwrap());
    }
}
