//! Simulates the eight-hour `paper-day` scenario and prints the report with
//! and without the traffic-flow check.
//!
//! cargo run --release --example simulate_day [seed]

use roadwatch::simulation::{run_pipeline, Scenario};
use roadwatch::tracking::TrackerConfig;

fn main() {
    let mut scenario = Scenario::paper_day();
    if let Some(seed) = std::env::args().nth(1) {
        scenario.seed = seed.parse().expect("seed is an integer");
    }
    let config = TrackerConfig::for_frame_width(f64::from(scenario.camera.image_width));
    let report = run_pipeline(&scenario, &config, 10.0).unwrap();
    print!("{}", report.summary());

    let peak = report.peak_hour().unwrap();
    println!(
        "peak hour {}: {} vehicles identified, {} warnings ({:.2} per minute)",
        peak.hour,
        peak.without_filter,
        peak.with_filter,
        peak.with_filter as f64 / 60.0
    );
}
