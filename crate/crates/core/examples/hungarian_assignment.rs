//! Optimal, gated assignment of predicted track positions to detections.
//!
//! cargo run --example hungarian_assignment

use roadwatch::tracking::{assign, cost_matrix};

fn main() {
    let predictions = [[100.0, 100.0], [300.0, 120.0], [600.0, 400.0]];
    let detections = [[305.0, 118.0], [104.0, 97.0], [900.0, 50.0], [140.0, 100.0]];

    let costs = cost_matrix(&predictions, &detections);
    for r in 0..costs.rows() {
        let row: Vec<String> = (0..costs.cols())
            .map(|c| format!("{:7.1}", costs.get(r, c)))
            .collect();
        println!("track {r}: {}", row.join(" "));
    }

    let a = assign(&costs, 75.0);
    for &(t, d) in &a.matches {
        println!("track {t} <- detection {d} ({:.1} px)", costs.get(t, d));
    }
    println!("unmatched tracks:     {:?}", a.unmatched_tracks);
    println!("unmatched detections: {:?}", a.unmatched_detections);
    println!("total cost {:.2}", a.total_cost(&costs));
}
