//! Dumps a simulated run as a detection log, replays the log through a fresh
//! pipeline, and checks that both produce the same warnings.
//!
//! cargo run --release --example replay_log

use roadwatch::detection_io::{parse_detection_log, write_frame, FrameDetections};
use roadwatch::simulation::{run_pipeline_with, RunObserver, Scenario};
use roadwatch::tracking::TrackerConfig;
use roadwatch::warning::Decision;
use roadwatch::{merge_streams, Pipeline};

#[derive(Default)]
struct Recorder {
    log: Vec<u8>,
    warnings: Vec<String>,
}

impl RunObserver for Recorder {
    fn on_frame(&mut self, frame: &FrameDetections) -> std::io::Result<()> {
        write_frame(frame, &mut self.log)
    }

    fn on_decision(&mut self, decision: &Decision) {
        if let Some(w) = decision.warning() {
            self.warnings.push(w.to_string());
        }
    }
}

fn main() {
    let mut scenario = Scenario::country_road();
    scenario.duration = 1800.0;
    let config = TrackerConfig::default();

    let mut recorder = Recorder::default();
    run_pipeline_with(&scenario, &config, 10.0, &mut recorder).unwrap();
    println!(
        "simulated: {} warnings, log of {} bytes",
        recorder.warnings.len(),
        recorder.log.len()
    );

    let frames = merge_streams(parse_detection_log(recorder.log.as_slice()).unwrap());
    let mut pipeline = Pipeline::new(config, frames[0].timestamp, 10.0).unwrap();
    let mut replayed = Vec::new();
    for frame in &frames {
        for d in pipeline.process(frame).unwrap().decisions {
            if let Some(w) = d.warning() {
                replayed.push(w.to_string());
            }
        }
    }
    println!("replayed:  {} warnings", replayed.len());
    for w in replayed.iter().take(5) {
        println!("  {w}");
    }
    assert_eq!(replayed, recorder.warnings);
    println!("traces identical");
}
