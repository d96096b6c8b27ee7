//! Traffic and sensing simulator plus the evaluation harness that runs the
//! full pipeline over simulated streams and scores warnings against ground
//! truth.

mod render;
mod report;
mod scenario;
mod traffic;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::detection_io::{quantize, Camera, FrameDetections};
use crate::pipeline::{Pipeline, PipelineError};
use crate::tracking::TrackerConfig;
use crate::warning::{Decision, Verdict};

pub use render::{
    render_detections, DetectionRenderer, LabeledFrame, RenderedStreams, Tick,
    NOMINAL_CLASS_CONFIDENCE, NOMINAL_OBJECTNESS,
};
pub use report::{HourCount, SimulationReport, WarningRecord};
pub use scenario::{
    CameraModel, Direction, FieldError, NoiseModel, OcclusionWindow, RateSegment, Scenario,
};
pub use traffic::{generate_passes, VehiclePass};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("invalid scenario: {}", join(.0))]
    Invalid(Vec<FieldError>),
    #[error("malformed report: {0}")]
    Report(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

fn join(errs: &[FieldError]) -> String {
    errs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Stream tap for a simulation run.
pub trait RunObserver {
    /// Every rendered frame, in pipeline order.
    fn on_frame(&mut self, _frame: &FrameDetections) -> std::io::Result<()> {
        Ok(())
    }
    /// Every flow-check decision, in order.
    fn on_decision(&mut self, _decision: &Decision) {}
}

impl RunObserver for () {}

/// RNG for the traffic generator of a run.
pub fn traffic_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for the detection renderer of a run; independent of [`traffic_rng`].
pub fn render_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub fn run_pipeline(
    scenario: &Scenario,
    config: &TrackerConfig,
    t_duration: f64,
) -> Result<SimulationReport, SimulationError> {
    run_pipeline_with(scenario, config, t_duration, &mut ())
}

/// Simulates `scenario`, runs both trackers and the flow check over the
/// rendered streams, and scores every warning against ground truth.
///
/// The flow-check timer starts at t = 0. Each warning is attributed to the
/// vehicle labelled on most of its track's detections (lowest id on ties);
/// tracks whose majority label is a false positive count as spurious.
pub fn run_pipeline_with<O: RunObserver + ?Sized>(
    scenario: &Scenario,
    config: &TrackerConfig,
    t_duration: f64,
    observer: &mut O,
) -> Result<SimulationReport, SimulationError> {
    scenario.validate()?;
    let passes = generate_passes(scenario, &mut traffic_rng(scenario.seed));
    let mut pipeline = Pipeline::new(*config, 0.0, t_duration)?;

    let mut votes: BTreeMap<(Camera, u64), BTreeMap<Option<u64>, u64>> = BTreeMap::new();
    let mut decisions: Vec<Decision> = Vec::new();

    for tick in DetectionRenderer::new(&passes, scenario, render_rng(scenario.seed)) {
        for labeled in [&tick.front, &tick.rear] {
            observer
                .on_frame(&labeled.frame)
                .map_err(|e| SimulationError::Io(e.to_string()))?;
            let outcome = pipeline.process(&labeled.frame)?;
            for (&track, &label) in outcome.step.assignments.iter().zip(&labeled.labels) {
                *votes
                    .entry((labeled.frame.camera, track))
                    .or_default()
                    .entry(label)
                    .or_default() += 1;
            }
            for d in outcome.decisions {
                observer.on_decision(&d);
                decisions.push(d);
            }
        }
    }

    let mut report = SimulationReport::empty(scenario.duration);
    report.vehicles = passes.len() as u64;
    let hours = (scenario.duration / 3600.0).ceil().max(1.0) as u64;
    report.hourly = (0..hours)
        .map(|hour| HourCount {
            hour,
            without_filter: 0,
            with_filter: 0,
        })
        .collect();

    for d in &decisions {
        let warn = match d.verdict {
            Verdict::Ignore => continue,
            Verdict::Warn(_) => true,
            Verdict::Suppress { .. } => false,
        };
        let t = d.event.timestamp;
        let hour = ((t / 3600.0) as u64).min(hours - 1) as usize;
        report.warnings_without_filter += 1;
        report.hourly[hour].without_filter += 1;
        if !warn {
            continue;
        }
        report.warnings_with_filter += 1;
        report.hourly[hour].with_filter += 1;

        let vehicle = votes
            .get(&(d.event.camera, d.event.track_id))
            .and_then(|v| {
                v.iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .and_then(|(label, _)| *label)
            });
        let pass_time = vehicle.map(|id| passes[id as usize].pass_time);
        if vehicle.is_none() {
            report.spurious_warnings += 1;
        }
        report.records.push(WarningRecord {
            warn_time: quantize(t, 3),
            camera: d.event.camera,
            track_id: d.event.track_id,
            vehicle_id: vehicle,
            pass_time: pass_time.map(|p| quantize(p, 3)),
            delta: pass_time.map(|p| quantize(p - t, 3)),
        });
    }
    log::info!(
        "simulated {:.0} s: {} vehicles, {} new-vehicle events, {} warnings",
        scenario.duration,
        report.vehicles,
        report.warnings_without_filter,
        report.warnings_with_filter
    );
    Ok(report)
}
