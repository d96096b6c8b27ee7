//! Two per-camera trackers feeding one serialized flow check.
//!
//! Frames must arrive merged by timestamp, front before rear on equal
//! timestamps; [`merge_streams`] produces that order. Simulation and replay
//! both drive this type, which is what makes their warning traces agree.

use thiserror::Error;

use crate::detection_io::{Camera, FrameDetections};
use crate::tracking::{EventKind, StepOutcome, Tracker, TrackerConfig, TrackingError};
use crate::warning::{Decision, FlowCheck, FlowCheckError};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Tracking(#[from] TrackingError),
    #[error(transparent)]
    FlowCheck(#[from] FlowCheckError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameOutcome {
    pub step: StepOutcome,
    /// One decision per new-vehicle event of this frame.
    pub decisions: Vec<Decision>,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    front: Tracker,
    rear: Tracker,
    flow: FlowCheck,
}

impl Pipeline {
    /// `start` is the data time the flow-check timer starts from.
    pub fn new(config: TrackerConfig, start: f64, t_duration: f64) -> Result<Self, PipelineError> {
        Ok(Self {
            front: Tracker::new(Camera::Front, config)?,
            rear: Tracker::new(Camera::Rear, config)?,
            flow: FlowCheck::new(start, t_duration)?,
        })
    }

    pub fn tracker(&self, camera: Camera) -> &Tracker {
        match camera {
            Camera::Front => &self.front,
            Camera::Rear => &self.rear,
        }
    }

    pub fn flow_check(&self) -> &FlowCheck {
        &self.flow
    }

    pub fn process(&mut self, frame: &FrameDetections) -> Result<FrameOutcome, PipelineError> {
        let tracker = match frame.camera {
            Camera::Front => &mut self.front,
            Camera::Rear => &mut self.rear,
        };
        let step = tracker.step(frame)?;
        let decisions = step
            .events
            .iter()
            .filter(|e| e.kind == EventKind::NewVehicle)
            .map(|e| self.flow.decide(e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FrameOutcome { step, decisions })
    }
}

/// Orders frames by timestamp, front before rear on ties, keeping per-camera
/// order otherwise.
pub fn merge_streams(mut frames: Vec<FrameDetections>) -> Vec<FrameDetections> {
    frames.sort_by(|a, b| {
        a.timestamp
            .total_cmp(&b.timestamp)
            .then(a.camera.cmp(&b.camera))
    });
    frames
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection_io::Detection;
    use crate::warning::Verdict;

    fn frame(camera: Camera, i: u64, t: f64, at: Option<(f64, f64)>) -> FrameDetections {
        FrameDetections {
            frame_index: i,
            timestamp: t,
            camera,
            detections: at
                .map(|(x, y)| {
                    Detection::new(i, [x, y], 20.0, 15.0, 0.95, [0.05, 0.9, 0.05]).unwrap()
                })
                .into_iter()
                .collect(),
        }
    }

    #[test]
    fn both_cameras_share_one_timer() {
        let mut p = Pipeline::new(TrackerConfig::default(), 0.0, 10.0).unwrap();
        // Rear vehicle confirmed at t = 12.1 warns, front one at 14 is suppressed.
        p.process(&frame(Camera::Rear, 0, 12.0, Some((100.0, 100.0))))
            .unwrap();
        let out = p
            .process(&frame(Camera::Rear, 1, 12.1, Some((100.0, 100.0))))
            .unwrap();
        assert!(matches!(out.decisions[0].verdict, Verdict::Warn(_)));
        p.process(&frame(Camera::Front, 0, 14.0, Some((300.0, 300.0))))
            .unwrap();
        let out = p
            .process(&frame(Camera::Front, 1, 14.1, Some((300.0, 300.0))))
            .unwrap();
        assert!(matches!(out.decisions[0].verdict, Verdict::Suppress { .. }));
    }

    #[test]
    fn merge_puts_front_first_on_ties() {
        let frames = vec![
            frame(Camera::Rear, 0, 0.0, None),
            frame(Camera::Rear, 1, 1.0, None),
            frame(Camera::Front, 0, 0.0, None),
            frame(Camera::Front, 1, 0.5, None),
        ];
        let merged = merge_streams(frames);
        let order: Vec<(Camera, f64)> = merged.iter().map(|f| (f.camera, f.timestamp)).collect();
        assert_eq!(
            order,
            vec![
                (Camera::Front, 0.0),
                (Camera::Rear, 0.0),
                (Camera::Front, 0.5),
                (Camera::Rear, 1.0)
            ]
        );
    }
}
