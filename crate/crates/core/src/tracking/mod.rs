//! Motion-only multi-object tracking: constant-velocity Kalman prediction,
//! Euclidean-cost Hungarian assignment, and a tentative / active / terminated
//! track lifecycle. One [`Tracker`] per camera stream.

pub mod assignment;
pub mod kalman;
mod tracker;

use thiserror::Error;

use crate::detection_io::Camera;

pub use assignment::{assign, cost_matrix, Assignment, CostMatrix};
pub use kalman::{predict, update, KalmanState};
pub use tracker::{
    write_event_log, EventKind, StepOutcome, Track, TrackStatus, Tracker, TrackerConfig,
    TrackerEvent, DEFAULT_GATE, REFERENCE_FRAME_WIDTH,
};

#[derive(Debug, Error, PartialEq)]
pub enum TrackingError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("non-finite observation {0:?}")]
    NonFiniteObservation([f64; 2]),
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("invalid tracker config: {0}")]
    InvalidConfig(String),
    #[error("frame timestamp {current} does not follow {previous}")]
    StreamOrder { previous: f64, current: f64 },
    #[error("tracker for {expected} camera got a {got} frame")]
    CameraMismatch { expected: Camera, got: Camera },
}
