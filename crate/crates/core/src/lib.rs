//! Vehicle tracking and worker warnings for short-term roadwork sites.
//!
//! Detector output becomes scored boxes in [`detection_io`] and per-camera
//! tracks in [`tracking`]. Each newly confirmed vehicle then passes the
//! traffic-flow check in [`warning`], which only alerts workers after a quiet
//! period. [`simulation`] scores the whole chain on synthetic traffic, and
//! [`cli`] is the command-line front end.
//!
//! The `examples/` directory has one runnable program per capability:
//!
//! | example | shows |
//! |---|---|
//! | `decode_grid` | turning a raw detector grid into detections |
//! | `kalman_filter` | predict/update of the motion model |
//! | `hungarian_assignment` | gated optimal assignment |
//! | `track_stream` | the tracker over a detection stream |
//! | `flow_check` | warn/suppress decisions |
//! | `simulate_day` | a full simulated working day and its report |
//! | `curve_occlusion` | pre-warning times on open road versus a bend |
//! | `replay_log` | dumping a simulation and replaying it |

pub mod cli;
pub mod detection_io;
pub mod pipeline;
pub mod simulation;
pub mod tracking;
pub mod warning;

pub use detection_io::{Camera, Detection, FrameDetections, ObjectClass};
pub use pipeline::{merge_streams, Pipeline, PipelineError};
pub use simulation::{run_pipeline, Scenario, SimulationReport};
pub use tracking::{Tracker, TrackerConfig, TrackerEvent};
pub use warning::{Decision, FlowCheck, Verdict, WarningEvent};
