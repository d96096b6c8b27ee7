use std::fmt;
use std::io::Write;

use crate::detection_io::{Camera, FrameDetections, ObjectClass, NUM_CLASSES};

use super::assignment::{assign, cost_matrix};
use super::kalman::{self, KalmanState};
use super::TrackingError;

/// Frame width the default gate is calibrated for.
pub const REFERENCE_FRAME_WIDTH: f64 = 1280.0;
/// Default gate in pixels at [`REFERENCE_FRAME_WIDTH`].
pub const DEFAULT_GATE: f64 = 75.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Largest assignable centre distance, pixels.
    pub gate_distance: f64,
    /// Consecutive hits that confirm a tentative track.
    pub confirm_hits: u32,
    /// Consecutive misses that terminate an active track.
    pub max_misses: u32,
    /// White-acceleration variance scale, px^2/s^4.
    pub process_noise: f64,
    /// Per-axis measurement variance, px^2.
    pub measurement_noise: f64,
    /// Velocity variance of a freshly spawned track, (px/s)^2.
    pub initial_velocity_variance: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            gate_distance: DEFAULT_GATE,
            confirm_hits: 2,
            max_misses: 3,
            process_noise: 10.0,
            measurement_noise: 4.0,
            initial_velocity_variance: 100.0,
        }
    }
}

impl TrackerConfig {
    /// Defaults with the gate scaled to the given frame width.
    pub fn for_frame_width(width: f64) -> Self {
        Self {
            gate_distance: DEFAULT_GATE * width / REFERENCE_FRAME_WIDTH,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrackingError> {
        let bad = |msg: String| Err(TrackingError::InvalidConfig(msg));
        if !(self.gate_distance > 0.0) {
            return bad(format!(
                "gate_distance must be > 0, got {}",
                self.gate_distance
            ));
        }
        if self.confirm_hits < 1 {
            return bad("confirm_hits must be >= 1".into());
        }
        if self.max_misses < 1 {
            return bad("max_misses must be >= 1".into());
        }
        if !(self.process_noise >= 0.0 && self.process_noise.is_finite()) {
            return bad(format!(
                "process_noise must be >= 0, got {}",
                self.process_noise
            ));
        }
        if !(self.measurement_noise > 0.0 && self.measurement_noise.is_finite()) {
            return bad(format!(
                "measurement_noise must be > 0, got {}",
                self.measurement_noise
            ));
        }
        if !(self.initial_velocity_variance >= 0.0 && self.initial_velocity_variance.is_finite()) {
            return bad(format!(
                "initial_velocity_variance must be >= 0, got {}",
                self.initial_velocity_variance
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Active,
    Terminated,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub state: KalmanState,
    pub status: TrackStatus,
    pub consecutive_hits: u32,
    pub consecutive_misses: u32,
    /// `(frame_index, assigned centre)` in arrival order.
    pub history: Vec<(u64, [f64; 2])>,
    pub created_at: f64,
    pub confirmed_at: Option<f64>,
    class_votes: [u32; NUM_CLASSES],
    last_class: ObjectClass,
}

impl Track {
    /// Majority class of the assigned detections; ties go to the most recent.
    pub fn class(&self) -> ObjectClass {
        let top = *self.class_votes.iter().max().unwrap_or(&0);
        if self.class_votes[self.last_class.index()] == top {
            return self.last_class;
        }
        ObjectClass::ALL
            .into_iter()
            .find(|c| self.class_votes[c.index()] == top)
            .unwrap_or(self.last_class)
    }

    fn record(&mut self, frame_index: u64, center: [f64; 2], class: ObjectClass) {
        self.history.push((frame_index, center));
        self.class_votes[class.index()] += 1;
        self.last_class = class;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    NewVehicle,
    TrackTerminated,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::NewVehicle => "new_vehicle",
            EventKind::TrackTerminated => "track_terminated",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerEvent {
    pub kind: EventKind,
    pub track_id: u64,
    pub timestamp: f64,
    pub camera: Camera,
    pub class: ObjectClass,
}

impl TrackerEvent {
    /// Canonical event-log line, without the trailing newline.
    pub fn to_log_line(&self) -> String {
        format!(
            "{{\"kind\":\"{}\",\"track_id\":{},\"t\":{:.3},\"camera\":\"{}\",\"cls\":\"{}\"}}",
            self.kind, self.track_id, self.timestamp, self.camera, self.class
        )
    }
}

pub fn write_event_log<'a, W, I>(events: I, sink: &mut W) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TrackerEvent>,
{
    for e in events {
        writeln!(sink, "{}", e.to_log_line())?;
    }
    Ok(())
}

/// What one frame did to the tracker.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    pub events: Vec<TrackerEvent>,
    /// For each detection of the frame, the track that absorbed it.
    pub assignments: Vec<u64>,
}

/// Online tracker for one camera stream.
#[derive(Debug, Clone)]
pub struct Tracker {
    camera: Camera,
    config: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u64,
    last_timestamp: Option<f64>,
    terminated: u64,
}

impl Tracker {
    pub fn new(camera: Camera, config: TrackerConfig) -> Result<Self, TrackingError> {
        config.validate()?;
        Ok(Self {
            camera,
            config,
            tracks: Vec::new(),
            next_id: 1,
            last_timestamp: None,
            terminated: 0,
        })
    }

    pub fn camera(&self) -> Camera {
        self.camera
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Live (tentative or active) tracks in creation order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn terminated_count(&self) -> u64 {
        self.terminated
    }

    /// Advances the tracker by one frame.
    pub fn step(&mut self, frame: &FrameDetections) -> Result<StepOutcome, TrackingError> {
        if frame.camera != self.camera {
            return Err(TrackingError::CameraMismatch {
                expected: self.camera,
                got: frame.camera,
            });
        }
        let now = frame.timestamp;
        if let Some(previous) = self.last_timestamp {
            if !(now > previous) {
                return Err(TrackingError::StreamOrder {
                    previous,
                    current: now,
                });
            }
            let dt = now - previous;
            for track in &mut self.tracks {
                track.state = kalman::predict(&track.state, dt, self.config.process_noise)?;
            }
        }
        self.last_timestamp = Some(now);

        let cfg = self.config;
        let predicted: Vec<[f64; 2]> = self.tracks.iter().map(|t| t.state.position()).collect();
        let centers: Vec<[f64; 2]> = frame.detections.iter().map(|d| d.center).collect();
        let assignment = assign(&cost_matrix(&predicted, &centers), cfg.gate_distance);

        let mut outcome = StepOutcome {
            events: Vec::new(),
            assignments: vec![0; frame.detections.len()],
        };

        for &(ti, di) in &assignment.matches {
            let det = &frame.detections[di];
            let track = &mut self.tracks[ti];
            track.state = kalman::update(&track.state, det.center, cfg.measurement_noise)?;
            track.record(frame.frame_index, det.center, det.best_class);
            track.consecutive_hits += 1;
            track.consecutive_misses = 0;
            outcome.assignments[di] = track.id;
            if track.status == TrackStatus::Tentative && track.consecutive_hits >= cfg.confirm_hits
            {
                track.status = TrackStatus::Active;
                track.confirmed_at = Some(now);
                outcome
                    .events
                    .push(self.event(EventKind::NewVehicle, ti, now));
            }
        }

        for &ti in &assignment.unmatched_tracks {
            let track = &mut self.tracks[ti];
            track.consecutive_hits = 0;
            track.consecutive_misses += 1;
            match track.status {
                TrackStatus::Tentative => track.status = TrackStatus::Terminated,
                TrackStatus::Active if track.consecutive_misses >= cfg.max_misses => {
                    track.status = TrackStatus::Terminated;
                    outcome
                        .events
                        .push(self.event(EventKind::TrackTerminated, ti, now));
                }
                _ => {}
            }
        }
        let before = self.tracks.len();
        self.tracks.retain(|t| t.status != TrackStatus::Terminated);
        self.terminated += (before - self.tracks.len()) as u64;

        for &di in &assignment.unmatched_detections {
            let det = &frame.detections[di];
            let id = self.next_id;
            self.next_id += 1;
            let mut track = Track {
                id,
                state: KalmanState::at_rest(
                    det.center,
                    cfg.measurement_noise,
                    cfg.initial_velocity_variance,
                ),
                status: TrackStatus::Tentative,
                consecutive_hits: 1,
                consecutive_misses: 0,
                history: Vec::new(),
                created_at: now,
                confirmed_at: None,
                class_votes: [0; NUM_CLASSES],
                last_class: det.best_class,
            };
            track.record(frame.frame_index, det.center, det.best_class);
            outcome.assignments[di] = id;
            let confirmed = cfg.confirm_hits <= 1;
            if confirmed {
                track.status = TrackStatus::Active;
                track.confirmed_at = Some(now);
            }
            self.tracks.push(track);
            if confirmed {
                outcome
                    .events
                    .push(self.event(EventKind::NewVehicle, self.tracks.len() - 1, now));
            }
        }
        Ok(outcome)
    }

    fn event(&self, kind: EventKind, index: usize, timestamp: f64) -> TrackerEvent {
        let track = &self.tracks[index];
        TrackerEvent {
            kind,
            track_id: track.id,
            timestamp,
            camera: self.camera,
            class: track.class(),
        }
    }
}
