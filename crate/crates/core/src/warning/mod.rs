//! Traffic flow check and worker warnings.
//!
//! Workers only need a warning when the road has been quiet: a newly
//! identified vehicle triggers a warning iff strictly more than
//! `t_duration` seconds have passed since the previous identified vehicle
//! (or since start-up for the first one). The timer restarts on every
//! identified vehicle, warned or not. Both cameras share one timer.

mod device;

use std::fmt;

use thiserror::Error;

use crate::detection_io::Camera;
use crate::tracking::{EventKind, TrackerEvent};

pub use device::{DeviceChannel, DeviceSpec, UdpDevice, WarningEmitter, WriterDevice};

/// Quiet time after which a new vehicle warns, seconds.
pub const DEFAULT_T_DURATION: f64 = 10.0;

#[derive(Debug, Error, PartialEq)]
pub enum FlowCheckError {
    #[error("T_duration must be positive, got {0}")]
    Config(f64),
    #[error("event at {event} is older than timer start {t_start}")]
    StreamOrder { t_start: f64, event: f64 },
    #[error("event {0} is not a warnable new-vehicle event")]
    NotWarnable(String),
}

/// Timer state of the flow check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowCheckState {
    t_start: f64,
    t_duration: f64,
}

impl FlowCheckState {
    pub fn init(now: f64, t_duration: f64) -> Result<Self, FlowCheckError> {
        if !(t_duration > 0.0 && t_duration.is_finite()) {
            return Err(FlowCheckError::Config(t_duration));
        }
        Ok(Self {
            t_start: now,
            t_duration,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_duration(&self) -> f64 {
        self.t_duration
    }

    /// Registers a vehicle identified at `now`.
    ///
    /// Returns the gap since the previous one when it exceeds `t_duration`.
    /// The timer restarts either way.
    pub fn check(&mut self, now: f64) -> Result<Option<f64>, FlowCheckError> {
        if now < self.t_start {
            return Err(FlowCheckError::StreamOrder {
                t_start: self.t_start,
                event: now,
            });
        }
        let gap = now - self.t_start;
        self.t_start = now;
        Ok((gap > self.t_duration).then_some(gap))
    }

    /// Runs the check for a tracker's new-vehicle event.
    pub fn on_new_vehicle(
        &mut self,
        event: &TrackerEvent,
    ) -> Result<Option<WarningEvent>, FlowCheckError> {
        if event.kind != EventKind::NewVehicle || !event.class.is_vehicle() {
            return Err(FlowCheckError::NotWarnable(format!(
                "{} {} #{}",
                event.kind, event.class, event.track_id
            )));
        }
        Ok(self.check(event.timestamp)?.map(|gap| WarningEvent {
            timestamp: event.timestamp,
            track_id: event.track_id,
            camera: event.camera,
            gap,
        }))
    }
}

/// A warning sent to the workers' devices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarningEvent {
    pub timestamp: f64,
    pub track_id: u64,
    pub camera: Camera,
    /// Quiet time that preceded this vehicle, seconds.
    pub gap: f64,
}

impl fmt::Display for WarningEvent {
    /// Device message, without newline: `WARN t=15.000 cam=rear track=7 gap=15.0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "WARN t={:.3} cam={} track={} gap={:.1}",
            self.timestamp, self.camera, self.track_id, self.gap
        )
    }
}

/// What the flow check made of a new-vehicle event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Warn(WarningEvent),
    /// Gap since the previous vehicle was too short.
    Suppress {
        gap: f64,
    },
    /// Class never enters the flow check.
    Ignore,
}

/// A new-vehicle event together with its verdict, as written to the audit log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub event: TrackerEvent,
    pub verdict: Verdict,
}

impl Decision {
    pub fn warning(&self) -> Option<&WarningEvent> {
        match &self.verdict {
            Verdict::Warn(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.event;
        write!(
            f,
            "t={:.3} cam={} track={} cls={} ",
            e.timestamp, e.camera, e.track_id, e.class
        )?;
        match self.verdict {
            Verdict::Warn(w) => write!(f, "gap={:.1} decision=warn", w.gap),
            Verdict::Suppress { gap } => write!(f, "gap={gap:.1} decision=suppress"),
            Verdict::Ignore => f.write_str("decision=ignore"),
        }
    }
}

/// The single, serialized flow-check consumer fed by both trackers.
#[derive(Debug, Clone)]
pub struct FlowCheck {
    state: FlowCheckState,
}

impl FlowCheck {
    pub fn new(now: f64, t_duration: f64) -> Result<Self, FlowCheckError> {
        Ok(Self {
            state: FlowCheckState::init(now, t_duration)?,
        })
    }

    pub fn state(&self) -> &FlowCheckState {
        &self.state
    }

    /// Decides a new-vehicle event; pedestrians are ignored.
    pub fn decide(&mut self, event: &TrackerEvent) -> Result<Decision, FlowCheckError> {
        debug_assert_eq!(event.kind, EventKind::NewVehicle);
        if !event.class.is_vehicle() {
            return Ok(Decision {
                event: *event,
                verdict: Verdict::Ignore,
            });
        }
        let before = self.state.t_start;
        let verdict = match self.state.on_new_vehicle(event)? {
            Some(w) => Verdict::Warn(w),
            None => Verdict::Suppress {
                gap: event.timestamp - before,
            },
        };
        Ok(Decision {
            event: *event,
            verdict,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection_io::ObjectClass;
    use proptest::prelude::*;

    fn ev(t: f64) -> TrackerEvent {
        TrackerEvent {
            kind: EventKind::NewVehicle,
            track_id: 1,
            timestamp: t,
            camera: Camera::Front,
            class: ObjectClass::Vehicle,
        }
    }

    /// The algorithm as written: one timer, strict comparison, reset always.
    fn literal(start: f64, t_duration: f64, events: &[f64]) -> Vec<usize> {
        let mut t_start = start;
        let mut warned = Vec::new();
        for (i, &t_end) in events.iter().enumerate() {
            let t_diff = t_end - t_start;
            if t_diff > t_duration {
                warned.push(i);
            }
            t_start = t_end;
        }
        warned
    }

    #[test]
    fn init_sets_timer() {
        let s = FlowCheckState::init(0.0, 10.0).unwrap();
        assert_eq!((s.t_start(), s.t_duration()), (0.0, 10.0));
        let s = FlowCheckState::init(123.4, 5.0).unwrap();
        assert_eq!(s.t_start(), 123.4);
        assert_eq!(
            FlowCheckState::init(0.0, 0.0),
            Err(FlowCheckError::Config(0.0))
        );
        assert!(FlowCheckState::init(0.0, -3.0).is_err());
    }

    #[test]
    fn immediate_event_does_not_warn() {
        let mut s = FlowCheckState::init(7.0, 10.0).unwrap();
        assert_eq!(s.on_new_vehicle(&ev(7.0)).unwrap(), None);
    }

    #[test]
    fn worked_sequence() {
        let mut s = FlowCheckState::init(0.0, 10.0).unwrap();
        let w15 = s.on_new_vehicle(&ev(15.0)).unwrap().unwrap();
        assert_eq!((w15.timestamp, w15.gap), (15.0, 15.0));
        assert_eq!(s.on_new_vehicle(&ev(20.0)).unwrap(), None);
        assert_eq!(s.t_start(), 20.0);
        let w35 = s.on_new_vehicle(&ev(35.0)).unwrap().unwrap();
        assert_eq!(w35.gap, 15.0);
    }

    #[test]
    fn gap_equal_to_duration_is_silent() {
        let mut s = FlowCheckState::init(0.0, 10.0).unwrap();
        assert_eq!(s.on_new_vehicle(&ev(10.0)).unwrap(), None);
        assert!(s.on_new_vehicle(&ev(20.0 + 1e-9)).unwrap().is_some());
    }

    #[test]
    fn older_event_is_rejected() {
        let mut s = FlowCheckState::init(5.0, 10.0).unwrap();
        assert!(matches!(
            s.on_new_vehicle(&ev(4.0)),
            Err(FlowCheckError::StreamOrder { .. })
        ));
    }

    #[test]
    fn non_vehicle_events_are_not_warnable() {
        let mut s = FlowCheckState::init(0.0, 10.0).unwrap();
        let mut e = ev(50.0);
        e.class = ObjectClass::Pedestrian;
        assert!(matches!(
            s.on_new_vehicle(&e),
            Err(FlowCheckError::NotWarnable(_))
        ));
        let mut fc = FlowCheck::new(0.0, 10.0).unwrap();
        assert_eq!(fc.decide(&e).unwrap().verdict, Verdict::Ignore);
        assert_eq!(fc.state().t_start(), 0.0);
        let mut e = ev(50.0);
        e.kind = EventKind::TrackTerminated;
        assert!(s.on_new_vehicle(&e).is_err());
    }

    #[test]
    fn device_message_format() {
        let w = WarningEvent {
            timestamp: 15.0,
            track_id: 7,
            camera: Camera::Rear,
            gap: 15.0,
        };
        assert_eq!(w.to_string(), "WARN t=15.000 cam=rear track=7 gap=15.0");
    }

    #[test]
    fn audit_lines() {
        let mut fc = FlowCheck::new(0.0, 10.0).unwrap();
        let d = fc.decide(&ev(12.0)).unwrap();
        assert_eq!(
            d.to_string(),
            "t=12.000 cam=front track=1 cls=vehicle gap=12.0 decision=warn"
        );
        let d = fc.decide(&ev(13.5)).unwrap();
        assert_eq!(
            d.to_string(),
            "t=13.500 cam=front track=1 cls=vehicle gap=1.5 decision=suppress"
        );
    }

    proptest! {
        #[test]
        fn matches_literal_algorithm(gaps in proptest::collection::vec(0u32..40, 0..60), t_duration in 1u32..20) {
            // Integer-valued times make boundary gaps exact.
            let mut t = 0.0;
            let times: Vec<f64> = gaps.iter().map(|g| { t += f64::from(*g); t }).collect();
            let td = f64::from(t_duration);
            let mut s = FlowCheckState::init(0.0, td).unwrap();
            let mut got = Vec::new();
            for (i, &ti) in times.iter().enumerate() {
                if s.on_new_vehicle(&ev(ti)).unwrap().is_some() {
                    got.push(i);
                }
                prop_assert_eq!(s.t_start(), ti);
            }
            prop_assert_eq!(got, literal(0.0, td, &times));
        }

        #[test]
        fn warnings_need_quiet_gap(gaps in proptest::collection::vec(0.0f64..30.0, 1..80)) {
            let mut t = 0.0;
            let mut s = FlowCheckState::init(0.0, 10.0).unwrap();
            let mut prev_warn: Option<f64> = None;
            let mut last = 0.0;
            for g in gaps {
                t += g;
                if let Some(w) = s.on_new_vehicle(&ev(t)).unwrap() {
                    prop_assert!(w.gap > 10.0);
                    prop_assert_eq!(w.gap, t - last);
                    if let Some(p) = prev_warn {
                        prop_assert!(t - p > 10.0);
                    }
                    prev_warn = Some(t);
                }
                last = t;
            }
        }
    }
}
