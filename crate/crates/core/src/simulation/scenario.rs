//! Scenario configuration.
//!
//! Scenario files are TOML. Every field of [`Scenario`] maps to one key;
//! nested tables hold the camera model and the noise model, and arrays of
//! tables hold the arrival profile and occlusion windows:
//!
//! ```toml
//! duration = 3600.0           # seconds
//! seed = 1
//! frame_rate = 30.0           # Hz
//! detection_range = 120.0     # metres at which vehicles become visible
//! min_visible_distance = 10.0 # metres at which they leave the camera's view
//! speed_min = 17.5            # m/s, uniform per vehicle
//! speed_max = 27.5
//! truck_fraction = 0.15
//!
//! [camera]
//! focal_length = 1000.0       # pixels
//! vehicle_height = 1.5        # metres
//! vehicle_width = 1.8
//! image_width = 1280
//! image_height = 720
//! lane_offset = 1.0           # lateral offset of the lane, metres
//! mount_height = 0.5          # camera height above vehicle centre, metres
//!
//! [noise]
//! center_sigma = 2.0          # pixels
//! dropout = 0.02              # per vehicle-frame
//! false_positive_rate = 0.01  # expected spurious boxes per frame
//!
//! [[arrival]]                 # piecewise-constant, each segment runs to the next start
//! start = 0.0
//! front_per_hour = 30.0
//! rear_per_hour = 30.0
//!
//! [[occlusion]]               # invisible while near < distance <= far
//! direction = "front"
//! near = 30.0
//! far = 200.0
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection_io::Camera;

use super::SimulationError;

/// Direction a vehicle approaches from; identical to the camera watching it.
pub type Direction = Camera;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    pub focal_length: f64,
    pub vehicle_height: f64,
    pub vehicle_width: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub lane_offset: f64,
    pub mount_height: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            focal_length: 1000.0,
            vehicle_height: 1.5,
            vehicle_width: 1.8,
            image_width: 1280,
            image_height: 720,
            lane_offset: 1.0,
            mount_height: 0.5,
        }
    }
}

impl CameraModel {
    /// Pinhole projection of a vehicle `distance` metres away: box centre and
    /// `(width, height)` in pixels.
    pub fn project(&self, distance: f64) -> ([f64; 2], f64, f64) {
        let f = self.focal_length;
        let center = [
            f64::from(self.image_width) / 2.0 + f * self.lane_offset / distance,
            f64::from(self.image_height) / 2.0 + f * self.mount_height / distance,
        ];
        (
            center,
            f * self.vehicle_width / distance,
            f * self.vehicle_height / distance,
        )
    }

    pub fn contains(&self, point: [f64; 2]) -> bool {
        (0.0..=f64::from(self.image_width)).contains(&point[0])
            && (0.0..=f64::from(self.image_height)).contains(&point[1])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    #[serde(default)]
    pub center_sigma: f64,
    #[serde(default)]
    pub dropout: f64,
    #[serde(default)]
    pub false_positive_rate: f64,
}

/// Arrival rates from `start` until the next segment's start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSegment {
    pub start: f64,
    #[serde(default)]
    pub front_per_hour: f64,
    #[serde(default)]
    pub rear_per_hour: f64,
}

impl RateSegment {
    pub fn per_second(&self, direction: Direction) -> f64 {
        let per_hour = match direction {
            Camera::Front => self.front_per_hour,
            Camera::Rear => self.rear_per_hour,
        };
        per_hour / 3600.0
    }
}

/// Distance band in which a direction's camera cannot see vehicles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcclusionWindow {
    pub direction: Direction,
    pub near: f64,
    pub far: f64,
}

impl OcclusionWindow {
    pub fn hides(&self, direction: Direction, distance: f64) -> bool {
        self.direction == direction && distance > self.near && distance <= self.far
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    pub detection_range: f64,
    #[serde(default)]
    pub min_visible_distance: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    #[serde(default)]
    pub truck_fraction: f64,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub arrival: Vec<RateSegment>,
    #[serde(default)]
    pub occlusion: Vec<OcclusionWindow>,
}

fn default_frame_rate() -> f64 {
    30.0
}

/// One rejected scenario field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, SimulationError> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| SimulationError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, SimulationError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimulationError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<(), SimulationError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &str, reason: String| {
            if !ok {
                errs.push(FieldError {
                    field: field.to_string(),
                    reason,
                });
            }
        };
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        let prob = |x: f64| (0.0..=1.0).contains(&x);

        check(
            finite_pos(self.duration),
            "duration",
            format!("must be > 0, got {}", self.duration),
        );
        check(
            finite_pos(self.frame_rate),
            "frame_rate",
            format!("must be > 0, got {}", self.frame_rate),
        );
        check(
            finite_pos(self.detection_range),
            "detection_range",
            format!("must be > 0, got {}", self.detection_range),
        );
        check(
            self.min_visible_distance >= 0.0 && self.min_visible_distance < self.detection_range,
            "min_visible_distance",
            format!(
                "must be in [0, detection_range), got {}",
                self.min_visible_distance
            ),
        );
        check(
            finite_pos(self.speed_min),
            "speed_min",
            format!("must be > 0, got {}", self.speed_min),
        );
        check(
            self.speed_max.is_finite() && self.speed_max >= self.speed_min,
            "speed_max",
            format!("must be >= speed_min, got {}", self.speed_max),
        );
        check(
            prob(self.truck_fraction),
            "truck_fraction",
            format!("must be in [0, 1], got {}", self.truck_fraction),
        );

        let c = &self.camera;
        check(
            finite_pos(c.focal_length),
            "camera.focal_length",
            format!("must be > 0, got {}", c.focal_length),
        );
        check(
            finite_pos(c.vehicle_height),
            "camera.vehicle_height",
            format!("must be > 0, got {}", c.vehicle_height),
        );
        check(
            finite_pos(c.vehicle_width),
            "camera.vehicle_width",
            format!("must be > 0, got {}", c.vehicle_width),
        );
        check(
            c.image_width > 0,
            "camera.image_width",
            "must be > 0".into(),
        );
        check(
            c.image_height > 0,
            "camera.image_height",
            "must be > 0".into(),
        );
        check(
            c.lane_offset.is_finite(),
            "camera.lane_offset",
            "must be finite".into(),
        );
        check(
            c.mount_height.is_finite(),
            "camera.mount_height",
            "must be finite".into(),
        );

        let n = &self.noise;
        check(
            n.center_sigma.is_finite() && n.center_sigma >= 0.0,
            "noise.center_sigma",
            format!("must be >= 0, got {}", n.center_sigma),
        );
        check(
            prob(n.dropout),
            "noise.dropout",
            format!("must be in [0, 1], got {}", n.dropout),
        );
        check(
            n.false_positive_rate.is_finite() && n.false_positive_rate >= 0.0,
            "noise.false_positive_rate",
            format!("must be >= 0, got {}", n.false_positive_rate),
        );

        let mut prev_start = f64::NEG_INFINITY;
        for (i, seg) in self.arrival.iter().enumerate() {
            check(
                seg.start.is_finite() && seg.start >= 0.0 && seg.start > prev_start,
                &format!("arrival[{i}].start"),
                format!("must be >= 0 and increasing, got {}", seg.start),
            );
            prev_start = seg.start;
            for (name, v) in [
                ("front_per_hour", seg.front_per_hour),
                ("rear_per_hour", seg.rear_per_hour),
            ] {
                check(
                    v.is_finite() && v >= 0.0,
                    &format!("arrival[{i}].{name}"),
                    format!("must be >= 0, got {v}"),
                );
            }
        }
        for (i, w) in self.occlusion.iter().enumerate() {
            check(
                w.near >= 0.0 && w.far > w.near,
                &format!("occlusion[{i}]"),
                format!("need 0 <= near < far, got near={} far={}", w.near, w.far),
            );
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(SimulationError::Invalid(errs))
        }
    }

    /// Arrival rate in vehicles per second at time `t`.
    pub fn rate_at(&self, direction: Direction, t: f64) -> f64 {
        self.arrival
            .iter()
            .take_while(|s| s.start <= t)
            .last()
            .map_or(0.0, |s| s.per_second(direction))
    }

    pub fn max_rate(&self, direction: Direction) -> f64 {
        self.arrival
            .iter()
            .map(|s| s.per_second(direction))
            .fold(0.0, f64::max)
    }

    pub fn frame_count(&self) -> u64 {
        (self.duration * self.frame_rate).ceil() as u64
    }

    pub fn is_occluded(&self, direction: Direction, distance: f64) -> bool {
        self.occlusion.iter().any(|w| w.hides(direction, distance))
    }

    fn base(duration: f64) -> Self {
        Self {
            duration,
            seed: 1,
            frame_rate: 30.0,
            detection_range: 120.0,
            min_visible_distance: 10.0,
            speed_min: 17.5,
            speed_max: 27.5,
            truck_fraction: 0.15,
            camera: CameraModel::default(),
            noise: NoiseModel {
                center_sigma: 2.0,
                dropout: 0.02,
                false_positive_rate: 0.01,
            },
            arrival: Vec::new(),
            occlusion: Vec::new(),
        }
    }

    /// An eight-hour working day: light traffic of 60 vehicles per hour with
    /// two rush periods at 1920 per hour, split evenly between directions.
    ///
    /// The rush periods last 801 s each so that the expected day total is
    /// about 1308 vehicles.
    pub fn paper_day() -> Self {
        let segment = |start: f64, per_hour: f64| RateSegment {
            start,
            front_per_hour: per_hour / 2.0,
            rear_per_hour: per_hour / 2.0,
        };
        Self {
            arrival: vec![
                segment(0.0, 60.0),
                segment(3600.0, 1920.0),
                segment(4401.0, 60.0),
                segment(7.0 * 3600.0, 1920.0),
                segment(7.0 * 3600.0 + 801.0, 60.0),
            ],
            ..Self::base(8.0 * 3600.0)
        }
    }

    /// Open country road, moderate traffic, no occlusion.
    pub fn country_road() -> Self {
        Self {
            arrival: vec![RateSegment {
                start: 0.0,
                front_per_hour: 60.0,
                rear_per_hour: 60.0,
            }],
            ..Self::base(4.0 * 3600.0)
        }
    }

    /// Site in a bend: both cameras only see vehicles in the last 30 m.
    pub fn curve() -> Self {
        let hidden = |direction| OcclusionWindow {
            direction,
            near: 30.0,
            far: 120.0,
        };
        Self {
            speed_min: 15.0,
            speed_max: 25.0,
            occlusion: vec![hidden(Camera::Front), hidden(Camera::Rear)],
            ..Self::country_road()
        }
    }

    /// No traffic at all.
    pub fn empty() -> Self {
        Self::base(600.0)
    }

    /// Built-in scenario by name (`paper-day`, `country-road`, `curve`, `empty`).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "paper-day" => Some(Self::paper_day()),
            "country-road" => Some(Self::country_road()),
            "curve" => Some(Self::curve()),
            "empty" => Some(Self::empty()),
            _ => None,
        }
    }
}
