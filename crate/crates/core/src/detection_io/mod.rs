//! Detection sources for the pipeline.
//!
//! Detections reach the tracker from one of two places: raw detector grid
//! payloads decoded by [`decode_grid`], or line-delimited detection logs read
//! with [`parse_detection_log`]. Both produce [`FrameDetections`].

mod grid;
mod log;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{decode_grid, read_grid_file, write_grid_file, GridFile, GridSpec, GRID_MAGIC};
pub use log::{parse_detection_log, write_detection_log, write_frame, DetectionLogReader};

/// Number of object classes the detector head emits.
pub const NUM_CLASSES: usize = 3;

/// Camera stream a frame came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Camera {
    Front,
    Rear,
}

impl Camera {
    pub const ALL: [Camera; 2] = [Camera::Front, Camera::Rear];

    pub fn as_str(self) -> &'static str {
        match self {
            Camera::Front => "front",
            Camera::Rear => "rear",
        }
    }
}

impl fmt::Display for Camera {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Camera {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "front" => Ok(Camera::Front),
            "rear" => Ok(Camera::Rear),
            other => Err(format!("unknown camera `{other}`")),
        }
    }
}

/// Detector classes, in the order of the class-confidence vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Truck,
    Vehicle,
    Pedestrian,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; NUM_CLASSES] = [
        ObjectClass::Truck,
        ObjectClass::Vehicle,
        ObjectClass::Pedestrian,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Truck => "truck",
            ObjectClass::Vehicle => "vehicle",
            ObjectClass::Pedestrian => "pedestrian",
        }
    }

    /// Trucks and cars are approaching traffic; pedestrians are not.
    pub fn is_vehicle(self) -> bool {
        !matches!(self, ObjectClass::Pedestrian)
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One decoded bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame_index: u64,
    /// Box centre in pixels.
    pub center: [f64; 2],
    pub width: f64,
    pub height: f64,
    pub objectness: f64,
    /// Conditional class probabilities, indexed by [`ObjectClass::index`].
    pub class_confidences: [f64; NUM_CLASSES],
    /// `objectness * max(class_confidences)`.
    pub combined_score: f64,
    pub best_class: ObjectClass,
}

impl Detection {
    /// Builds a detection, deriving the combined score and validating ranges.
    ///
    /// `best_class` is the arg-max of the class confidences (lowest index wins
    /// ties).
    pub fn new(
        frame_index: u64,
        center: [f64; 2],
        width: f64,
        height: f64,
        objectness: f64,
        class_confidences: [f64; NUM_CLASSES],
    ) -> Result<Self, DetectionError> {
        let best = argmax(&class_confidences);
        Self::with_class(
            frame_index,
            center,
            width,
            height,
            objectness,
            class_confidences,
            ObjectClass::ALL[best],
        )
    }

    /// Like [`Detection::new`] but with an explicit class label.
    pub fn with_class(
        frame_index: u64,
        center: [f64; 2],
        width: f64,
        height: f64,
        objectness: f64,
        class_confidences: [f64; NUM_CLASSES],
        best_class: ObjectClass,
    ) -> Result<Self, DetectionError> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(DetectionError::NonFinite("center"));
        }
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return Err(DetectionError::BadSize { width, height });
        }
        check_probability("objectness", objectness)?;
        for p in class_confidences {
            check_probability("class confidence", p)?;
        }
        let best = class_confidences[argmax(&class_confidences)];
        Ok(Self {
            frame_index,
            center,
            width,
            height,
            objectness,
            class_confidences,
            combined_score: objectness * best,
            best_class,
        })
    }

    /// Rounds every field to the detection-log precision.
    pub fn quantized(&self) -> Self {
        let center = [quantize(self.center[0], 1), quantize(self.center[1], 1)];
        let objectness = quantize(self.objectness, 4);
        let class_confidences = self.class_confidences.map(|p| quantize(p, 4));
        let best = class_confidences[argmax(&class_confidences)];
        Self {
            frame_index: self.frame_index,
            center,
            width: quantize(self.width, 1),
            height: quantize(self.height, 1),
            objectness,
            class_confidences,
            combined_score: objectness * best,
            best_class: self.best_class,
        }
    }
}

/// Rounds `x` to `digits` decimal places so that formatting with the same
/// precision and re-parsing yields the identical `f64`.
pub fn quantize(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

pub(crate) fn argmax(values: &[f64; NUM_CLASSES]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn check_probability(what: &'static str, p: f64) -> Result<(), DetectionError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(DetectionError::Probability { what, value: p })
    }
}

/// All detections of one camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetections {
    pub frame_index: u64,
    /// Data time in seconds.
    pub timestamp: f64,
    pub camera: Camera,
    pub detections: Vec<Detection>,
}

impl FrameDetections {
    pub fn empty(camera: Camera, frame_index: u64, timestamp: f64) -> Self {
        Self {
            frame_index,
            timestamp,
            camera,
            detections: Vec::new(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectionError {
    #[error("{what} {value} outside [0, 1]")]
    Probability { what: &'static str, value: f64 },
    #[error("box size must be positive, got {width}x{height}")]
    BadSize { width: f64, height: f64 },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
}

/// Errors raised while decoding grid payloads.
#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("payload length mismatch: expected {expected} floats, got {actual}")]
    PayloadLength { expected: usize, actual: usize },
    #[error("cell {cell} anchor {anchor}: {source}")]
    Anchor {
        cell: usize,
        anchor: usize,
        #[source]
        source: DetectionError,
    },
    #[error("score threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("invalid grid spec: {0}")]
    Spec(String),
    #[error("bad grid header: {0}")]
    Header(String),
}

/// Errors raised while reading or writing detection logs.
#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {camera} timestamp {current} does not increase on previous {previous}")]
    NonMonotonic {
        line: usize,
        camera: Camera,
        previous: f64,
        current: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LogError {
    /// Line number the error refers to, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            LogError::Malformed { line, .. } | LogError::NonMonotonic { line, .. } => Some(*line),
            LogError::Io(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combined_score_is_objectness_times_best_confidence() {
        let d = Detection::new(0, [10.0, 10.0], 4.0, 4.0, 0.9, [0.8, 0.1, 0.1]).unwrap();
        assert_eq!(d.combined_score, 0.9 * 0.8);
        assert_eq!(d.best_class, ObjectClass::Truck);
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[0.4, 0.4, 0.2]), 0);
        assert_eq!(argmax(&[0.1, 0.4, 0.4]), 1);
    }

    #[test]
    fn rejects_out_of_range_scores_and_sizes() {
        assert!(matches!(
            Detection::new(0, [0.0, 0.0], 1.0, 1.0, 1.2, [0.1; 3]),
            Err(DetectionError::Probability { .. })
        ));
        assert!(matches!(
            Detection::new(0, [0.0, 0.0], 0.0, 1.0, 0.5, [0.1; 3]),
            Err(DetectionError::BadSize { .. })
        ));
        assert!(Detection::new(0, [f64::NAN, 0.0], 1.0, 1.0, 0.5, [0.1; 3]).is_err());
    }

    #[test]
    fn quantize_survives_text_round_trip() {
        for x in [123.44999, 0.1 + 0.2, 1279.95, 7.0 / 3.0] {
            let q = quantize(x, 1);
            let s = format!("{q:.1}");
            assert_eq!(s.parse::<f64>().unwrap(), q);
        }
    }

    #[test]
    fn camera_and_class_names() {
        assert_eq!("rear".parse::<Camera>().unwrap(), Camera::Rear);
        assert!("side".parse::<Camera>().is_err());
        assert_eq!(ObjectClass::Pedestrian.to_string(), "pedestrian");
        assert!(!ObjectClass::Pedestrian.is_vehicle());
    }
}
