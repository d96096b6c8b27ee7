//! Turns ground-truth passes into per-camera detection streams.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::detection_io::{quantize, Camera, Detection, FrameDetections, ObjectClass};

use super::scenario::Scenario;
use super::traffic::VehiclePass;

/// Nominal detector output for a rendered vehicle.
pub const NOMINAL_OBJECTNESS: f64 = 0.95;
pub const NOMINAL_CLASS_CONFIDENCE: f64 = 0.9;
const OTHER_CLASS_CONFIDENCE: f64 = 0.05;

/// A frame plus the hidden ground-truth vehicle behind each detection
/// (`None` for false positives).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFrame {
    pub frame: FrameDetections,
    pub labels: Vec<Option<u64>>,
}

/// Both cameras' frames for one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub front: LabeledFrame,
    pub rear: LabeledFrame,
}

struct Lane<'a> {
    passes: Vec<&'a VehiclePass>,
    next: usize,
    active: Vec<&'a VehiclePass>,
}

/// Frame-by-frame renderer; yields one [`Tick`] per frame period.
///
/// Timestamps are `k / frame_rate` rounded to the millisecond and every
/// detection is rounded to log precision, so a dumped stream replays
/// bit-for-bit.
pub struct DetectionRenderer<'a, R> {
    scenario: &'a Scenario,
    lanes: [Lane<'a>; 2],
    rng: R,
    tick: u64,
    frames: u64,
    jitter: Option<Normal<f64>>,
    false_positives: Option<Poisson<f64>>,
}

impl<'a, R: Rng> DetectionRenderer<'a, R> {
    pub fn new(passes: &'a [VehiclePass], scenario: &'a Scenario, rng: R) -> Self {
        let lane = |camera: Camera| {
            let mut mine: Vec<&VehiclePass> =
                passes.iter().filter(|p| p.direction == camera).collect();
            mine.sort_by(|a, b| a.spawn_time.total_cmp(&b.spawn_time));
            Lane {
                passes: mine,
                next: 0,
                active: Vec::new(),
            }
        };
        let sigma = scenario.noise.center_sigma;
        let fp_rate = scenario.noise.false_positive_rate;
        Self {
            scenario,
            lanes: [lane(Camera::Front), lane(Camera::Rear)],
            rng,
            tick: 0,
            frames: scenario.frame_count(),
            jitter: (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("valid sigma")),
            false_positives: (fp_rate > 0.0).then(|| Poisson::new(fp_rate).expect("valid rate")),
        }
    }

    /// Data time of tick `k`.
    pub fn timestamp(&self, k: u64) -> f64 {
        quantize(k as f64 / self.scenario.frame_rate, 3)
    }

    fn render(&mut self, camera: Camera, k: u64, t: f64) -> LabeledFrame {
        let s = self.scenario;
        let lane = &mut self.lanes[camera as usize];
        while lane.next < lane.passes.len() && lane.passes[lane.next].spawn_time <= t {
            lane.active.push(lane.passes[lane.next]);
            lane.next += 1;
        }
        lane.active.retain(|p| p.pass_time > t);

        let mut frame = FrameDetections::empty(camera, k, t);
        let mut labels = Vec::new();
        let cam = &s.camera;
        for pass in &lane.active {
            let d = pass.distance_at(t, s.detection_range);
            if !(d > 0.0 && d <= s.detection_range)
                || d < s.min_visible_distance
                || s.is_occluded(camera, d)
            {
                continue;
            }
            let (mut center, w, h) = cam.project(d);
            if !cam.contains(center) {
                continue;
            }
            if s.noise.dropout > 0.0 && self.rng.random::<f64>() < s.noise.dropout {
                continue;
            }
            if let Some(jitter) = &self.jitter {
                center[0] += jitter.sample(&mut self.rng);
                center[1] += jitter.sample(&mut self.rng);
            }
            center[0] = center[0].clamp(0.0, f64::from(cam.image_width));
            center[1] = center[1].clamp(0.0, f64::from(cam.image_height));
            frame.detections.push(nominal(k, center, w, h, pass.class));
            labels.push(Some(pass.vehicle_id));
        }

        if let Some(fp) = &self.false_positives {
            let count = fp.sample(&mut self.rng) as u64;
            for _ in 0..count {
                let center = [
                    self.rng.random_range(0.0..f64::from(cam.image_width)),
                    self.rng.random_range(0.0..f64::from(cam.image_height)),
                ];
                let h = self.rng.random_range(8.0..40.0);
                frame
                    .detections
                    .push(nominal(k, center, 1.2 * h, h, ObjectClass::Vehicle));
                labels.push(None);
            }
        }
        LabeledFrame { frame, labels }
    }
}

fn nominal(k: u64, center: [f64; 2], w: f64, h: f64, class: ObjectClass) -> Detection {
    let mut conf = [OTHER_CLASS_CONFIDENCE; 3];
    conf[class.index()] = NOMINAL_CLASS_CONFIDENCE;
    Detection::new(k, center, w.max(0.1), h.max(0.1), NOMINAL_OBJECTNESS, conf)
        .expect("nominal detection is valid")
        .quantized()
}

impl<R: Rng> Iterator for DetectionRenderer<'_, R> {
    type Item = Tick;

    fn next(&mut self) -> Option<Tick> {
        if self.tick >= self.frames {
            return None;
        }
        let k = self.tick;
        self.tick += 1;
        let t = self.timestamp(k);
        let front = self.render(Camera::Front, k, t);
        let rear = self.render(Camera::Rear, k, t);
        Some(Tick { front, rear })
    }
}

/// Both camera streams of a whole run, in memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RenderedStreams {
    pub front: Vec<LabeledFrame>,
    pub rear: Vec<LabeledFrame>,
}

pub fn render_detections<R: Rng>(
    passes: &[VehiclePass],
    scenario: &Scenario,
    rng: R,
) -> RenderedStreams {
    let mut out = RenderedStreams::default();
    for tick in DetectionRenderer::new(passes, scenario, rng) {
        out.front.push(tick.front);
        out.rear.push(tick.rear);
    }
    out
}
