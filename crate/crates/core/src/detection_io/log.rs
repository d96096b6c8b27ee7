//! Line-delimited detection logs.
//!
//! One frame per line, canonical form:
//!
//! ```text
//! {"camera":"front","frame":12,"t":0.400,"dets":[{"cx":640.0,"cy":360.0,"w":21.6,"h":18.0,"cls":"vehicle","obj":0.9500,"conf":[0.0500,0.9000,0.0500]}]}
//! ```
//!
//! Pixels carry one fractional digit, probabilities four, time three.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::Deserialize;

use super::{Camera, Detection, FrameDetections, LogError, ObjectClass, NUM_CLASSES};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    camera: Camera,
    frame: u64,
    t: f64,
    dets: Vec<RawDetection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    cls: ObjectClass,
    obj: f64,
    conf: [f64; NUM_CLASSES],
}

/// Streaming reader over a detection log.
///
/// Yields frames in file order and checks that timestamps strictly increase
/// per camera. Blank lines are skipped.
pub struct DetectionLogReader<R> {
    source: R,
    line: usize,
    buf: String,
    last: HashMap<Camera, f64>,
    done: bool,
}

impl<R: BufRead> DetectionLogReader<R> {
    pub fn new(source: R) -> Self {
        Self {
            source,
            line: 0,
            buf: String::new(),
            last: HashMap::new(),
            done: false,
        }
    }

    fn parse_line(&mut self) -> Result<FrameDetections, LogError> {
        let line = self.line;
        let malformed = |message: String| LogError::Malformed { line, message };
        let raw: RawFrame =
            serde_json::from_str(self.buf.trim_end()).map_err(|e| malformed(e.to_string()))?;
        if !raw.t.is_finite() {
            return Err(malformed(format!("non-finite timestamp {}", raw.t)));
        }
        if let Some(&previous) = self.last.get(&raw.camera) {
            if raw.t <= previous {
                return Err(LogError::NonMonotonic {
                    line,
                    camera: raw.camera,
                    previous,
                    current: raw.t,
                });
            }
        }
        self.last.insert(raw.camera, raw.t);

        let detections = raw
            .dets
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                Detection::with_class(raw.frame, [d.cx, d.cy], d.w, d.h, d.obj, d.conf, d.cls)
                    .map_err(|e| malformed(format!("detection {i}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FrameDetections {
            frame_index: raw.frame,
            timestamp: raw.t,
            camera: raw.camera,
            detections,
        })
    }
}

impl<R: BufRead> Iterator for DetectionLogReader<R> {
    type Item = Result<FrameDetections, LogError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.source.read_line(&mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line += 1;
                    if self.buf.trim().is_empty() {
                        continue;
                    }
                    let item = self.parse_line();
                    if item.is_err() {
                        self.done = true;
                    }
                    return Some(item);
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
        }
        None
    }
}

/// Reads a whole detection log into memory.
pub fn parse_detection_log<R: BufRead>(source: R) -> Result<Vec<FrameDetections>, LogError> {
    DetectionLogReader::new(source).collect()
}

/// Writes one frame as a canonical log line (including the newline).
pub fn write_frame<W: Write>(frame: &FrameDetections, sink: &mut W) -> std::io::Result<()> {
    write!(
        sink,
        "{{\"camera\":\"{}\",\"frame\":{},\"t\":{:.3},\"dets\":[",
        frame.camera, frame.frame_index, frame.timestamp
    )?;
    for (i, d) in frame.detections.iter().enumerate() {
        if i > 0 {
            sink.write_all(b",")?;
        }
        write!(
            sink,
            "{{\"cx\":{:.1},\"cy\":{:.1},\"w\":{:.1},\"h\":{:.1},\"cls\":\"{}\",\"obj\":{:.4},\"conf\":[{:.4},{:.4},{:.4}]}}",
            d.center[0],
            d.center[1],
            d.width,
            d.height,
            d.best_class,
            d.objectness,
            d.class_confidences[0],
            d.class_confidences[1],
            d.class_confidences[2],
        )?;
    }
    sink.write_all(b"]}\n")
}

pub fn write_detection_log<'a, W, I>(frames: I, sink: &mut W) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a FrameDetections>,
{
    for frame in frames {
        write_frame(frame, sink)?;
    }
    sink.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TWO_DETS: &str = "{\"camera\":\"rear\",\"frame\":4,\"t\":0.133,\"dets\":[\
{\"cx\":100.0,\"cy\":200.5,\"w\":30.0,\"h\":20.0,\"cls\":\"truck\",\"obj\":0.9500,\"conf\":[0.9000,0.0500,0.0500]},\
{\"cx\":400.0,\"cy\":210.0,\"w\":12.4,\"h\":10.0,\"cls\":\"vehicle\",\"obj\":0.8000,\"conf\":[0.1000,0.8500,0.0500]}]}\n";

    fn random_frames(seed: u64, n: usize) -> Vec<FrameDetections> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = [0.0f64; 2];
        (0..n)
            .map(|i| {
                let camera = if rng.random_bool(0.5) {
                    Camera::Front
                } else {
                    Camera::Rear
                };
                let slot = camera as usize;
                t[slot] = crate::detection_io::quantize(t[slot] + rng.random_range(0.001..0.2), 3);
                let dets = (0..rng.random_range(0..5))
                    .map(|_| {
                        let conf = [
                            rng.random_range(0.0..=1.0),
                            rng.random_range(0.0..=1.0),
                            rng.random_range(0.0..=1.0),
                        ];
                        Detection::new(
                            i as u64,
                            [rng.random_range(0.0..1280.0), rng.random_range(0.0..720.0)],
                            rng.random_range(1.0..300.0),
                            rng.random_range(1.0..300.0),
                            rng.random_range(0.0..=1.0),
                            conf,
                        )
                        .unwrap()
                        .quantized()
                    })
                    .collect();
                FrameDetections {
                    frame_index: i as u64,
                    timestamp: t[slot],
                    camera,
                    detections: dets,
                }
            })
            .collect()
    }

    #[test]
    fn empty_source_and_empty_output() {
        assert!(parse_detection_log("".as_bytes()).unwrap().is_empty());
        let mut out = Vec::new();
        write_detection_log(&[], &mut out).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn single_frame_without_detections() {
        let frame = FrameDetections::empty(Camera::Front, 0, 0.0);
        let mut out = Vec::new();
        write_detection_log([&frame], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"camera\":\"front\",\"frame\":0,\"t\":0.000,\"dets\":[]}\n"
        );
    }

    #[test]
    fn parses_two_detections() {
        let frames = parse_detection_log(TWO_DETS.as_bytes()).unwrap();
        assert_eq!(frames.len(), 1);
        let f = &frames[0];
        assert_eq!(
            (f.camera, f.frame_index, f.timestamp),
            (Camera::Rear, 4, 0.133)
        );
        assert_eq!(f.detections.len(), 2);
        assert_eq!(f.detections[0].best_class, ObjectClass::Truck);
        assert_eq!(f.detections[1].center, [400.0, 210.0]);
        assert_eq!(f.detections[1].combined_score, 0.8 * 0.85);
        assert!(f.detections.iter().all(|d| d.frame_index == 4));

        let mut out = Vec::new();
        write_detection_log(&frames, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), TWO_DETS);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"camera\":\"front\",\"frame\":0,\"t\":0.000,\"dets\":[]}\n\
                    {\"camera\":\"front\",\"frame\":1,\"t\":0.033,\"dets\":[{]}\n";
        let err = parse_detection_log(text.as_bytes()).unwrap_err();
        assert_eq!(err.line(), Some(2));
        let err = parse_detection_log("{\"camera\":\"side\"}".as_bytes()).unwrap_err();
        assert_eq!(err.line(), Some(1));
    }

    #[test]
    fn out_of_range_probability_is_malformed() {
        let text = TWO_DETS.replace("\"obj\":0.9500", "\"obj\":1.9500");
        let err = parse_detection_log(text.as_bytes()).unwrap_err();
        assert!(matches!(err, LogError::Malformed { line: 1, .. }), "{err}");
    }

    #[test]
    fn non_monotonic_timestamp_names_both() {
        let text = "{\"camera\":\"front\",\"frame\":0,\"t\":1.000,\"dets\":[]}\n\
                    {\"camera\":\"rear\",\"frame\":0,\"t\":0.500,\"dets\":[]}\n\
                    {\"camera\":\"front\",\"frame\":1,\"t\":1.000,\"dets\":[]}\n";
        let err = parse_detection_log(text.as_bytes()).unwrap_err();
        match &err {
            LogError::NonMonotonic {
                line,
                camera,
                previous,
                current,
            } => {
                assert_eq!(
                    (*line, *camera, *previous, *current),
                    (3, Camera::Front, 1.0, 1.0)
                );
            }
            other => panic!("unexpected {other}"),
        }
        let msg = err.to_string();
        assert!(msg.contains("1") && msg.contains("front"));
    }

    #[test]
    fn canonical_corpus_is_byte_stable() {
        let frames = random_frames(11, 1000);
        let mut first = Vec::new();
        write_detection_log(&frames, &mut first).unwrap();
        let parsed = parse_detection_log(first.as_slice()).unwrap();
        assert_eq!(parsed, frames);
        let mut second = Vec::new();
        write_detection_log(&parsed, &mut second).unwrap();
        assert_eq!(first, second);
    }

    proptest! {
        #[test]
        fn parse_inverts_write(seed in any::<u64>(), n in 0usize..40) {
            let frames = random_frames(seed, n);
            let mut buf = Vec::new();
            write_detection_log(&frames, &mut buf).unwrap();
            prop_assert_eq!(parse_detection_log(buf.as_slice()).unwrap(), frames);
        }
    }
}
