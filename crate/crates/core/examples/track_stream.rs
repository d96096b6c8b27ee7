//! Runs one camera's tracker over a short synthetic stream and prints the
//! event log.
//!
//! cargo run --example track_stream

use roadwatch::detection_io::{Camera, Detection, FrameDetections};
use roadwatch::tracking::{write_event_log, Tracker, TrackerConfig};

fn main() {
    let mut tracker = Tracker::new(Camera::Rear, TrackerConfig::default()).unwrap();
    let mut events = Vec::new();

    for k in 0..90u64 {
        let t = k as f64 / 30.0;
        let mut detections = Vec::new();
        // A car approaching from the horizon for two seconds.
        if k < 60 {
            let h = 15.0 + 0.5 * k as f64;
            detections.push(
                Detection::new(
                    k,
                    [650.0 + k as f64, 365.0 + 0.3 * k as f64],
                    1.2 * h,
                    h,
                    0.95,
                    [0.05, 0.9, 0.05],
                )
                .unwrap(),
            );
        }
        // A truck entering later.
        if k >= 40 {
            detections.push(
                Detection::new(
                    k,
                    [300.0 - 2.0 * (k - 40) as f64, 380.0],
                    60.0,
                    45.0,
                    0.9,
                    [0.85, 0.1, 0.05],
                )
                .unwrap(),
            );
        }
        // A single-frame false positive; it never gets confirmed.
        if k == 20 {
            detections.push(
                Detection::new(k, [1000.0, 100.0], 12.0, 10.0, 0.6, [0.1, 0.8, 0.1]).unwrap(),
            );
        }
        let frame = FrameDetections {
            frame_index: k,
            timestamp: t,
            camera: Camera::Rear,
            detections,
        };
        events.extend(tracker.step(&frame).unwrap().events);
    }

    write_event_log(&events, &mut std::io::stdout()).unwrap();
    for track in tracker.tracks() {
        println!(
            "live track {} ({}), {} observations",
            track.id,
            track.class(),
            track.history.len()
        );
    }
}
