//! Decodes one raw detector frame into scored detections and prints them as
//! a detection-log line.
//!
//! cargo run --example decode_grid

use roadwatch::detection_io::{decode_grid, write_frame, Camera, FrameDetections, GridSpec};

fn main() {
    // A 4x4 grid over a 1280x720 image: 16 cells, 3 anchors each.
    let spec = GridSpec::new(4, 1280, 720).unwrap();
    let mut raw = vec![0.0f32; spec.payload_len()];

    // [cx, cy, w, h, objectness, p_truck, p_vehicle, p_pedestrian]
    let mut put = |anchor: usize, values: [f32; 8]| {
        let at = anchor * GridSpec::ANCHOR_LEN;
        raw[at..at + 8].copy_from_slice(&values);
    };
    put(5, [642.0, 371.0, 38.0, 30.0, 0.97, 0.10, 0.85, 0.05]);
    put(17, [1100.0, 400.0, 90.0, 70.0, 0.90, 0.80, 0.15, 0.05]);
    put(30, [200.0, 500.0, 10.0, 25.0, 0.40, 0.05, 0.05, 0.90]); // 0.36, below threshold
    put(31, [1400.0, -20.0, 20.0, 20.0, 0.99, 0.05, 0.95, 0.0]); // centre gets clamped

    let detections = decode_grid(&raw, &spec, 0.5, 0).unwrap();
    for d in &detections {
        println!(
            "{:<10} score {:.3} at ({:.1}, {:.1})",
            d.best_class, d.combined_score, d.center[0], d.center[1]
        );
    }

    let frame = FrameDetections {
        frame_index: 0,
        timestamp: 0.0,
        camera: Camera::Front,
        detections: detections.iter().map(|d| d.quantized()).collect(),
    };
    let mut line = Vec::new();
    write_frame(&frame, &mut line).unwrap();
    print!("{}", String::from_utf8(line).unwrap());
}
