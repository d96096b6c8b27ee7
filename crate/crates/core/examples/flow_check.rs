//! The traffic-flow check on a hand-written event sequence: only a vehicle
//! that follows a quiet period of more than T seconds warns the workers.
//!
//! cargo run --example flow_check

use roadwatch::detection_io::{Camera, ObjectClass};
use roadwatch::tracking::{EventKind, TrackerEvent};
use roadwatch::warning::{FlowCheck, WarningEmitter, WriterDevice};

fn main() {
    let mut flow = FlowCheck::new(0.0, 10.0).unwrap();
    let mut device = WarningEmitter::new(Box::new(WriterDevice::new(std::io::stdout())));

    let events = [
        (12.0, Camera::Front, ObjectClass::Vehicle), // 12 s quiet: warn
        (15.0, Camera::Rear, ObjectClass::Truck),    // 3 s: suppress
        (20.0, Camera::Front, ObjectClass::Pedestrian),
        (25.0, Camera::Front, ObjectClass::Vehicle), // exactly 10 s: suppress
        (40.5, Camera::Rear, ObjectClass::Vehicle),  // 15.5 s: warn
    ];
    for (i, (t, camera, class)) in events.into_iter().enumerate() {
        let event = TrackerEvent {
            kind: EventKind::NewVehicle,
            track_id: i as u64 + 1,
            timestamp: t,
            camera,
            class,
        };
        let decision = flow.decide(&event).unwrap();
        println!("audit: {decision}");
        if let Some(w) = decision.warning() {
            device.emit(w);
        }
    }
    println!("{} warnings sent", device.sent());
}
