//! Follows a box moving at constant velocity through noisy observations.
//!
//! cargo run --example kalman_filter

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use roadwatch::tracking::kalman::{self, KalmanState};

fn main() {
    let (dt, q, r) = (1.0 / 30.0, 10.0, 4.0);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // True motion: 120 px/s right, 30 px/s down.
    let truth = |k: f64| [100.0 + 120.0 * k * dt, 200.0 + 30.0 * k * dt];
    let mut state = KalmanState::at_rest(truth(0.0), r, 100.0);

    println!("frame   pos error   vx      vy      var(x)");
    for k in 1..=60 {
        let t = truth(f64::from(k));
        let z = [t[0] + noise.sample(&mut rng), t[1] + noise.sample(&mut rng)];
        state = kalman::predict(&state, dt, q).unwrap();
        state = kalman::update(&state, z, r).unwrap();
        if k % 10 == 0 {
            let p = state.position();
            let err = (p[0] - t[0]).hypot(p[1] - t[1]);
            let v = state.velocity();
            println!(
                "{k:>5}   {err:>9.2}   {:>6.1}  {:>6.1}  {:>6.3}",
                v[0],
                v[1],
                state.covariance[(0, 0)]
            );
        }
    }

    // Coasting: one second without observations.
    for _ in 0..30 {
        state = kalman::predict(&state, dt, q).unwrap();
    }
    let p = state.position();
    println!(
        "after 1 s coasting: ({:.1}, {:.1}), var(x) {:.1}",
        p[0],
        p[1],
        state.covariance[(0, 0)]
    );
}
