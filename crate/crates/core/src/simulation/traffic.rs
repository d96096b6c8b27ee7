use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::detection_io::{Camera, ObjectClass};

use super::scenario::{Direction, Scenario};

/// Ground truth for one vehicle driving past the site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehiclePass {
    pub vehicle_id: u64,
    pub direction: Direction,
    /// Moment the vehicle crosses the visibility horizon.
    pub spawn_time: f64,
    /// m/s, constant.
    pub speed: f64,
    /// Moment the vehicle reaches the site.
    pub pass_time: f64,
    pub class: ObjectClass,
}

impl VehiclePass {
    /// Distance to the site at time `t`, metres.
    pub fn distance_at(&self, t: f64, detection_range: f64) -> f64 {
        detection_range - self.speed * (t - self.spawn_time)
    }
}

/// Samples vehicle passes for both directions.
///
/// Spawn times follow a non-homogeneous Poisson process with the scenario's
/// piecewise-constant rate, drawn by thinning a homogeneous process at the
/// peak rate. Output is sorted by spawn time with ids in that order.
pub fn generate_passes<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Vec<VehiclePass> {
    let mut passes = Vec::new();
    for direction in Camera::ALL {
        let peak = scenario.max_rate(direction);
        if peak <= 0.0 {
            continue;
        }
        let gaps = Exp::new(peak).expect("positive rate");
        let mut t = 0.0;
        loop {
            t += gaps.sample(rng);
            if t >= scenario.duration {
                break;
            }
            let accept = rng.random::<f64>() * peak < scenario.rate_at(direction, t);
            if !accept {
                continue;
            }
            let speed = if scenario.speed_max > scenario.speed_min {
                rng.random_range(scenario.speed_min..scenario.speed_max)
            } else {
                scenario.speed_min
            };
            let class = if rng.random::<f64>() < scenario.truck_fraction {
                ObjectClass::Truck
            } else {
                ObjectClass::Vehicle
            };
            passes.push(VehiclePass {
                vehicle_id: 0,
                direction,
                spawn_time: t,
                speed,
                pass_time: t + scenario.detection_range / speed,
                class,
            });
        }
    }
    passes.sort_by(|a, b| {
        a.spawn_time
            .total_cmp(&b.spawn_time)
            .then(a.direction.cmp(&b.direction))
    });
    for (id, p) in passes.iter_mut().enumerate() {
        p.vehicle_id = id as u64;
    }
    passes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::scenario::RateSegment;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant(per_second: f64, duration: f64) -> Scenario {
        Scenario {
            duration,
            arrival: vec![RateSegment {
                start: 0.0,
                front_per_hour: per_second * 3600.0,
                rear_per_hour: 0.0,
            }],
            ..Scenario::empty()
        }
    }

    #[test]
    fn zero_rate_means_no_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(generate_passes(&Scenario::empty(), &mut rng).is_empty());
    }

    #[test]
    fn poisson_count() {
        let s = constant(0.05, 1e5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = generate_passes(&s, &mut rng).len() as f64;
        let mean = 0.05 * 1e5;
        assert!((n - mean).abs() <= 3.0 * mean.sqrt(), "{n}");
    }

    #[test]
    fn thinning_follows_profile() {
        let mut s = Scenario::paper_day();
        s.duration = 7200.0;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let passes = generate_passes(&s, &mut rng);
        let quiet = passes.iter().filter(|p| p.spawn_time < 3600.0).count() as f64;
        let rush = passes
            .iter()
            .filter(|p| (3600.0..4401.0).contains(&p.spawn_time))
            .count() as f64;
        // 60 per hour versus 1920 per hour for 801 s.
        assert!((quiet - 60.0).abs() < 3.0 * 60f64.sqrt(), "{quiet}");
        let want = 1920.0 * 801.0 / 3600.0;
        assert!((rush - want).abs() < 3.0 * want.sqrt(), "{rush}");
    }

    #[test]
    fn deterministic_and_well_formed() {
        let s = Scenario::country_road();
        let a = generate_passes(&s, &mut ChaCha8Rng::seed_from_u64(9));
        let b = generate_passes(&s, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        for (i, p) in a.iter().enumerate() {
            assert_eq!(p.vehicle_id, i as u64);
            assert!(p.speed >= s.speed_min && p.speed < s.speed_max);
            assert_eq!(p.pass_time, p.spawn_time + s.detection_range / p.speed);
            assert_eq!(
                p.distance_at(p.spawn_time, s.detection_range),
                s.detection_range
            );
        }
        assert!(a.windows(2).all(|w| w[0].spawn_time <= w[1].spawn_time));
    }
}
