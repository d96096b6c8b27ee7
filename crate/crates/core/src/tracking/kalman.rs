//! Constant-velocity Kalman filter over image-plane centres.
//!
//! State is `(x, y, vx, vy)` in pixels and pixels per second. Process noise
//! is the discrete white-acceleration model, applied independently per axis.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};

use super::TrackingError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl KalmanState {
    /// Starts a state at `position` with zero velocity.
    pub fn at_rest(position: [f64; 2], position_variance: f64, velocity_variance: f64) -> Self {
        Self {
            mean: Vector4::new(position[0], position[1], 0.0, 0.0),
            covariance: Matrix4::from_diagonal(&Vector4::new(
                position_variance,
                position_variance,
                velocity_variance,
                velocity_variance,
            )),
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.mean[0], self.mean[1]]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.mean[2], self.mean[3]]
    }

    /// Largest absolute asymmetry relative to the largest entry.
    pub fn symmetry_error(&self) -> f64 {
        let p = &self.covariance;
        let scale = p.amax().max(f64::MIN_POSITIVE);
        (p - p.transpose()).amax() / scale
    }

    /// Smallest eigenvalue of the (symmetrised) covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.covariance + self.covariance.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}

fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

/// White-acceleration process noise `q * [[dt^4/4, dt^3/2], [dt^3/2, dt^2]]`
/// per axis.
pub fn process_noise(dt: f64, q: f64) -> Matrix4<f64> {
    let pp = q * dt.powi(4) / 4.0;
    let pv = q * dt.powi(3) / 2.0;
    let vv = q * dt * dt;
    let mut m = Matrix4::zeros();
    for axis in 0..2 {
        m[(axis, axis)] = pp;
        m[(axis, axis + 2)] = pv;
        m[(axis + 2, axis)] = pv;
        m[(axis + 2, axis + 2)] = vv;
    }
    m
}

fn observation_matrix() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

/// Propagates the state `dt` seconds forward.
pub fn predict(state: &KalmanState, dt: f64, q: f64) -> Result<KalmanState, TrackingError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TrackingError::NonPositiveDt(dt));
    }
    if !(q >= 0.0) {
        return Err(TrackingError::InvalidConfig(format!(
            "process noise {q} < 0"
        )));
    }
    let f = transition(dt);
    Ok(KalmanState {
        mean: f * state.mean,
        covariance: symmetrize(f * state.covariance * f.transpose() + process_noise(dt, q)),
    })
}

/// Innovation and its covariance for a position observation.
pub fn innovation(
    state: &KalmanState,
    observation: [f64; 2],
    r: f64,
) -> (Vector2<f64>, Matrix2<f64>) {
    let h = observation_matrix();
    let residual = Vector2::new(observation[0], observation[1]) - h * state.mean;
    let s = h * state.covariance * h.transpose() + Matrix2::identity() * r;
    (residual, s)
}

/// Normalised innovation squared, `nu' S^-1 nu`.
pub fn normalized_innovation_squared(state: &KalmanState, observation: [f64; 2], r: f64) -> f64 {
    let (nu, s) = innovation(state, observation, r);
    match s.try_inverse() {
        Some(inv) => (nu.transpose() * inv * nu)[0],
        None => f64::INFINITY,
    }
}

/// Folds a position observation into the state.
///
/// Uses the Joseph form so the posterior covariance stays symmetric and
/// positive semidefinite even for tiny `r`.
pub fn update(
    state: &KalmanState,
    observation: [f64; 2],
    r: f64,
) -> Result<KalmanState, TrackingError> {
    if !observation.iter().all(|v| v.is_finite()) {
        return Err(TrackingError::NonFiniteObservation(observation));
    }
    if !(r > 0.0) {
        return Err(TrackingError::InvalidConfig(format!(
            "measurement noise {r} <= 0"
        )));
    }
    let h = observation_matrix();
    let (nu, s) = innovation(state, observation, r);
    let s_inv = s.try_inverse().ok_or(TrackingError::SingularInnovation)?;
    let gain = state.covariance * h.transpose() * s_inv;
    let i_kh = Matrix4::identity() - gain * h;
    let covariance = i_kh * state.covariance * i_kh.transpose()
        + gain * (Matrix2::identity() * r) * gain.transpose();
    Ok(KalmanState {
        mean: state.mean + gain * nu,
        covariance: symmetrize(covariance),
    })
}
