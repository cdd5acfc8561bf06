//! Geometric orientation observer with gyroscope-bias estimation.
//!
//! The estimate is driven by the error quaternion `q_e = q̂* ⊗ q_meas`:
//!
//! ```text
//! q̂̇  = ½ q̂ ⊗ ( (0, ω_m − b̂) + 2 c₁ (1 − |q_e°|, sgn(q_e°) q⃗_e) )
//! b̂̇  = −c₂ q_e° q⃗_e
//! ```
//!
//! Both `q_meas` and `−q_meas` give the same correction, so the estimate stays
//! continuous when the upstream pose source flips quaternion sign.

use nalgebra::{SVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::integrate::{check_step, rk4, StageInputs};
use crate::quat::{error_quat, skew, Mat3, Quat, Vec3};

/// Norm deviation above which a measured quaternion is treated as corrupt.
pub const MEASUREMENT_UNIT_TOLERANCE: f64 = 1e-3;

/// `sgn` with `sgn(0) = 1`.
pub fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeState {
    pub q: Quat,
    /// Gyroscope bias estimate, rad/s.
    pub gyro_bias: Vec3,
}

impl AttitudeState {
    pub fn new(q: Quat, gyro_bias: Vec3) -> Self {
        Self { q, gyro_bias }
    }

    pub(crate) fn to_vector(self) -> SVector<f64, 7> {
        let [w, x, y, z] = self.q.to_array();
        SVector::from([w, x, y, z, self.gyro_bias.x, self.gyro_bias.y, self.gyro_bias.z])
    }

    pub(crate) fn from_vector(x: &SVector<f64, 7>) -> Self {
        Self {
            q: Quat::new(x[0], x[1], x[2], x[3]),
            gyro_bias: Vec3::new(x[4], x[5], x[6]),
        }
    }
}

/// Observer gains `c₁` (1/s) and `c₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeGains {
    c1: f64,
    c2: f64,
}

impl AttitudeGains {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        for (name, value) in [("c1", c1), ("c2", c2)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidGain { name, value });
            }
        }
        Ok(Self { c1, c2 })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }
}

/// Gyro reading and pose-source orientation consumed by one derivative evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeInput {
    pub gyro: Vec3,
    pub q_meas: Quat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeRate {
    pub q_dot: Quat,
    pub gyro_bias_dot: Vec3,
}

pub fn attitude_derivative(
    state: &AttitudeState,
    input: &AttitudeInput,
    gains: &AttitudeGains,
) -> Result<AttitudeRate> {
    input.q_meas.check_unit(MEASUREMENT_UNIT_TOLERANCE)?;
    if !input.gyro.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("gyro measurement"));
    }
    let qe = error_quat(&state.q, &input.q_meas);
    let correction = Quat::from_parts(1.0 - qe.w.abs(), qe.v * sgn(qe.w)) * (2.0 * gains.c1);
    let drive = Quat::pure(input.gyro - state.gyro_bias) + correction;
    Ok(AttitudeRate {
        q_dot: (state.q * drive) * 0.5,
        gyro_bias_dot: qe.v * (-gains.c2 * qe.w),
    })
}

/// RK4 step with the inputs held over the step, then renormalization.
pub fn attitude_step(
    state: &AttitudeState,
    input: &AttitudeInput,
    gains: &AttitudeGains,
    dt: f64,
) -> Result<AttitudeState> {
    attitude_step_staged(state, &StageInputs::held(*input), gains, dt)
}

/// RK4 step with separate inputs at the start, midpoint and end of the step.
pub fn attitude_step_staged(
    state: &AttitudeState,
    inputs: &StageInputs<AttitudeInput>,
    gains: &AttitudeGains,
    dt: f64,
) -> Result<AttitudeState> {
    check_step(dt)?;
    let x = rk4(&state.to_vector(), dt, |stage, x| {
        let rate = attitude_derivative(&AttitudeState::from_vector(x), inputs.at(stage), gains)?;
        Ok(rate_vector(&rate))
    })?;
    let mut next = AttitudeState::from_vector(&x);
    next.q = next.q.normalize();
    Ok(next)
}

pub(crate) fn rate_vector(rate: &AttitudeRate) -> SVector<f64, 7> {
    AttitudeState::new(rate.q_dot, rate.gyro_bias_dot).to_vector()
}

/// Vector-part error kinematics
/// `q⃗̇_e = q⃗_e × ω_m − ½ q_e° b_e − q⃗_e × (b + b̂) − c₁ q⃗_e`,
/// with `b_e = b − b̂`. Kept as an independent reference for the
/// simulated error trajectory. The renormalized trajectory follows this plus
/// `c₁(1 − |q_e°|) q⃗_e + ½ q⃗_e × (b + b̂)`.
pub fn error_vec_derivative_oracle(
    qe: &Quat,
    gyro_bias_err: &Vec3,
    gyro: &Vec3,
    gyro_bias: &Vec3,
    gyro_bias_est: &Vec3,
    c1: f64,
) -> Vec3 {
    qe.v.cross(gyro) - gyro_bias_err * (0.5 * qe.w) - qe.v.cross(&(gyro_bias + gyro_bias_est)) - qe.v * c1
}

/// Jacobian of the vector-part error kinematics with respect to `q⃗_e`.
pub fn error_jacobian(gyro: &Vec3, gyro_bias: &Vec3, gyro_bias_est: &Vec3, c1: f64) -> Mat3 {
    skew(&(gyro + gyro_bias + gyro_bias_est)) - Mat3::identity() * c1
}

/// Largest `|eig(J + Jᵀ + 2c₁I)|`; zero when the error dynamics contract at
/// rate `c₁` in the identity metric.
pub fn contraction_jacobian_check(gyro: &Vec3, gyro_bias: &Vec3, gyro_bias_est: &Vec3, c1: f64) -> f64 {
    let j = error_jacobian(gyro, gyro_bias, gyro_bias_est, c1);
    let s = j + j.transpose() + Mat3::identity() * (2.0 * c1);
    SymmetricEigen::new(s).eigenvalues.abs().max()
}

/// Attitude error against ground truth together with its Lyapunov value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeDiagnostics {
    pub qe: Quat,
    pub gyro_bias_err: Vec3,
    pub lyapunov: f64,
}

impl AttitudeDiagnostics {
    pub fn new(estimate: &AttitudeState, q_true: &Quat, gyro_bias_true: &Vec3, gains: &AttitudeGains) -> Self {
        let qe = error_quat(&estimate.q, q_true);
        let gyro_bias_err = gyro_bias_true - estimate.gyro_bias;
        let lyapunov = lyapunov(&qe.v, &gyro_bias_err, gains.c2);
        Self {
            qe,
            gyro_bias_err,
            lyapunov,
        }
    }
}

fn lyapunov(qe_vec: &Vec3, gyro_bias_err: &Vec3, c2: f64) -> f64 {
    qe_vec.norm_squared() + gyro_bias_err.norm_squared() / (2.0 * c2)
}

/// `V = ‖q⃗_e‖² + ‖b_e‖² / (2 c₂)`.
pub fn lyapunov_value(d: &AttitudeDiagnostics, c2: f64) -> f64 {
    lyapunov(&d.qe.v, &d.gyro_bias_err, c2)
}
