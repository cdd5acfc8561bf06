//! Contracting observer for position, velocity and accelerometer bias.
//!
//! With `p_e = p_meas − p̂`:
//!
//! ```text
//! p̂̇ = v̂ + K₃ p_e
//! v̂̇ = R (a_m − b̂) − g + [K₂ + K₃ R Ω Rᵀ] p_e
//! b̂̇ = −[K₁ + K₂ Ω + K₃ (Ω² − Ω̇)] Rᵀ p_e
//! ```
//!
//! `(R, Ω, Ω̇)` come from an [`AttitudeFeed`]: the true attitude gives the
//! contracting observer, the orientation observer's estimates give the
//! cascaded one. Both go through the same code.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::integrate::{check_step, rk4, StageInputs};
use crate::quat::{skew, skew_residual, Mat3, RotationMatrix, Vec3};
use crate::synthesis::{TranslationGains, SKEW_TOLERANCE};

/// Standard gravity in a z-up world frame, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslationState {
    pub p: Vec3,
    pub v: Vec3,
    /// Accelerometer bias estimate, m/s².
    pub accel_bias: Vec3,
}

impl TranslationState {
    pub fn new(p: Vec3, v: Vec3, accel_bias: Vec3) -> Self {
        Self { p, v, accel_bias }
    }

    pub(crate) fn to_vector(self) -> SVector<f64, 9> {
        let mut x = SVector::<f64, 9>::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.p);
        x.fixed_rows_mut::<3>(3).copy_from(&self.v);
        x.fixed_rows_mut::<3>(6).copy_from(&self.accel_bias);
        x
    }

    pub(crate) fn from_vector(x: &SVector<f64, 9>) -> Self {
        Self {
            p: x.fixed_rows::<3>(0).into(),
            v: x.fixed_rows::<3>(3).into(),
            accel_bias: x.fixed_rows::<3>(6).into(),
        }
    }

    /// Stacked `[p; v; b]`.
    pub fn stacked(&self) -> SVector<f64, 9> {
        self.to_vector()
    }
}

/// Attitude, body rate and body angular acceleration seen by the translation observer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttitudeFeed {
    r: RotationMatrix,
    omega: Mat3,
    omega_dot: Mat3,
}

impl AttitudeFeed {
    pub fn new(r: RotationMatrix, omega: Mat3, omega_dot: Mat3) -> Result<Self> {
        for (what, m) in [("Ω", &omega), ("Ω̇", &omega_dot)] {
            let residual = skew_residual(m);
            if residual.is_nan() || residual > SKEW_TOLERANCE {
                return Err(Error::NotSkew { what, residual });
            }
        }
        Ok(Self { r, omega, omega_dot })
    }

    /// Feed built from body rate `ω` and its derivative.
    pub fn from_rates(r: RotationMatrix, omega: &Vec3, omega_dot: &Vec3) -> Self {
        Self {
            r,
            omega: skew(omega),
            omega_dot: skew(omega_dot),
        }
    }

    pub fn rotation(&self) -> &RotationMatrix {
        &self.r
    }

    pub fn omega(&self) -> &Mat3 {
        &self.omega
    }

    pub fn omega_dot(&self) -> &Mat3 {
        &self.omega_dot
    }
}

/// Gravity vector subtracted from the rotated specific force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravityVector(pub Vec3);

impl Default for GravityVector {
    fn default() -> Self {
        Self(Vec3::new(0.0, 0.0, STANDARD_GRAVITY))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslationInput {
    /// Accelerometer reading (body-frame specific force), m/s².
    pub accel: Vec3,
    /// Position from the pose source, m.
    pub p_meas: Vec3,
    pub feed: AttitudeFeed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslationRate {
    pub p_dot: Vec3,
    pub v_dot: Vec3,
    pub accel_bias_dot: Vec3,
}

pub fn translation_derivative(
    state: &TranslationState,
    input: &TranslationInput,
    gains: &TranslationGains,
    gravity: &GravityVector,
) -> Result<TranslationRate> {
    if !(input.accel.iter().chain(input.p_meas.iter()).all(|x| x.is_finite())) {
        return Err(Error::NonFinite("translation input"));
    }
    let r = input.feed.r.matrix();
    let om = &input.feed.omega;
    let (k1, k2, k3) = (gains.k1(), gains.k2(), gains.k3());
    let i = Mat3::identity();
    let pe = input.p_meas - state.p;
    let rt_pe = r.transpose() * pe;
    let gamma = om * om - input.feed.omega_dot;
    Ok(TranslationRate {
        p_dot: state.v + pe * k3,
        v_dot: r * (input.accel - state.accel_bias) - gravity.0 + (i * k2 + r * om * r.transpose() * k3) * pe,
        accel_bias_dot: -(i * k1 + om * k2 + gamma * k3) * rt_pe,
    })
}

pub(crate) fn rate_vector(rate: &TranslationRate) -> SVector<f64, 9> {
    TranslationState::new(rate.p_dot, rate.v_dot, rate.accel_bias_dot).to_vector()
}

/// RK4 step with the inputs held over the step.
pub fn translation_step(
    state: &TranslationState,
    input: &TranslationInput,
    gains: &TranslationGains,
    gravity: &GravityVector,
    dt: f64,
) -> Result<TranslationState> {
    translation_step_staged(state, &StageInputs::held(*input), gains, gravity, dt)
}

/// RK4 step with separate inputs at the start, midpoint and end of the step.
pub fn translation_step_staged(
    state: &TranslationState,
    inputs: &StageInputs<TranslationInput>,
    gains: &TranslationGains,
    gravity: &GravityVector,
    dt: f64,
) -> Result<TranslationState> {
    check_step(dt)?;
    let x = rk4(&state.to_vector(), dt, |stage, x| {
        let rate = translation_derivative(&TranslationState::from_vector(x), inputs.at(stage), gains, gravity)?;
        Ok(rate_vector(&rate))
    })?;
    Ok(TranslationState::from_vector(&x))
}

/// Backward difference `(ω_curr − ω_prev) / dt` passed through a first-order
/// low-pass with time constant `tau`, starting from the previous filter
/// output `filtered`. `tau = 0` returns the raw difference.
pub fn omega_dot_estimate(omega_prev: &Vec3, omega_curr: &Vec3, dt: f64, filtered: &Vec3, tau: f64) -> Vec3 {
    let raw = (omega_curr - omega_prev) / dt;
    let alpha = dt / (tau + dt);
    filtered + (raw - filtered) * alpha
}

/// Streaming wrapper around [`omega_dot_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaDotFilter {
    tau: f64,
    prev: Option<Vec3>,
    output: Vec3,
}

impl OmegaDotFilter {
    pub fn new(tau: f64) -> Self {
        Self {
            tau: tau.max(0.0),
            prev: None,
            output: Vec3::zeros(),
        }
    }

    /// Feeds the next sample taken `dt` after the previous one. The first
    /// sample only primes the difference and yields zero.
    pub fn update(&mut self, omega: &Vec3, dt: f64) -> Vec3 {
        if let Some(prev) = self.prev {
            self.output = omega_dot_estimate(&prev, omega, dt, &self.output, self.tau);
        }
        self.prev = Some(*omega);
        self.output
    }

    pub fn output(&self) -> Vec3 {
        self.output
    }
}
