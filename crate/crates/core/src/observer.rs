//! Cascade of the orientation observer into the translation observer.
//!
//! The translation observer is fed `R̂ = R(q̂)`, `Ω̂ = [ω_m − b̂]×` and an
//! estimate of `Ω̂̇`. Both observers are integrated as one RK4 system so the
//! translation stages see the attitude estimate at the same stage time.

use nalgebra::SVector;

use crate::attitude::{self, AttitudeGains, AttitudeInput, AttitudeState};
use crate::error::Result;
use crate::integrate::{check_step, rk4, StageInputs};
use crate::quat::Vec3;
use crate::synthesis::TranslationGains;
use crate::translation::{self, AttitudeFeed, GravityVector, OmegaDotFilter, TranslationInput, TranslationState};

/// How `Ω̂̇` is formed from the differentiated gyro signal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OmegaDotMode {
    /// `Ω̂̇ = [ω̇_m]×`: the bias-estimate rate is neglected.
    #[default]
    GyroOnly,
    /// `Ω̂̇ = [ω̇_m − b̂̇]×` with the analytic bias-estimate rate.
    WithBiasRate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HierarchicalState {
    pub attitude: AttitudeState,
    pub translation: TranslationState,
}

impl HierarchicalState {
    fn to_vector(self) -> SVector<f64, 16> {
        let mut x = SVector::<f64, 16>::zeros();
        x.fixed_rows_mut::<7>(0).copy_from(&self.attitude.to_vector());
        x.fixed_rows_mut::<9>(7).copy_from(&self.translation.to_vector());
        x
    }

    fn from_vector(x: &SVector<f64, 16>) -> Self {
        Self {
            attitude: AttitudeState::from_vector(&x.fixed_rows::<7>(0).into()),
            translation: TranslationState::from_vector(&x.fixed_rows::<9>(7).into()),
        }
    }
}

/// IMU and pose values at one stage time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub gyro: Vec3,
    pub accel: Vec3,
    pub q_meas: crate::quat::Quat,
    pub p_meas: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObserverParams {
    pub attitude: AttitudeGains,
    pub translation: TranslationGains,
    pub gravity: GravityVector,
    pub omega_dot_mode: OmegaDotMode,
}

/// One RK4 step of the cascaded observer. `gyro_rate` carries the estimate
/// of `ω̇_m` at each stage.
pub fn hierarchical_step(
    state: &HierarchicalState,
    inputs: &StageInputs<Measurement>,
    gyro_rate: &StageInputs<Vec3>,
    params: &ObserverParams,
    dt: f64,
) -> Result<HierarchicalState> {
    check_step(dt)?;
    let x = rk4(&state.to_vector(), dt, |stage, x| {
        let s = HierarchicalState::from_vector(x);
        let m = inputs.at(stage);
        let att_rate = attitude::attitude_derivative(
            &s.attitude,
            &AttitudeInput {
                gyro: m.gyro,
                q_meas: m.q_meas,
            },
            &params.attitude,
        )?;
        let mut omega_dot = *gyro_rate.at(stage);
        if params.omega_dot_mode == OmegaDotMode::WithBiasRate {
            omega_dot -= att_rate.gyro_bias_dot;
        }
        let feed = AttitudeFeed::from_rates(
            s.attitude.q.normalize().to_rotation()?,
            &(m.gyro - s.attitude.gyro_bias),
            &omega_dot,
        );
        let tr_rate = translation::translation_derivative(
            &s.translation,
            &TranslationInput {
                accel: m.accel,
                p_meas: m.p_meas,
                feed,
            },
            &params.translation,
            &params.gravity,
        )?;
        let mut d = SVector::<f64, 16>::zeros();
        d.fixed_rows_mut::<7>(0).copy_from(&attitude::rate_vector(&att_rate));
        d.fixed_rows_mut::<9>(7).copy_from(&translation::rate_vector(&tr_rate));
        Ok(d)
    })?;
    let mut next = HierarchicalState::from_vector(&x);
    next.attitude.q = next.attitude.q.normalize();
    Ok(next)
}

/// Stateful cascaded observer with a built-in gyro differentiator.
#[derive(Clone, Debug)]
pub struct HierarchicalObserver {
    state: HierarchicalState,
    params: ObserverParams,
    filter: OmegaDotFilter,
}

impl HierarchicalObserver {
    pub fn new(state: HierarchicalState, params: ObserverParams, lowpass_tau: f64) -> Self {
        Self {
            state,
            params,
            filter: OmegaDotFilter::new(lowpass_tau),
        }
    }

    pub fn state(&self) -> &HierarchicalState {
        &self.state
    }

    pub fn params(&self) -> &ObserverParams {
        &self.params
    }

    /// Advances by `dt`, differentiating the gyro samples taken at step starts.
    /// The derivative estimate is held over the step.
    pub fn step(&mut self, inputs: &StageInputs<Measurement>, dt: f64) -> Result<&HierarchicalState> {
        check_step(dt)?;
        let rate = self.filter.update(&inputs.start.gyro, dt);
        self.step_with_gyro_rate(inputs, &StageInputs::held(rate), dt)
    }

    /// Advances by `dt` with an externally supplied `ω̇_m`.
    pub fn step_with_gyro_rate(
        &mut self,
        inputs: &StageInputs<Measurement>,
        gyro_rate: &StageInputs<Vec3>,
        dt: f64,
    ) -> Result<&HierarchicalState> {
        self.state = hierarchical_step(&self.state, inputs, gyro_rate, &self.params, dt)?;
        Ok(&self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Quat;

    fn params(mode: OmegaDotMode) -> ObserverParams {
        ObserverParams {
            attitude: AttitudeGains::new(20.0, 60.0).unwrap(),
            translation: TranslationGains::new(64.0, 48.0, 12.0).unwrap(),
            gravity: GravityVector::default(),
            omega_dot_mode: mode,
        }
    }

    #[test]
    fn matches_separate_steps_when_attitude_is_exact() {
        // With q̂ = q and b̂ = b the attitude derivative vanishes, so the cascade
        // must reproduce a plain translation step with the same feed.
        let q = Quat::new(0.9, 0.1, -0.3, 0.2).normalize();
        let bias = Vec3::new(0.1, -0.02, 0.05);
        let w = Vec3::new(0.0, 0.0, 0.0);
        let m = Measurement {
            gyro: w + bias,
            accel: Vec3::new(0.2, 0.1, 0.3),
            q_meas: q,
            p_meas: Vec3::new(0.5, 0.5, 0.5),
        };
        let s = HierarchicalState {
            attitude: AttitudeState::new(q, bias),
            translation: TranslationState::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::zeros()),
        };
        let wd = Vec3::new(0.3, -0.1, 0.2);
        let p = params(OmegaDotMode::WithBiasRate);
        let next = hierarchical_step(&s, &StageInputs::held(m), &StageInputs::held(wd), &p, 1e-3).unwrap();
        let feed = AttitudeFeed::from_rates(q.normalize().to_rotation().unwrap(), &w, &wd);
        let tr = translation::translation_step(
            &s.translation,
            &TranslationInput {
                accel: m.accel,
                p_meas: m.p_meas,
                feed,
            },
            &p.translation,
            &p.gravity,
            1e-3,
        )
        .unwrap();
        assert_eq!(next.translation, tr);
        assert_eq!(next.attitude.gyro_bias, bias);
    }

    #[test]
    fn stateful_observer_primes_the_differentiator() {
        let m = Measurement {
            gyro: Vec3::new(0.1, 0.0, 0.0),
            accel: Vec3::new(0.0, 0.0, 9.80665),
            q_meas: Quat::IDENTITY,
            p_meas: Vec3::zeros(),
        };
        let s = HierarchicalState {
            attitude: AttitudeState::new(Quat::IDENTITY, Vec3::zeros()),
            translation: TranslationState::new(Vec3::zeros(), Vec3::zeros(), Vec3::zeros()),
        };
        let mut obs = HierarchicalObserver::new(s, params(OmegaDotMode::GyroOnly), 0.005);
        obs.step(&StageInputs::held(m), 1e-3).unwrap();
        assert!(obs.state().translation.p.norm() < 1e-9);
        assert!(obs.step(&StageInputs::held(m), -1.0).is_err());
    }
}
