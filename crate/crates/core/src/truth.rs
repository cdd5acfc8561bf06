//! Ground-truth rigid-body kinematics and synthetic sensor streams.
//!
//! The profile's specific force `a(t)` is body-frame, so the world
//! acceleration is `R(q) a(t) − g`. Biases are constant over a run.

use nalgebra::SVector;

use crate::error::Result;
use crate::integrate::{check_step, rk4};
use crate::quat::{Quat, Vec3};
use crate::translation::GravityVector;

/// Body-frame specific force and angular velocity as functions of time.
pub trait MotionProfile: Sync {
    fn specific_force(&self, t: f64) -> Vec3;
    fn angular_velocity(&self, t: f64) -> Vec3;
    fn angular_accel(&self, t: f64) -> Vec3;
}

/// `a(t) = (sin t, 2 sin 0.1t, 0.3)` m/s², `ω(t) = (sin 2t, −sin 4t, 2 sin t)` rad/s.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SinusoidalProfile;

impl MotionProfile for SinusoidalProfile {
    fn specific_force(&self, t: f64) -> Vec3 {
        Vec3::new(t.sin(), 2.0 * (0.1 * t).sin(), 0.3)
    }

    fn angular_velocity(&self, t: f64) -> Vec3 {
        Vec3::new((2.0 * t).sin(), -(4.0 * t).sin(), 2.0 * t.sin())
    }

    fn angular_accel(&self, t: f64) -> Vec3 {
        Vec3::new(2.0 * (2.0 * t).cos(), -4.0 * (4.0 * t).cos(), 2.0 * t.cos())
    }
}

impl SinusoidalProfile {
    /// Second derivative of the body rate.
    pub fn angular_jerk(&self, t: f64) -> Vec3 {
        Vec3::new(-4.0 * (2.0 * t).sin(), 16.0 * (4.0 * t).sin(), -2.0 * t.sin())
    }
}

/// Time-invariant specific force and rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantProfile {
    pub specific_force: Vec3,
    pub angular_velocity: Vec3,
}

impl MotionProfile for ConstantProfile {
    fn specific_force(&self, _t: f64) -> Vec3 {
        self.specific_force
    }

    fn angular_velocity(&self, _t: f64) -> Vec3 {
        self.angular_velocity
    }

    fn angular_accel(&self, _t: f64) -> Vec3 {
        Vec3::zeros()
    }
}

/// `(a(t), ω(t))` of [`SinusoidalProfile`].
pub fn truth_signals(t: f64) -> (Vec3, Vec3) {
    let p = SinusoidalProfile;
    (p.specific_force(t), p.angular_velocity(t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthState {
    pub p: Vec3,
    pub v: Vec3,
    pub q: Quat,
    pub accel_bias: Vec3,
    pub gyro_bias: Vec3,
}

impl TruthState {
    fn kinematic_vector(&self) -> SVector<f64, 10> {
        let mut x = SVector::<f64, 10>::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.p);
        x.fixed_rows_mut::<3>(3).copy_from(&self.v);
        x.fixed_rows_mut::<4>(6).copy_from(&SVector::from(self.q.to_array()));
        x
    }

    fn with_kinematics(&self, x: &SVector<f64, 10>) -> Self {
        Self {
            p: x.fixed_rows::<3>(0).into(),
            v: x.fixed_rows::<3>(3).into(),
            q: Quat::new(x[6], x[7], x[8], x[9]),
            ..*self
        }
    }
}

/// RK4 step of `ṗ = v`, `v̇ = R(q) a(t) − g`, `q̇ = ½ q ⊗ (0, ω(t))`, followed by
/// quaternion renormalization.
pub fn truth_step<M: MotionProfile + ?Sized>(
    state: &TruthState,
    t: f64,
    dt: f64,
    gravity: &GravityVector,
    profile: &M,
) -> Result<TruthState> {
    check_step(dt)?;
    let x = rk4(&state.kinematic_vector(), dt, |stage, x| {
        let tau = t + stage.offset(dt);
        let s = state.with_kinematics(x);
        let q = s.q.normalize();
        let r = q.to_rotation()?;
        let q_dot = (s.q * Quat::pure(profile.angular_velocity(tau))) * 0.5;
        let mut d = SVector::<f64, 10>::zeros();
        d.fixed_rows_mut::<3>(0).copy_from(&s.v);
        d.fixed_rows_mut::<3>(3)
            .copy_from(&(r.rotate(&profile.specific_force(tau)) - gravity.0));
        d.fixed_rows_mut::<4>(6).copy_from(&SVector::from(q_dot.to_array()));
        Ok(d)
    })?;
    let mut next = state.with_kinematics(&x);
    next.q = next.q.normalize();
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub accel: Vec3,
    pub gyro: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseMeasurement {
    pub t: f64,
    pub p: Vec3,
    pub q: Quat,
}

/// Bias-corrupted IMU sample and exact pose at time `t`.
pub fn corrupt<M: MotionProfile + ?Sized>(state: &TruthState, t: f64, profile: &M) -> (ImuSample, PoseMeasurement) {
    (
        ImuSample {
            t,
            accel: profile.specific_force(t) + state.accel_bias,
            gyro: profile.angular_velocity(t) + state.gyro_bias,
        },
        PoseMeasurement {
            t,
            p: state.p,
            q: state.q,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::euler;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn table_truth() -> TruthState {
        TruthState {
            p: Vec3::zeros(),
            v: Vec3::zeros(),
            q: Quat::new(0.7071, 0.0, 0.7071, 0.0),
            accel_bias: Vec3::new(-0.1, 0.4, 0.2),
            gyro_bias: Vec3::new(0.1, -0.02, 0.05),
        }
    }

    #[test]
    fn signal_values() {
        let (a, w) = truth_signals(0.0);
        assert_eq!(a, Vec3::new(0.0, 0.0, 0.3));
        assert_eq!(w, Vec3::zeros());
        assert_relative_eq!(truth_signals(FRAC_PI_2).0.x, 1.0, epsilon = 1e-15);
        assert_eq!(SinusoidalProfile.angular_accel(0.0), Vec3::new(2.0, -4.0, 2.0));
    }

    #[test]
    fn angular_derivatives_match_central_differences() {
        let h = 1e-5;
        for k in 0..20 {
            let t = 0.37 * k as f64;
            let p = SinusoidalProfile;
            let fd = (p.angular_velocity(t + h) - p.angular_velocity(t - h)) / (2.0 * h);
            assert!((fd - p.angular_accel(t)).amax() < 1e-8);
            let fd2 = (p.angular_accel(t + h) - p.angular_accel(t - h)) / (2.0 * h);
            assert!((fd2 - p.angular_jerk(t)).amax() < 1e-8);
        }
    }

    #[test]
    fn hover_keeps_position() {
        let q = Quat::new(0.9, 0.1, -0.3, 0.2).normalize();
        let g = GravityVector::default();
        let profile = ConstantProfile {
            specific_force: q.to_rotation().unwrap().matrix().transpose() * g.0,
            angular_velocity: Vec3::zeros(),
        };
        let mut s = TruthState {
            p: Vec3::new(1.0, 2.0, 3.0),
            v: Vec3::zeros(),
            q,
            accel_bias: Vec3::zeros(),
            gyro_bias: Vec3::zeros(),
        };
        for k in 0..1000 {
            s = truth_step(&s, k as f64 * 1e-3, 1e-3, &g, &profile).unwrap();
        }
        assert!((s.p - Vec3::new(1.0, 2.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn force_free_motion_is_exactly_static() {
        let profile = ConstantProfile {
            specific_force: Vec3::zeros(),
            angular_velocity: Vec3::new(0.3, 0.1, -0.2),
        };
        let g = GravityVector(Vec3::zeros());
        let mut s = table_truth();
        let p0 = s.p;
        for k in 0..1000 {
            s = truth_step(&s, k as f64 * 1e-3, 1e-3, &g, &profile).unwrap();
            assert_eq!(s.p, p0);
        }
    }

    #[test]
    fn norm_is_preserved() {
        let g = GravityVector::default();
        let mut s = table_truth();
        s.q = s.q.normalize();
        for k in 0..2000 {
            s = truth_step(&s, k as f64 * 1e-3, 1e-3, &g, &SinusoidalProfile).unwrap();
            assert!((s.q.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_agrees_with_fine_euler() {
        let g = GravityVector::default();
        let mut s = table_truth();
        s.q = s.q.normalize();
        let t = 0.3;
        let dt = 1e-3;
        let rk = truth_step(&s, t, dt, &g, &SinusoidalProfile).unwrap();
        let mut x = s.kinematic_vector();
        let n = 100;
        let h = dt / n as f64;
        for i in 0..n {
            let tau = t + i as f64 * h;
            x = euler(&x, h, |_, x| {
                let st = s.with_kinematics(x);
                let r = st.q.normalize().to_rotation()?;
                let p = SinusoidalProfile;
                let qd = (st.q * Quat::pure(p.angular_velocity(tau))) * 0.5;
                let mut d = SVector::<f64, 10>::zeros();
                d.fixed_rows_mut::<3>(0).copy_from(&st.v);
                d.fixed_rows_mut::<3>(3)
                    .copy_from(&(r.rotate(&p.specific_force(tau)) - g.0));
                d.fixed_rows_mut::<4>(6).copy_from(&SVector::from(qd.to_array()));
                Ok(d)
            })
            .unwrap();
        }
        let euler_state = s.with_kinematics(&x);
        assert!((rk.p - euler_state.p).norm() < dt * dt);
        assert!((rk.v - euler_state.v).norm() < dt * dt * 10.0);
        assert!((rk.q - euler_state.q.normalize()).norm() < dt * dt);
    }

    #[test]
    fn corrupted_samples() {
        let s = table_truth();
        let (imu, pose) = corrupt(&s, 0.0, &SinusoidalProfile);
        assert_relative_eq!(imu.accel, Vec3::new(-0.1, 0.4, 0.5), epsilon = 1e-15);
        assert_eq!(imu.gyro, s.gyro_bias);
        assert_eq!(pose.p, s.p);
        assert_eq!(pose.q, s.q);
        let clean = TruthState {
            accel_bias: Vec3::zeros(),
            gyro_bias: Vec3::zeros(),
            ..s
        };
        let (imu, _) = corrupt(&clean, 1.3, &SinusoidalProfile);
        let (a, w) = truth_signals(1.3);
        assert_eq!((imu.accel, imu.gyro), (a, w));
    }
}
