use hierobs::attitude::{
    attitude_step_staged, error_vec_derivative_oracle, AttitudeGains, AttitudeInput, AttitudeState,
};
use hierobs::truth::{corrupt, truth_step};
use hierobs::{error_quat, GravityVector, Quat, SinusoidalProfile, StageInputs, TruthState, Vec3};

const C1: f64 = 20.0;

fn initial_truth() -> TruthState {
    TruthState {
        p: Vec3::zeros(),
        v: Vec3::zeros(),
        q: Quat::new(0.7071, 0.0, 0.7071, 0.0).normalize(),
        accel_bias: Vec3::new(-0.1, 0.4, 0.2),
        gyro_bias: Vec3::new(0.1, -0.02, 0.05),
    }
}

/// Samples of (t, truth, estimate, measured gyro) from a staged attitude run.
fn simulate(dt: f64, duration: f64) -> Vec<(f64, TruthState, AttitudeState, Vec3)> {
    let prof = SinusoidalProfile;
    let g = GravityVector::default();
    let gains = AttitudeGains::new(C1, 60.0).unwrap();
    let meas = |s: &TruthState, t: f64| {
        let (imu, pose) = corrupt(s, t, &prof);
        AttitudeInput {
            gyro: imu.gyro,
            q_meas: pose.q,
        }
    };
    let mut truth = initial_truth();
    let mut est = AttitudeState::new(Quat::IDENTITY, Vec3::zeros());
    let steps = (duration / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        out.push((t, truth, est, meas(&truth, t).gyro));
        let mid = truth_step(&truth, t, dt / 2.0, &g, &prof).unwrap();
        let end = truth_step(&truth, t, dt, &g, &prof).unwrap();
        let stages = StageInputs {
            start: meas(&truth, t),
            mid: meas(&mid, t + dt / 2.0),
            end: meas(&end, t + dt),
        };
        est = attitude_step_staged(&est, &stages, &gains, dt).unwrap();
        truth = end;
    }
    out
}

/// Largest |central difference − oracle| over samples in `window`, raw and
/// after adding `c₁(1 − |q_e°|) q⃗_e + ½ q⃗_e × (b + b̂)`.
fn residuals(dt: f64, window: (f64, f64)) -> (f64, f64) {
    let run = simulate(dt, window.1 + 2.0 * dt);
    let qe_vec = |s: &(f64, TruthState, AttitudeState, Vec3)| error_quat(&s.2.q, &s.1.q).v;
    let (mut raw, mut projected) = (0.0f64, 0.0f64);
    for w in run.windows(3) {
        let (t, truth, est, gyro) = w[1];
        if t < window.0 || t > window.1 {
            continue;
        }
        let qe = error_quat(&est.q, &truth.q);
        let fd = (qe_vec(&w[2]) - qe_vec(&w[0])) / (2.0 * dt);
        let b_e = truth.gyro_bias - est.gyro_bias;
        let oracle = error_vec_derivative_oracle(&qe, &b_e, &gyro, &truth.gyro_bias, &est.gyro_bias, C1);
        raw = raw.max((fd - oracle).norm());
        let gap = qe.v * (C1 * (1.0 - qe.w.abs())) + qe.v.cross(&(truth.gyro_bias + est.gyro_bias)) * 0.5;
        projected = projected.max((fd - oracle - gap).norm());
    }
    (raw, projected)
}

#[test]
fn oracle_tracks_trajectory_near_convergence() {
    let (raw, coarse) = residuals(1e-3, (0.15, 0.5));
    let (_, fine) = residuals(5e-4, (0.15, 0.5));
    println!("near convergence: raw {raw:.3e}, corrected {coarse:.3e} (dt 1e-3), {fine:.3e} (dt 5e-4)");
    assert!(raw < 1e-2, "raw residual {raw:.3e}");
    assert!(coarse < raw / 5.0, "corrected residual {coarse:.3e}");
    assert!(fine < coarse / 1.5, "halving dt: {coarse:.3e} -> {fine:.3e}");
}

#[test]
fn large_errors_carry_the_norm_projection_term() {
    let (raw, coarse) = residuals(1e-3, (0.01, 0.05));
    let (_, fine) = residuals(5e-4, (0.01, 0.05));
    println!("large error: raw {raw:.3e}, corrected {coarse:.3e} (dt 1e-3), {fine:.3e} (dt 5e-4)");
    assert!(raw > 0.3, "raw residual {raw:.3e}");
    assert!(coarse < raw / 10.0, "corrected residual {coarse:.3e}");
    assert!(fine < coarse / 1.5, "halving dt: {coarse:.3e} -> {fine:.3e}");
}

#[test]
fn converges_within_ten_seconds() {
    let run = simulate(1e-3, 10.0);
    let (_, truth, est, _) = run.last().unwrap();
    let qe = error_quat(&est.q, &truth.q);
    assert!(qe.v.norm() < 1e-3, "|q_e| = {:.3e}", qe.v.norm());
    assert!((truth.gyro_bias - est.gyro_bias).norm() < 1e-3);
}
