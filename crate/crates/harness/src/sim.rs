//! Co-simulation of ground truth and the observers at a fixed step.
//!
//! Every observer stage sees the sensors at its own time: the truth is
//! advanced by half a step for the midpoint stage, so the RK4 stages of the
//! observer and of the truth line up.

use hierobs::attitude::{attitude_step_staged, AttitudeDiagnostics, AttitudeInput, AttitudeState};
use hierobs::observer::{hierarchical_step, Measurement, ObserverParams};
use hierobs::synthesis::metric;
use hierobs::translation::{translation_step_staged, OmegaDotFilter};
use hierobs::truth::{corrupt, truth_step};
use hierobs::{
    skew, AttitudeFeed, ContractionCertificate, HierarchicalState, MotionProfile, OmegaDotMode, SinusoidalProfile,
    StageInputs, TranslationInput, TranslationState, TruthState, Vec3,
};

use crate::config::{FeedMode, OmegaDotSource, RunConfig};
use crate::error::Result;

/// One sample of a run: truth, estimates and error metrics at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub t: f64,
    pub p: [f64; 3],
    pub v: [f64; 3],
    pub q: [f64; 4],
    pub accel_bias: [f64; 3],
    pub gyro_bias: [f64; 3],
    pub q_hat: [f64; 4],
    pub gyro_bias_hat: [f64; 3],
    pub p_hat: [f64; 3],
    pub v_hat: [f64; 3],
    pub accel_bias_hat: [f64; 3],
    /// `‖q⃗_e‖`.
    pub qe_norm: f64,
    /// `‖bᵍ − b̂ᵍ‖`.
    pub gyro_bias_err_norm: f64,
    /// Attitude Lyapunov value.
    pub lyapunov: f64,
    /// `x_e = [p − p̂; v − v̂; bᵃ − b̂ᵃ]`.
    pub xe: [f64; 9],
    /// `x_eᵀ M(t) x_e` with `M` built from the true attitude and rates.
    pub xe_metric: f64,
}

pub const COLUMNS: [&str; 46] = [
    "t",
    "p_x",
    "p_y",
    "p_z",
    "v_x",
    "v_y",
    "v_z",
    "q_w",
    "q_x",
    "q_y",
    "q_z",
    "ba_x",
    "ba_y",
    "ba_z",
    "bg_x",
    "bg_y",
    "bg_z",
    "qhat_w",
    "qhat_x",
    "qhat_y",
    "qhat_z",
    "bghat_x",
    "bghat_y",
    "bghat_z",
    "phat_x",
    "phat_y",
    "phat_z",
    "vhat_x",
    "vhat_y",
    "vhat_z",
    "bahat_x",
    "bahat_y",
    "bahat_z",
    "qe_norm",
    "bge_norm",
    "lyapunov",
    "xe_px",
    "xe_py",
    "xe_pz",
    "xe_vx",
    "xe_vy",
    "xe_vz",
    "xe_bx",
    "xe_by",
    "xe_bz",
    "xe_metric",
];

impl Row {
    pub fn values(&self) -> [f64; 46] {
        let mut out = [0.0; 46];
        let parts: [&[f64]; 16] = [
            &[self.t],
            &self.p,
            &self.v,
            &self.q,
            &self.accel_bias,
            &self.gyro_bias,
            &self.q_hat,
            &self.gyro_bias_hat,
            &self.p_hat,
            &self.v_hat,
            &self.accel_bias_hat,
            &[self.qe_norm],
            &[self.gyro_bias_err_norm],
            &[self.lyapunov],
            &self.xe,
            &[self.xe_metric],
        ];
        let mut i = 0;
        for part in parts {
            out[i..i + part.len()].copy_from_slice(part);
            i += part.len();
        }
        out
    }

    pub fn from_values(x: &[f64; 46]) -> Self {
        let take = |start: usize, n: usize| &x[start..start + n];
        Self {
            t: x[0],
            p: take(1, 3).try_into().unwrap(),
            v: take(4, 3).try_into().unwrap(),
            q: take(7, 4).try_into().unwrap(),
            accel_bias: take(11, 3).try_into().unwrap(),
            gyro_bias: take(14, 3).try_into().unwrap(),
            q_hat: take(17, 4).try_into().unwrap(),
            gyro_bias_hat: take(21, 3).try_into().unwrap(),
            p_hat: take(24, 3).try_into().unwrap(),
            v_hat: take(27, 3).try_into().unwrap(),
            accel_bias_hat: take(30, 3).try_into().unwrap(),
            qe_norm: x[33],
            gyro_bias_err_norm: x[34],
            lyapunov: x[35],
            xe: take(36, 9).try_into().unwrap(),
            xe_metric: x[45],
        }
    }

    /// `‖x_e‖`.
    pub fn xe_norm(&self) -> f64 {
        self.xe.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Time series of a run, one row per integration step including `t = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<Row>,
}

impl RunRecord {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn last(&self) -> Option<&Row> {
        self.rows.last()
    }

    pub fn series(&self, f: impl Fn(&Row) -> f64) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, f(r))).collect()
    }
}

struct RowContext<'a> {
    cfg: &'a RunConfig,
    cert: ContractionCertificate,
    profile: SinusoidalProfile,
}

impl RowContext<'_> {
    fn row(&self, t: f64, truth: &TruthState, est: &HierarchicalState) -> Result<Row> {
        let diag = AttitudeDiagnostics::new(&est.attitude, &truth.q, &truth.gyro_bias, &self.cfg.attitude_gains()?);
        let tr = &est.translation;
        let xe = TranslationState::new(truth.p - tr.p, truth.v - tr.v, truth.accel_bias - tr.accel_bias).stacked();
        let m = metric(
            truth.q.to_rotation()?.matrix(),
            &skew(&self.profile.angular_velocity(t)),
            &skew(&self.profile.angular_accel(t)),
            &self.cert.p,
        )?;
        Ok(Row {
            t,
            p: truth.p.into(),
            v: truth.v.into(),
            q: truth.q.to_array(),
            accel_bias: truth.accel_bias.into(),
            gyro_bias: truth.gyro_bias.into(),
            q_hat: est.attitude.q.to_array(),
            gyro_bias_hat: est.attitude.gyro_bias.into(),
            p_hat: tr.p.into(),
            v_hat: tr.v.into(),
            accel_bias_hat: tr.accel_bias.into(),
            qe_norm: diag.qe.v.norm(),
            gyro_bias_err_norm: diag.gyro_bias_err.norm(),
            lyapunov: diag.lyapunov,
            xe: xe.into(),
            xe_metric: xe.dot(&(m * xe)),
        })
    }
}

/// Runs the configured scenario on the sinusoidal reference trajectory.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let profile = SinusoidalProfile;
    let dt = cfg.sim.dt;
    let gravity = cfg.gravity();
    let attitude_gains = cfg.attitude_gains()?;
    let translation_gains = cfg.translation_gains()?;
    let params = ObserverParams {
        attitude: attitude_gains,
        translation: translation_gains,
        gravity,
        omega_dot_mode: if cfg.sim.omega_dot_bias_rate {
            OmegaDotMode::WithBiasRate
        } else {
            OmegaDotMode::GyroOnly
        },
    };
    let ctx = RowContext {
        cfg,
        cert: ContractionCertificate::from_lyapunov(
            &translation_gains,
            cfg.gains.lambda,
            &ContractionCertificate::output_weight(),
        )?,
        profile,
    };

    let ti = cfg.truth_init();
    let mut truth = TruthState {
        p: ti.p,
        v: ti.v,
        q: ti.q,
        accel_bias: ti.accel_bias,
        gyro_bias: ti.gyro_bias,
    };
    let ei = cfg.estimate_init();
    let mut est = HierarchicalState {
        attitude: AttitudeState::new(ei.q, ei.gyro_bias),
        translation: TranslationState::new(ei.p, ei.v, ei.accel_bias),
    };
    let omega_dot_source = cfg.omega_dot_source();
    let mut filter = OmegaDotFilter::new(cfg.sim.lowpass_tau);

    let steps = cfg.steps();
    let mut rows = Vec::with_capacity(steps + 1);
    rows.push(ctx.row(0.0, &truth, &est)?);
    let mut pose = (truth.p, truth.q);
    for k in 0..steps {
        let t = k as f64 * dt;
        let truths = StageInputs {
            start: truth,
            mid: truth_step(&truth, t, 0.5 * dt, &gravity, &profile)?,
            end: truth_step(&truth, t, dt, &gravity, &profile)?,
        };
        let times = StageInputs {
            start: t,
            mid: t + 0.5 * dt,
            end: t + dt,
        };
        if k % cfg.sim.pose_decimation == 0 {
            pose = (truth.p, truth.q);
        }
        let measure = |s: &TruthState, tau: f64| {
            let (imu, exact) = corrupt(s, tau, &profile);
            let (p_meas, q) = if cfg.sim.pose_decimation > 1 {
                pose
            } else {
                (exact.p, exact.q)
            };
            let flipped = cfg.sim.flip_sign_at.is_some_and(|t_flip| tau >= t_flip);
            Measurement {
                gyro: imu.gyro,
                accel: imu.accel,
                q_meas: if flipped { -q } else { q },
                p_meas,
            }
        };
        let inputs = if cfg.sim.hold_inputs {
            StageInputs::held(measure(&truth, t))
        } else {
            StageInputs {
                start: measure(&truths.start, times.start),
                mid: measure(&truths.mid, times.mid),
                end: measure(&truths.end, times.end),
            }
        };

        est = match cfg.sim.feed {
            FeedMode::Estimated => {
                let gyro_rate = match omega_dot_source {
                    OmegaDotSource::Fd => StageInputs::held(filter.update(&inputs.start.gyro, dt)),
                    _ => times.map(|tau| profile.angular_accel(*tau)),
                };
                hierarchical_step(&est, &inputs, &gyro_rate, &params, dt)?
            }
            FeedMode::True => {
                let omega_dot = match omega_dot_source {
                    OmegaDotSource::Fd => StageInputs::held(filter.update(&profile.angular_velocity(t), dt)),
                    _ => times.map(|tau| profile.angular_accel(*tau)),
                };
                let attitude = attitude_step_staged(
                    &est.attitude,
                    &inputs.map(|m| AttitudeInput {
                        gyro: m.gyro,
                        q_meas: m.q_meas,
                    }),
                    &attitude_gains,
                    dt,
                )?;
                let feed_at = |s: &TruthState, tau: f64, wd: &Vec3| -> Result<AttitudeFeed> {
                    Ok(AttitudeFeed::from_rates(
                        s.q.to_rotation()?,
                        &profile.angular_velocity(tau),
                        wd,
                    ))
                };
                let tr_inputs = StageInputs {
                    start: tr_input(&inputs.start, feed_at(&truths.start, times.start, &omega_dot.start)?),
                    mid: tr_input(&inputs.mid, feed_at(&truths.mid, times.mid, &omega_dot.mid)?),
                    end: tr_input(&inputs.end, feed_at(&truths.end, times.end, &omega_dot.end)?),
                };
                let translation =
                    translation_step_staged(&est.translation, &tr_inputs, &translation_gains, &gravity, dt)?;
                HierarchicalState { attitude, translation }
            }
        };
        truth = truths.end;
        rows.push(ctx.row(times.end, &truth, &est)?);
    }
    Ok(RunRecord { rows })
}

fn tr_input(m: &Measurement, feed: AttitudeFeed) -> TranslationInput {
    TranslationInput {
        accel: m.accel,
        p_meas: m.p_meas,
        feed,
    }
}

/// One row of the truth and measurement streams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthRow {
    pub t: f64,
    pub truth: TruthState,
    pub accel_meas: Vec3,
    pub gyro_meas: Vec3,
}

/// Truth trajectory with the corrupted IMU samples, one row per step.
pub fn truth_stream(cfg: &RunConfig) -> Result<Vec<TruthRow>> {
    cfg.validate()?;
    let profile = SinusoidalProfile;
    let gravity = cfg.gravity();
    let ti = cfg.truth_init();
    let mut truth = TruthState {
        p: ti.p,
        v: ti.v,
        q: ti.q,
        accel_bias: ti.accel_bias,
        gyro_bias: ti.gyro_bias,
    };
    let steps = cfg.steps();
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * cfg.sim.dt;
        let (imu, _) = corrupt(&truth, t, &profile);
        out.push(TruthRow {
            t,
            truth,
            accel_meas: imu.accel,
            gyro_meas: imu.gyro,
        });
        if k < steps {
            truth = truth_step(&truth, t, cfg.sim.dt, &gravity, &profile)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(feed: FeedMode) -> RunConfig {
        let mut cfg = RunConfig::table1();
        cfg.sim.duration = 0.5;
        cfg.sim.feed = feed;
        cfg
    }

    #[test]
    fn row_values_round_trip() {
        let rec = run_simulation(&short(FeedMode::Estimated)).unwrap();
        for r in &rec.rows {
            assert_eq!(Row::from_values(&r.values()), *r);
        }
        assert_eq!(rec.len(), 501);
        assert!(rec.rows.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn observer_at_truth_stays_there() {
        for feed in [FeedMode::Estimated, FeedMode::True] {
            let mut cfg = short(feed);
            cfg.sim.duration = 2.0;
            cfg.estimate = cfg.truth.clone();
            cfg.truth.gyro_bias = [0.0; 3];
            cfg.truth.accel_bias = [0.0; 3];
            cfg.estimate.gyro_bias = [0.0; 3];
            cfg.estimate.accel_bias = [0.0; 3];
            let rec = run_simulation(&cfg).unwrap();
            for r in &rec.rows {
                assert!(r.qe_norm <= 1e-9, "{feed:?} qe {}", r.qe_norm);
                assert!(r.gyro_bias_err_norm <= 1e-9);
                assert!(r.xe_norm() <= 1e-9, "{feed:?} xe {} at {}", r.xe_norm(), r.t);
            }
        }
    }

    #[test]
    fn truth_stream_matches_run_truth() {
        let cfg = short(FeedMode::Estimated);
        let rec = run_simulation(&cfg).unwrap();
        let stream = truth_stream(&cfg).unwrap();
        assert_eq!(stream.len(), rec.len());
        for (s, r) in stream.iter().zip(&rec.rows) {
            assert_eq!(s.truth.p, Vec3::from(r.p));
            assert_eq!(s.truth.q.to_array(), r.q);
        }
    }
}
