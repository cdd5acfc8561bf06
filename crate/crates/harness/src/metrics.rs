//! Convergence metrics computed from a [`RunRecord`].

use crate::error::{Error, Result};
use crate::sim::RunRecord;

/// Slack added to the attitude envelope.
pub const ENVELOPE_SLACK: f64 = 1e-3;

/// Negated least-squares slope of `ln(value)` against `t` over the samples
/// with `t0 ≤ t ≤ t1`. Positive for a decaying series.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (t0, t1) = window;
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= t0 && t <= t1).collect();
    if pts.len() < 2 || !(t1 > t0) {
        return Err(Error::EmptyWindow { t0, t1 });
    }
    if let Some(&(t, value)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonPositive { t, value });
    }
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, v) in &pts {
        let dt = t - t_mean;
        sxy += dt * (v.ln() - y_mean);
        sxx += dt * dt;
    }
    Ok(-sxy / sxx)
}

/// Level `b̄ / (2c₁)` that `‖q⃗_e‖` decays to before the bias error is learned.
pub fn attitude_threshold(gyro_bias_bound: f64, c1: f64) -> f64 {
    gyro_bias_bound / (2.0 * c1)
}

/// First sample time at which `‖q⃗_e‖ ≤ threshold`.
pub fn first_crossing(record: &RunRecord, threshold: f64) -> Option<f64> {
    record.rows.iter().find(|r| r.qe_norm <= threshold).map(|r| r.t)
}

/// `sup_t ‖bᵍ − b̂ᵍ‖` over the run.
pub fn sup_gyro_bias_err(record: &RunRecord) -> f64 {
    record.rows.iter().map(|r| r.gyro_bias_err_norm).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub holds: bool,
    /// Largest `‖q⃗_e(t)‖ − bound(t)`; nonpositive when the envelope holds.
    pub max_violation: f64,
    pub threshold: f64,
    pub crossing_time: Option<f64>,
    /// First and last sample times at which the bound is exceeded.
    pub violated_between: Option<(f64, f64)>,
}

/// Checks `‖q⃗_e(t)‖ ≤ ‖q⃗_e(0)‖e^{−c₁t} + (b̄/2c₁)(1 − e^{−c₁t}) + ENVELOPE_SLACK`
/// at every sample.
pub fn corollary_envelope_check(record: &RunRecord, c1: f64, b_bar: f64) -> EnvelopeReport {
    let threshold = attitude_threshold(b_bar, c1);
    let qe0 = record.rows.first().map_or(0.0, |r| r.qe_norm);
    let excess: Vec<(f64, f64)> = record
        .rows
        .iter()
        .map(|r| {
            let decay = (-c1 * r.t).exp();
            (
                r.t,
                r.qe_norm - (qe0 * decay + threshold * (1.0 - decay) + ENVELOPE_SLACK),
            )
        })
        .collect();
    let max_violation = excess.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let mut violated = excess.iter().filter(|e| e.1 > 0.0).map(|e| e.0);
    let violated_between = violated
        .next()
        .map(|first| (first, violated.next_back().unwrap_or(first)));
    EnvelopeReport {
        holds: max_violation <= 0.0,
        max_violation,
        threshold,
        crossing_time: first_crossing(record, threshold),
        violated_between,
    }
}

/// Largest `‖q⃗_e‖ − y − ENVELOPE_SLACK`, where `y` solves the comparison
/// equation `ẏ = −c₁|q_e°| y + b̄/2` stepwise with `|q_e°|` taken from the
/// record and held over each step.
pub fn effective_rate_envelope_violation(record: &RunRecord, c1: f64, b_bar: f64) -> f64 {
    let Some(first) = record.rows.first() else {
        return f64::NEG_INFINITY;
    };
    let mut y = first.qe_norm;
    let mut worst = -ENVELOPE_SLACK;
    for w in record.rows.windows(2) {
        let scalar = (1.0 - w[0].qe_norm * w[0].qe_norm).max(0.0).sqrt();
        let rate = c1 * scalar;
        let dt = w[1].t - w[0].t;
        let decay = (-rate * dt).exp();
        y = y * decay + 0.5 * b_bar * (1.0 - decay) / rate;
        worst = worst.max(w[1].qe_norm - y - ENVELOPE_SLACK);
    }
    worst
}

/// Fit window for the attitude decay: from the start to the first crossing.
pub fn attitude_window(crossing: f64) -> (f64, f64) {
    (0.0, crossing)
}

/// Fit window for the translation decay: from twice the attitude crossing
/// time to the end of the run.
pub fn translation_window(crossing: f64, duration: f64) -> (f64, f64) {
    (2.0 * crossing, duration)
}

/// Last time before `series` first drops below `floor`, or the last sample
/// time if it never does.
pub fn time_above_floor(series: &[(f64, f64)], floor: f64) -> Option<f64> {
    let mut last = None;
    for &(t, v) in series {
        if v < floor {
            break;
        }
        last = Some(t);
    }
    last
}

/// Largest single-step increase `s[k+1] − s[k]` over samples with `t ≥ from`.
pub fn max_increase(series: &[(f64, f64)], from: f64) -> f64 {
    series
        .windows(2)
        .filter(|w| w[0].0 >= from)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max)
}
