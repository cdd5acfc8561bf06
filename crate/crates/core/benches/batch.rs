use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hierobs::attitude::{self, AttitudeGains, AttitudeInput, AttitudeState};
use hierobs::batch;
use hierobs::integrate::StageInputs;
use hierobs::synthesis;
use hierobs::truth::{self, MotionProfile, SinusoidalProfile};
use hierobs::{GravityVector, Quat, TruthState, Vec3};

/// Attitude error after `steps` steps from a random initial estimate.
fn attitude_trial(seed: &u64, steps: usize) -> f64 {
    let mut rng = StdRng::seed_from_u64(*seed);
    let dt = 1e-3;
    let gains = AttitudeGains::new(20.0, 60.0).unwrap();
    let g = GravityVector::default();
    let mut truth = TruthState {
        p: Vec3::zeros(),
        v: Vec3::zeros(),
        q: Quat::random(&mut rng),
        accel_bias: Vec3::zeros(),
        gyro_bias: Vec3::from_fn(|_, _| rng.random_range(-0.1..0.1)),
    };
    let mut est = AttitudeState::new(Quat::random(&mut rng), Vec3::zeros());
    let profile = SinusoidalProfile;
    for k in 0..steps {
        let t = k as f64 * dt;
        let next = truth::truth_step(&truth, t, dt, &g, &profile).unwrap();
        let input = |s: &TruthState, tau: f64| AttitudeInput {
            gyro: profile.angular_velocity(tau) + s.gyro_bias,
            q_meas: s.q,
        };
        let mid = truth::truth_step(&truth, t, 0.5 * dt, &g, &profile).unwrap();
        let stages = StageInputs {
            start: input(&truth, t),
            mid: input(&mid, t + 0.5 * dt),
            end: input(&next, t + dt),
        };
        est = attitude::attitude_step_staged(&est, &stages, &gains, dt).unwrap();
        truth = next;
    }
    hierobs::error_quat(&est.q, &truth.q).v.norm()
}

fn bench_monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("attitude_monte_carlo");
    group.sample_size(10);
    for trials in [16usize, 64] {
        let seeds: Vec<u64> = (0..trials as u64).collect();
        group.throughput(Throughput::Elements(trials as u64));
        group.bench_with_input(BenchmarkId::new("sequential", trials), &seeds, |b, s| {
            b.iter(|| batch::map_seq(s, |seed| attitude_trial(seed, 500)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", trials), &seeds, |b, s| {
            b.iter(|| batch::map_par(s, |seed| attitude_trial(seed, 500)))
        });
    }
    group.finish();
}

fn bench_observability_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("observability_sweep");
    let rotations = batch::random_rotations(10_000, 11);
    group.throughput(Throughput::Elements(rotations.len() as u64));
    group.bench_function("sequential", |b| {
        b.iter(|| batch::map_seq(&rotations, synthesis::check_uniform_observability))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| batch::map_par(&rotations, synthesis::check_uniform_observability))
    });
    group.finish();
}

criterion_group!(benches, bench_monte_carlo, bench_observability_sweep);
criterion_main!(benches);
