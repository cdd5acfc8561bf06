//! The acceptance suite, one test per criterion. Each prints its verdict
//! line; run with `--nocapture` to see them all.

use hierobs_harness::verify::criterion;

fn check(id: u8) {
    let outcome = criterion(id);
    println!("{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn criterion_01_gain_reproduction() {
    check(1);
}

#[test]
fn criterion_02_observability_determinant() {
    check(2);
}

#[test]
fn criterion_03_attitude_contraction_jacobian() {
    check(3);
}

#[test]
fn criterion_04_attitude_envelope_and_decay_rate() {
    check(4);
}

#[test]
fn criterion_05_lyapunov_monotonicity() {
    check(5);
}

#[test]
fn criterion_06_true_feed_translation_contraction() {
    check(6);
}

#[test]
fn criterion_07_hierarchical_convergence() {
    check(7);
}

#[test]
fn criterion_08_coordinate_change_oracle() {
    check(8);
}

#[test]
fn criterion_09_lmi_certificate() {
    check(9);
}

#[test]
fn criterion_10_sign_flip_continuity() {
    check(10);
}
