//! Release gate: every criterion must pass at its stated tolerance.
//! Run with `cargo test -p ehrenfest-core --test acceptance`.

use ehrenfest_core::acceptance::{self, CriterionReport};

const SEED: u64 = 0;

fn assert_criterion(report: CriterionReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_1_exact_counterexample_certificate() {
    assert_criterion(acceptance::criterion_1(SEED));
}

#[test]
fn criterion_2_discontinuity_witnesses() {
    assert_criterion(acceptance::criterion_2(SEED));
}

#[test]
fn criterion_3_first_stage_bump_structure() {
    assert_criterion(acceptance::criterion_3(SEED));
}

#[test]
fn criterion_4_harmonic_identity_residuals() {
    assert_criterion(acceptance::criterion_4(SEED));
}

#[test]
fn criterion_5_convergence_orders() {
    assert_criterion(acceptance::criterion_5(SEED));
}

#[test]
fn criterion_6_conservation_quartic() {
    assert_criterion(acceptance::criterion_6(SEED));
}

#[test]
fn criterion_7_boundedness_vs_blowup() {
    assert_criterion(acceptance::criterion_7(SEED));
}

#[test]
fn criterion_8_cross_integrator_agreement() {
    assert_criterion(acceptance::criterion_8(SEED));
}
