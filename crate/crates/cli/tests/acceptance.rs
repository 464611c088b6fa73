//! The acceptance suite, one test per criterion. Each test prints a
//! PASS/FAIL line with its measured values before asserting.

use gibbsfree::acceptance::{self, CriterionResult, Tolerances};

const SEED: u64 = 2024;

fn check(result: CriterionResult) {
    println!("{}", result.summary_line());
    assert!(result.passed, "{}", result.summary_line());
}

#[test]
fn criterion_01_standard_sum_convergence() {
    check(acceptance::criterion_1(&Tolerances::default(), SEED));
}

#[test]
fn criterion_02_edge_augmented_convergence_true_jumps() {
    check(acceptance::criterion_2(&Tolerances::default(), SEED));
}

#[test]
fn criterion_03_estimated_jump_convergence() {
    check(acceptance::criterion_3(&Tolerances::default(), SEED));
}

#[test]
fn criterion_04_noiseless_jump_location_order() {
    check(acceptance::criterion_4(&Tolerances::default(), SEED));
}

#[test]
fn criterion_05_noise_robustness() {
    check(acceptance::criterion_5(&Tolerances::default(), SEED));
}

#[test]
fn criterion_06_psnr_2d() {
    check(acceptance::criterion_6(&Tolerances::default(), SEED));
}

#[test]
fn criterion_07_exact_recovery_on_ramp_sums() {
    check(acceptance::criterion_7(&Tolerances::default(), SEED));
}

#[test]
fn criterion_08_scaled_error_boundedness() {
    check(acceptance::criterion_8(&Tolerances::default(), SEED));
}

#[test]
fn criterion_09_oracle_equivalence() {
    check(acceptance::criterion_9(&Tolerances::default(), SEED));
}

#[test]
fn criterion_10_perturbed_jump_error_budget() {
    check(acceptance::criterion_10(&Tolerances::default(), SEED));
}
