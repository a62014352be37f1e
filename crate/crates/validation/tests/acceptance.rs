//! One test per acceptance criterion. Each writes its verdict line straight
//! to stdout so it shows up without `--nocapture`.

use nshs_validation::*;
use std::io::Write;

fn check(outcome: Outcome) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{outcome}");
    let _ = out.flush();
    assert!(outcome.pass, "{outcome}");
}

#[test]
fn c01_solver_cross_validation() {
    check(solver_cross_validation());
}

#[test]
fn c02_linear_exactness() {
    check(linear_exactness());
}

#[test]
fn c03_kernel_structure() {
    check(kernel_structure());
}

#[test]
fn c04_time_integral_identities() {
    check(time_integral_identities());
}

#[test]
fn c05_analyticity_recovery() {
    check(analyticity_recovery());
}

#[test]
fn c06_weight_battery() {
    check(weight_battery());
}

#[test]
fn c07_dissipation_scaling() {
    check(dissipation_scaling());
}

#[test]
fn c08_inviscid_limit() {
    check(inviscid_limit());
}

#[test]
fn c09_norm_boundedness() {
    check(norm_boundedness());
}

#[test]
fn c10_structural_invariants() {
    check(structural_invariants());
}
