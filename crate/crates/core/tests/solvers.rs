use nshs_core::biot_savart::BiotSavart;
use nshs_core::field::{ModeField, RunConfig, VorticityState};
use nshs_core::kernels::{apply_kernel, green_resolved};
use nshs_core::solvers::*;
use nshs_core::C64;
use std::sync::Arc;

fn config(nu: f64, k: usize, t: f64) -> RunConfig {
    RunConfig { nu, k, t_final: t, ny: 96, dt: 1e-3, snapshot_every: 5, ..RunConfig::default() }
}

fn grid_for(cfg: &RunConfig) -> Arc<nshs_core::YGrid> {
    Arc::new(cfg.grid().unwrap())
}

fn max_diff(a: &VorticityState, b: &VorticityState) -> f64 {
    a.difference(b).max_abs()
}

fn compatible(datum: Datum, amp: f64, cfg: &RunConfig) -> VorticityState {
    let g = grid_for(cfg);
    let raw = initial_datum(datum, amp, cfg, g.clone());
    project_compatible(&raw, &BiotSavart::new(g, cfg.k))
}

#[test]
fn zero_datum_stays_zero() {
    let cfg = config(0.05, 4, 0.02);
    let zero = VorticityState::zeros(4, grid_for(&cfg));
    for kind in [SolverKind::Mild, SolverKind::Direct, SolverKind::Euler] {
        let tr = run(&cfg, &zero, kind).unwrap();
        assert!(tr.failure.is_none());
        assert_eq!(tr.final_state().max_abs(), 0.0, "{}", kind.name());
        assert!((tr.final_state().time - 0.02).abs() < 1e-12);
    }
}

#[test]
fn runs_are_bitwise_deterministic() {
    let cfg = config(0.05, 4, 0.02);
    let init = compatible(Datum::Analytic, 1.0, &cfg);
    let a = run(&cfg, &init, SolverKind::Mild).unwrap();
    let b = run(&cfg, &init, SolverKind::Mild).unwrap();
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        for (m, n) in x.modes.iter().zip(&y.modes) {
            assert!(m.values.iter().zip(&n.values).all(|(u, v)| u.re.to_bits() == v.re.to_bits() && u.im.to_bits() == v.im.to_bits()));
        }
    }
}

#[test]
fn neumann_mode_matches_closed_form() {
    // xi = 0, linear: even extension of e^{-y^2} under the heat flow
    let mut cfg = config(0.1, 2, 0.1);
    cfg.ny = 128;
    let g = grid_for(&cfg);
    let init = VorticityState::from_profiles(2, g.clone(), |xi, y| if xi == 0 { C64::new((-y * y).exp(), 0.0) } else { C64::new(0.0, 0.0) });
    let mut solver = Solver::new(&cfg, g.clone(), SolverKind::Mild).unwrap();
    solver.linear = true;
    let tr = run_with(&mut solver, &init);
    let s = 1.0 + 4.0 * cfg.nu * cfg.t_final;
    let fin = tr.final_state().mode(0);
    for (v, &y) in fin.values.iter().zip(&g.nodes) {
        let exact = (-y * y / s).exp() / s.sqrt();
        assert!((v.re - exact).abs() < 1e-6, "y={y}: {} vs {exact}", v.re);
    }
}

#[test]
fn linear_mild_matches_green_function() {
    let mut cfg = config(0.1, 3, 0.1);
    cfg.ny = 128;
    let g = grid_for(&cfg);
    let init = VorticityState::from_profiles(3, g.clone(), |xi, y| C64::new(1.0, 0.5 * xi as f64) * y * (-y * y).exp() / (1.0 + xi as f64));
    let mut solver = Solver::new(&cfg, g.clone(), SolverKind::Mild).unwrap();
    solver.linear = true;
    let tr = run_with(&mut solver, &init);
    let fin = tr.final_state();
    for xi in 0..=3i64 {
        let kernel = green_resolved(xi, cfg.t_final, cfg.nu, g.clone()).unwrap();
        let expected = apply_kernel(&kernel, init.mode(xi));
        let scale = init.mode(xi).max_abs();
        for (i, (a, b)) in fin.mode(xi).values.iter().zip(&expected.values).enumerate() {
            assert!((a - b).norm() < 1e-6 * scale, "xi={xi} y={}: {a} vs {b}", g.nodes[i]);
        }
    }
}

#[test]
fn energy_budget_closes() {
    let cfg = config(0.02, 6, 0.1);
    let init = compatible(Datum::Analytic, 1.0, &cfg);
    let tr = run(&cfg, &init, SolverKind::Mild).unwrap();
    assert!(tr.failure.is_none());
    let e0 = tr.diagnostics.first().unwrap().energy;
    let e1 = tr.diagnostics.last().unwrap().energy;
    let diss = tr.dissipation();
    assert!(((e0 - e1) - diss).abs() <= 1e-3 * diss, "dE = {} vs {}", e0 - e1, diss);
}

#[test]
fn compatibility_is_conserved() {
    let cfg = config(0.02, 6, 0.1);
    let init = compatible(Datum::Analytic, 1.0, &cfg);
    let tr = run(&cfg, &init, SolverKind::Mild).unwrap();
    let scale = init.max_abs();
    assert!(tr.diagnostics.iter().all(|d| d.compatibility <= 1e-10 * scale), "{:?}", tr.diagnostics.iter().map(|d| d.compatibility).fold(0.0, f64::max));
}

#[test]
fn euler_conserves_energy_and_enstrophy() {
    let cfg = config(0.02, 6, 0.1);
    let init = compatible(Datum::Analytic, 1.0, &cfg);
    let tr = run(&cfg, &init, SolverKind::Euler).unwrap();
    assert!(tr.failure.is_none());
    let (a, b) = (tr.diagnostics.first().unwrap(), tr.diagnostics.last().unwrap());
    assert!((a.energy - b.energy).abs() <= 1e-5 * a.energy, "{} vs {}", a.energy, b.energy);
    assert!((a.enstrophy - b.enstrophy).abs() <= 1e-4 * a.enstrophy, "{} vs {}", a.enstrophy, b.enstrophy);
    assert_eq!(tr.dissipation(), 0.0);
}

#[test]
fn euler_refuses_large_courant_number() {
    let mut cfg = config(0.02, 6, 0.1);
    cfg.dt = 5e-2;
    let init = compatible(Datum::Analytic, 50.0, &cfg);
    let tr = run(&cfg, &init, SolverKind::Euler).unwrap();
    let msg = tr.failure.expect("step must be refused");
    assert!(msg.contains("Courant"), "{msg}");
    assert_eq!(tr.snapshots.len(), 1);
}

#[test]
fn mild_and_direct_agree() {
    let cfg = config(0.05, 4, 0.05);
    let init = compatible(Datum::BoundaryBump, 1.0, &cfg);
    let a = run(&cfg, &init, SolverKind::Mild).unwrap();
    let b = run(&cfg, &init, SolverKind::Direct).unwrap();
    let d = max_diff(a.final_state(), b.final_state()) / a.final_state().max_abs();
    assert!(d < 1e-5, "relative difference {d:e}");
}

#[test]
fn step_guards() {
    let cfg = config(0.05, 4, 0.05);
    let g = grid_for(&cfg);
    let mut solver = Solver::new(&cfg, g.clone(), SolverKind::Mild).unwrap();
    let st = VorticityState::zeros(4, g.clone());
    assert!(matches!(solver.advance(&st, 2e-3), Err(SolverError::StepTooLarge { .. })));
    let wrong = VorticityState::zeros(3, g);
    assert!(matches!(solver.advance(&wrong, 1e-3), Err(SolverError::ModeCount { got: 3, expected: 4 })));
}

#[test]
fn projection_removes_wall_pairing() {
    let cfg = config(0.05, 4, 0.05);
    let g = grid_for(&cfg);
    let bs = BiotSavart::new(g.clone(), 4);
    let raw = initial_datum(Datum::BoundaryBump, 2.0, &cfg, g);
    let p = project_compatible(&raw, &bs);
    for xi in p.xis() {
        assert!(bs.compatibility(p.mode(xi)).norm() < 1e-13);
    }
    assert!(p.conjugate_defect() < 1e-15);
    let again = project_compatible(&p, &bs);
    assert!(max_diff(&again, &p) < 1e-13);
}

#[test]
fn shipped_data_are_real_fields() {
    let cfg = config(0.05, 4, 0.05);
    let g = grid_for(&cfg);
    for d in [Datum::BoundaryBump, Datum::Detached, Datum::Analytic] {
        let st = initial_datum(d, 1.0, &cfg, g.clone());
        assert_eq!(st.conjugate_defect(), 0.0, "{}", d.name());
        assert!(st.max_abs() > 0.0);
    }
    let det = initial_datum(Datum::Detached, 1.0, &cfg, g.clone());
    let m: &ModeField = det.mode(1);
    assert!(m.values.iter().zip(&g.nodes).filter(|(_, y)| **y <= 0.5).all(|(v, _)| v.norm() == 0.0));
}
