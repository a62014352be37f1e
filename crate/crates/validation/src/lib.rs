//! The ten acceptance criteria of the solver and verification lab.
//!
//! Each criterion runs a fixed experiment (mostly from the shipped files in
//! `configs/`) and returns an [`Outcome`] with a one-line summary of the
//! measured quantities against their thresholds.

use nshs_core::biot_savart::BiotSavart;
use nshs_core::field::VorticityState;
use nshs_core::harness::{gamma_search, prepared_datum, run_convergence, ConvergenceTable};
use nshs_core::io::{parse_config, ExperimentConfig};
use nshs_core::kernels::{apply_kernel, green_resolved};
use nshs_core::solvers::{initial_datum, run, run_with, Datum, Solver, SolverKind};
use nshs_core::verify::{
    arctan_integral, check_int_t, check_kernel_bounds, check_recovery, check_weight_properties, random_states,
    KernelBoundSetup,
};
use nshs_core::C64;
use std::f64::consts::{E, FRAC_1_SQRT_2, PI};
use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

/// Result of one criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "criterion {:2} {:<26} {verdict} {}", self.id, self.name, self.detail)
    }
}

/// Directory holding the shipped experiment files.
pub fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Loads a shipped experiment file; panics with the path on error.
pub fn config(name: &str) -> ExperimentConfig {
    let path = config_dir().join(name);
    parse_config(&path, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn rel_l2(a: &VorticityState, b: &VorticityState) -> f64 {
    (a.difference(b).l2_sq() / b.l2_sq()).sqrt()
}

fn bitwise_equal(a: &VorticityState, b: &VorticityState) -> bool {
    a.time.to_bits() == b.time.to_bits()
        && a.modes.iter().zip(&b.modes).all(|(m, n)| {
            m.values.iter().zip(&n.values).all(|(u, v)| u.re.to_bits() == v.re.to_bits() && u.im.to_bits() == v.im.to_bits())
        })
}

/// Mild against Crank–Nicolson on the bump datum.
pub fn solver_cross_validation() -> Outcome {
    let exp = config("cross_check.toml");
    let cfg = exp.run_config();
    let grid = Arc::new(cfg.grid().expect("grid"));
    let init = initial_datum(exp.physics.datum, exp.physics.amplitude, &cfg, grid);
    let clock = Instant::now();
    let mild = run(&cfg, &init, SolverKind::Mild).expect("mild solver");
    let direct = run(&cfg, &init, SolverKind::Direct).expect("direct solver");
    let secs = clock.elapsed().as_secs_f64();
    let d = rel_l2(direct.final_state(), mild.final_state());
    Outcome {
        id: 1,
        name: "solver cross-validation",
        pass: mild.failure.is_none() && direct.failure.is_none() && d <= 1e-3 && secs <= 60.0,
        detail: format!("rel L2 {d:.3e} (<= 1e-3), {secs:.1} s (<= 60 s)"),
    }
}

/// Linear evolution against the Green's function and the Neumann heat solution.
pub fn linear_exactness() -> Outcome {
    let cfg = config("cross_check.toml").run_config();
    let g = Arc::new(cfg.grid().expect("grid"));
    let init = initial_datum(Datum::Analytic, 1.0, &cfg, g.clone());
    let mut solver = Solver::new(&cfg, g.clone(), SolverKind::Mild).expect("solver");
    solver.linear = true;
    let fin = run_with(&mut solver, &init).final_state().clone();
    let mut green = 0.0f64;
    for xi in 1..=cfg.k as i64 {
        let kernel = green_resolved(xi, cfg.t_final, cfg.nu, g.clone()).expect("kernel");
        let expected = apply_kernel(&kernel, init.mode(xi));
        let err = fin.mode(xi).values.iter().zip(&expected.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        green = green.max(err / init.mode(xi).max_abs());
    }
    // even extension of e^{-y^2}: e^{-y^2/s} / sqrt(s), s = 1 + 4 nu t
    let shear = VorticityState::from_profiles(cfg.k, g.clone(), |xi, y| if xi == 0 { C64::new((-y * y).exp(), 0.0) } else { C64::new(0.0, 0.0) });
    solver.reset();
    let fin0 = run_with(&mut solver, &shear).final_state().clone();
    let s = 1.0 + 4.0 * cfg.nu * cfg.t_final;
    let heat = fin0
        .mode(0)
        .values
        .iter()
        .zip(&g.nodes)
        .map(|(v, &y)| (v - C64::new((-y * y / s).exp() / s.sqrt(), 0.0)).norm())
        .fold(0.0, f64::max);
    Outcome {
        id: 2,
        name: "linear exactness",
        pass: green <= 1e-6 && heat <= 1e-6,
        detail: format!("Green {green:.2e}, Neumann heat {heat:.2e} (<= 1e-6)"),
    }
}

pub fn kernel_structure() -> Outcome {
    let r = check_kernel_bounds(&KernelBoundSetup::default()).expect("kernel fits");
    let d = &r.details;
    let mut detail = format!("defect {:.1e}", d["translation_defect"]);
    for k in 0..3 {
        detail.push_str(&format!(
            "; k{k} theta {:.3} C {:.2} (refined {:.3}, {:.2})",
            d[&format!("theta_k{k}")],
            d[&format!("C_k{k}")],
            d[&format!("theta_k{k}_refined")],
            d[&format!("C_k{k}_refined")]
        ));
    }
    if !r.pass {
        detail.push_str(&format!(" [{}]", r.notes.join("; ")));
    }
    Outcome { id: 3, name: "kernel structure", pass: r.pass, detail }
}

pub fn time_integral_identities() -> Outcome {
    let r = check_int_t().expect("quadrature");
    let sample = arctan_integral(0.5, 1.0).expect("quadrature");
    let err = (sample - PI / 2f64.sqrt()).abs();
    Outcome {
        id: 4,
        name: "time-integral identities",
        pass: r.pass && err <= 1e-8,
        detail: format!(
            "identity err {:.1e}, sample {sample:.6} (err {err:.1e}), largest fitted C {:.3}",
            r.details["identity_max_rel_err"], r.worst_ratio
        ),
    }
}

pub fn analyticity_recovery() -> Outcome {
    let eps0 = config("inviscid_limit.toml").physics.eps0;
    let r = check_recovery(eps0, 1e-2, 0);
    Outcome {
        id: 5,
        name: "analyticity recovery",
        pass: r.pass,
        detail: format!("one-mode C {:.4} vs 1/(eps0 e) = {:.4}, worst {:.3}", r.details["C_one_mode"], 1.0 / (eps0 * E), r.worst_ratio),
    }
}

pub fn weight_battery() -> Outcome {
    let r = check_weight_properties(0.1);
    let d = &r.details;
    Outcome {
        id: 6,
        name: "weight battery",
        pass: r.pass,
        detail: format!(
            "piecewise a {:.2} b {:.2} d {:.2} e {:.3}; exponential a {:.2} b {:.2} d {:.2} e {:.3}",
            d["piecewise_a"], d["piecewise_b"], d["piecewise_d"], d["piecewise_e"], d["exponential_a"], d["exponential_b"], d["exponential_d"], d["exponential_e"]
        ),
    }
}

/// The viscosity sweep shared by the dissipation and inviscid-limit criteria,
/// with its wall-clock time.
pub fn viscosity_sweep() -> &'static (ConvergenceTable, f64) {
    static CELL: OnceLock<(ConvergenceTable, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let exp = config("inviscid_limit.toml");
        let clock = Instant::now();
        let t = run_convergence(&exp.run_config(), &exp.numerics.nu_list, exp.physics.datum, exp.physics.amplitude, SolverKind::Mild)
            .expect("sweep");
        (t, clock.elapsed().as_secs_f64())
    })
}

pub fn dissipation_scaling() -> Outcome {
    let (t, secs) = viscosity_sweep();
    let ratios = t.dissipation_ratios();
    let within = ratios.len() == 3 && ratios.iter().all(|r| (r / FRAC_1_SQRT_2 - 1.0).abs() <= 0.2);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Outcome {
        id: 7,
        name: "dissipation scaling",
        pass: t.failures.is_empty() && within && *secs <= 900.0,
        detail: format!("halving ratios [{}] vs {FRAC_1_SQRT_2:.3} +-20%, {secs:.0} s (<= 900 s)", shown.join(", ")),
    }
}

pub fn inviscid_limit() -> Outcome {
    let (t, _) = viscosity_sweep();
    let slope = t.slope.unwrap_or(f64::NAN);
    let shown: Vec<String> = t.rows.iter().map(|r| format!("{:.4e}", r.sup_dist)).collect();
    Outcome {
        id: 8,
        name: "inviscid limit",
        pass: t.failures.is_empty() && t.distances_monotone() && (0.4..=0.6).contains(&slope),
        detail: format!("distances [{}], monotone {}, slope {slope:.3} (in [0.4, 0.6])", shown.join(", "), t.distances_monotone()),
    }
}

pub fn norm_boundedness() -> Outcome {
    let exp = config("gamma_search.toml");
    let cfg = exp.run_config();
    let search = |amp: f64| gamma_search(&cfg, exp.physics.datum, amp, &exp.numerics.gamma_grid, SolverKind::Mild).expect("gamma search");
    let base = search(exp.physics.amplitude);
    let doubled = search(2.0 * exp.physics.amplitude);
    let growth = base.tried.last().map_or(f64::INFINITY, |t| t.2);
    let pass = match (base.gamma, doubled.gamma) {
        (Some(g1), Some(g2)) => growth <= 3.0 && g2 >= g1,
        (Some(_), None) => growth <= 3.0,
        _ => false,
    };
    Outcome {
        id: 9,
        name: "norm boundedness",
        pass,
        detail: format!("gamma {:?} (growth {growth:.3} <= 3), doubled amplitude gamma {:?}", base.gamma, doubled.gamma),
    }
}

pub fn structural_invariants() -> Outcome {
    let cfg = config("cross_check.toml").run_config();
    let g = Arc::new(cfg.grid().expect("grid"));
    let bs = BiotSavart::new(g.clone(), cfg.k);
    let init = prepared_datum(Datum::Analytic, 1.0, &cfg, g.clone());
    let scale = init.max_abs();

    let (mut div, mut curl, mut wall) = (0.0f64, 0.0f64, 0.0f64);
    for xi in init.xis() {
        let w = init.mode(xi);
        let (u1, u2) = (bs.u1(w), bs.u2(w));
        let (du1, du2) = (u1.dy(), u2.dy());
        let ix = C64::new(0.0, xi as f64);
        for i in 0..g.len() - 1 {
            div = div.max((ix * u1.values[i] + du2.values[i]).norm() / scale);
            curl = curl.max((ix * u2.values[i] - du1.values[i] - w.values[i]).norm() / scale);
        }
        wall = wall.max(u2.values[0].norm());
    }

    let a = run(&cfg, &init, SolverKind::Mild).expect("solver");
    let b = run(&cfg, &init, SolverKind::Mild).expect("solver");
    let compat = a.diagnostics.iter().map(|d| d.compatibility).fold(0.0, f64::max) / scale;
    let bitwise = a.snapshots.len() == b.snapshots.len() && a.snapshots.iter().zip(&b.snapshots).all(|(x, y)| bitwise_equal(x, y));
    let (r1, r2) = (random_states(cfg.k, g.clone(), 42, 3), random_states(cfg.k, g.clone(), 42, 3));
    let seeded = r1.iter().zip(&r2).all(|(x, y)| bitwise_equal(x, y)) && check_recovery(0.05, 1e-2, 42) == check_recovery(0.05, 1e-2, 42);

    let e = run(&cfg, &init, SolverKind::Euler).expect("solver");
    let (e0, e1) = (e.diagnostics.first().expect("diagnostics"), e.diagnostics.last().expect("diagnostics"));
    let energy = (e1.energy - e0.energy).abs() / e0.energy;
    let enstrophy = (e1.enstrophy - e0.enstrophy).abs() / e0.enstrophy;

    Outcome {
        id: 10,
        name: "structural invariants",
        pass: div <= 1e-8
            && curl <= 1e-6
            && wall == 0.0
            && compat <= 1e-6
            && bitwise
            && seeded
            && e.failure.is_none()
            && energy <= 1e-5
            && enstrophy <= 1e-4,
        detail: format!(
            "div {div:.1e}, curl {curl:.1e}, u2(0) {wall:.0e}, slip {compat:.1e}, Euler dE {energy:.1e} dZ {enstrophy:.1e}, bitwise {bitwise}, seeded {seeded}"
        ),
    }
}
