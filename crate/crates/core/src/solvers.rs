//! Time integrators: windowed Duhamel (mild), Crank–Nicolson (direct) and
//! inviscid SSP-RK3 (Euler), plus shipped initial data.

use crate::biot_savart::{BiotSavart, NonlinearState};
use crate::dense::{Dense, Lu};
use crate::field::{ModeField, RunConfig, VorticityState, YGrid};
use crate::kernels::{KernelError, RobinOperator};
use crate::quad::gauss_legendre;
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

pub use crate::norms::{validate_initial_data, DataReport};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("Picard iteration stalled at {defect:e} after {iters} iterations; reduce dt")]
    Picard { defect: f64, iters: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("Courant number {0:.3} exceeds the explicit stability limit")]
    Cfl(f64),
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
    #[error("step {dt} exceeds the configured dt {max}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("state has K = {got}, solver was built for K = {expected}")]
    ModeCount { got: usize, expected: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Mild,
    Direct,
    Euler,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Mild => "mild",
            SolverKind::Direct => "direct",
            SolverKind::Euler => "euler",
        }
    }
}

/// Picard tolerance (relative max norm) and iteration cap.
pub const PICARD_TOL: f64 = 1e-10;
pub const PICARD_MAX: usize = 20;
/// Courant number above which the direct solver records a warning.
pub const CFL_WARN: f64 = 0.9;
/// Courant number above which the Euler solver refuses to step.
pub const CFL_EULER_MAX: f64 = 1.5;

/// `phi_k(z) = sum_j z^j / (j + k)!` for `k = 0..=kmax`.
pub fn phi_functions(z: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if z.abs() < 2.0 {
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = 1.0 / factorial(k);
            let mut sum = term;
            for j in 1..60 {
                term *= z / (j + k) as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *o = sum;
        }
    } else {
        out[0] = z.exp();
        for k in 0..kmax {
            out[k + 1] = (out[k] - 1.0 / factorial(k)) / z;
        }
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |p, j| p * j as f64)
}

/// Exponential-integrator weights on one window for the Robin operator of
/// one mode. `w[t][m][k]` integrates `e^{lambda_k (c_t h - s)} l_m(s / h)`
/// over `s in [0, c_t h]`, where the targets `c_t` are the Gauss nodes
/// followed by 1 and `l_m` is the Lagrange basis on the Gauss nodes.
#[derive(Clone, Debug)]
struct WindowWeights {
    decay: Vec<Vec<f64>>,
    w: Vec<Vec<Vec<f64>>>,
}

fn lagrange_monomials(c: &[f64]) -> Dense {
    let q = c.len();
    let v = Dense::from_fn(q, q, |m, p| c[m].powi(p as i32));
    // Column m of V^{-1} holds the monomial coefficients of l_m.
    v.inverse()
}

impl WindowWeights {
    fn new(lambda: &[f64], h: f64, c: &[f64], coeffs: &Dense) -> Self {
        let q = c.len();
        let targets: Vec<f64> = c.iter().copied().chain(std::iter::once(1.0)).collect();
        let mut decay = Vec::with_capacity(targets.len());
        let mut w = Vec::with_capacity(targets.len());
        for &ct in &targets {
            decay.push(lambda.iter().map(|l| (l * h * ct).exp()).collect());
            let mut per_m = vec![vec![0.0; lambda.len()]; q];
            for (k, &l) in lambda.iter().enumerate() {
                let phi = phi_functions(l * h * ct, q);
                // int_0^{c} e^{mu (c - s)} s^p ds = p! c^{p+1} phi_{p+1}(mu c)
                let mono: Vec<f64> = (0..q).map(|p| factorial(p) * ct.powi(p as i32 + 1) * phi[p + 1]).collect();
                for (m, row) in per_m.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (p, mv) in mono.iter().enumerate() {
                        acc += coeffs.get(p, m) * mv;
                    }
                    row[k] = h * acc;
                }
            }
            w.push(per_m);
        }
        WindowWeights { decay, w }
    }
}

/// Per-step diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub time: f64,
    /// `1/2 ||u||^2` over one period.
    pub energy: f64,
    /// `||w||^2` over one period.
    pub enstrophy: f64,
    /// `max_xi |u1_xi(0)|`.
    pub compatibility: f64,
    pub courant: f64,
    pub picard_iters: usize,
}

/// Time-ordered snapshots of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<VorticityState>,
    pub solver_kind: SolverKind,
    pub config: RunConfig,
    pub diagnostics: Vec<StepDiagnostics>,
    pub failure: Option<String>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &VorticityState {
        self.snapshots.last().expect("trajectory has the initial snapshot")
    }

    /// `nu int_0^T ||w||^2 dt` from the per-step diagnostics (trapezoid).
    pub fn dissipation(&self) -> f64 {
        let nu = if self.solver_kind == SolverKind::Euler { 0.0 } else { self.config.nu };
        nu * self.diagnostics.windows(2).map(|p| 0.5 * (p[1].time - p[0].time) * (p[0].enstrophy + p[1].enstrophy)).sum::<f64>()
    }
}

struct DirectCache {
    cn: Vec<Lu>,
    be_half: Vec<Lu>,
    h: f64,
}

/// Time stepper holding the per-mode operators of one configuration.
pub struct Solver {
    pub kind: SolverKind,
    pub config: RunConfig,
    pub grid: Arc<YGrid>,
    pub bs: BiotSavart,
    /// Drop the nonlinear forcing (linear Stokes evolution).
    pub linear: bool,
    ops: Vec<RobinOperator>,
    gauss: Vec<f64>,
    coeffs: Dense,
    mild: Option<(f64, Vec<WindowWeights>)>,
    direct: Option<DirectCache>,
    prev_forcing: Option<NonlinearState>,
}

impl Solver {
    pub fn new(config: &RunConfig, grid: Arc<YGrid>, kind: SolverKind) -> Result<Self, SolverError> {
        let k = config.k;
        let ops = if kind == SolverKind::Euler {
            Vec::new()
        } else {
            (0..=k)
                .into_par_iter()
                .map(|a| RobinOperator::new(grid.clone(), config.nu, a as f64))
                .collect::<Result<Vec<_>, _>>()?
        };
        let (x, _) = gauss_legendre(config.quad_order);
        let gauss: Vec<f64> = x.iter().map(|v| 0.5 * (v + 1.0)).collect();
        let coeffs = lagrange_monomials(&gauss);
        Ok(Solver {
            kind,
            config: config.clone(),
            bs: BiotSavart::new(grid.clone(), k),
            grid,
            linear: false,
            ops,
            gauss,
            coeffs,
            mild: None,
            direct: None,
            prev_forcing: None,
        })
    }

    pub fn operator(&self, xi: i64) -> &RobinOperator {
        &self.ops[xi.unsigned_abs() as usize]
    }

    /// Forgets multistep history (call before starting a new trajectory).
    pub fn reset(&mut self) {
        self.prev_forcing = None;
    }

    pub fn forcing(&self, state: &VorticityState) -> NonlinearState {
        if self.linear {
            let n_modes = state.modes.iter().map(|m| ModeField::zeros(m.xi, m.grid.clone())).collect();
            return NonlinearState { k: state.k, n_modes, b_values: vec![C64::new(0.0, 0.0); 2 * state.k + 1] };
        }
        self.bs.nonlinearity(state)
    }

    /// Courant number `h max_i (sum|u1| K + sum|u2_i| / gap_i)`.
    pub fn courant(&self, state: &VorticityState, h: f64) -> f64 {
        let n = self.grid.len();
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        for xi in state.xis() {
            let m = state.mode(xi);
            for (o, v) in u1.iter_mut().zip(&self.bs.u1(m).values) {
                *o += v.norm();
            }
            for (o, v) in u2.iter_mut().zip(&self.bs.u2(m).values) {
                *o += v.norm();
            }
        }
        let y = &self.grid.nodes;
        let mut worst = 0.0f64;
        for i in 0..n {
            let gap = if i == 0 { y[1] - y[0] } else if i == n - 1 { y[i] - y[i - 1] } else { (y[i + 1] - y[i - 1]) / 2.0 };
            worst = worst.max(u1[i] * state.k as f64 + u2[i] / gap);
        }
        worst * h
    }

    pub fn diagnostics(&self, state: &VorticityState, h: f64, picard_iters: usize) -> StepDiagnostics {
        let compat = (0..=state.k as i64).map(|xi| self.bs.compatibility(state.mode(xi)).norm()).fold(0.0, f64::max);
        StepDiagnostics {
            time: state.time,
            energy: 0.5 * self.bs.velocity_l2_sq(state),
            enstrophy: 2.0 * std::f64::consts::PI * state.l2_sq(),
            compatibility: compat,
            courant: self.courant(state, h),
            picard_iters,
        }
    }

    /// One step of the configured integrator; returns the new state and the
    /// number of Picard iterations used (0 when not applicable).
    pub fn advance(&mut self, state: &VorticityState, dt: f64) -> Result<(VorticityState, usize), SolverError> {
        if dt > self.config.dt * (1.0 + 1e-12) {
            return Err(SolverError::StepTooLarge { dt, max: self.config.dt });
        }
        if state.k != self.config.k {
            return Err(SolverError::ModeCount { got: state.k, expected: self.config.k });
        }
        let out = match self.kind {
            SolverKind::Mild => self.mild_advance(state, dt),
            SolverKind::Direct => self.direct_advance(state, dt).map(|s| (s, 0)),
            SolverKind::Euler => self.euler_advance(state, dt).map(|s| (s, 0)),
        }?;
        if !out.0.is_finite() {
            return Err(SolverError::NonFinite(out.0.time));
        }
        Ok(out)
    }

    fn window_weights(&mut self, h: f64) -> &[WindowWeights] {
        let stale = self.mild.as_ref().map_or(true, |(hh, _)| *hh != h);
        if stale {
            let gauss = &self.gauss;
            let coeffs = &self.coeffs;
            let ws = self.ops.par_iter().map(|op| WindowWeights::new(&op.lambda, h, gauss, coeffs)).collect();
            self.mild = Some((h, ws));
        }
        &self.mild.as_ref().unwrap().1
    }

    fn modal_forcing(op: &RobinOperator, n: &ModeField, b: C64) -> Vec<C64> {
        let mut f = op.to_modal(op.restrict(&n.values));
        for (v, bm) in f.iter_mut().zip(op.boundary_modal()) {
            *v -= b * bm;
        }
        f
    }

    fn assemble(&self, template: &VorticityState, time: f64, profiles: Vec<Vec<C64>>) -> VorticityState {
        let mut out = template.clone();
        out.time = time;
        for (xi, v) in profiles.into_iter().enumerate() {
            out.set_mode(xi as i64, v);
        }
        out
    }

    /// One Duhamel window `[t, t + dt]` with Picard iteration on the forcing
    /// at the Gauss nodes.
    pub fn mild_advance(&mut self, state: &VorticityState, dt: f64) -> Result<(VorticityState, usize), SolverError> {
        let k = state.k;
        let q = self.gauss.len();
        self.window_weights(dt);
        let ws = &self.mild.as_ref().unwrap().1;
        let ops = &self.ops;
        let zeta0: Vec<Vec<C64>> = (0..=k).into_par_iter().map(|a| ops[a].to_modal(ops[a].restrict(&state.mode(a as i64).values))).collect();
        let f0 = self.forcing(state);
        let start: Vec<Vec<C64>> = (0..=k).map(|a| Self::modal_forcing(&ops[a], f0.n(a as i64), f0.b(a as i64))).collect();
        let mut forcing: Vec<Vec<Vec<C64>>> = vec![start; q];
        let evaluate = |forcing: &Vec<Vec<Vec<C64>>>, target: usize| -> Vec<Vec<C64>> {
            (0..=k)
                .into_par_iter()
                .map(|a| {
                    let w = &ws[a];
                    let mut z: Vec<C64> = zeta0[a].iter().zip(&w.decay[target]).map(|(z, e)| z * e).collect();
                    for m in 0..q {
                        for (kk, zv) in z.iter_mut().enumerate() {
                            *zv += forcing[m][a][kk] * w.w[target][m][kk];
                        }
                    }
                    ops[a].lift(&ops[a].from_modal(&z))
                })
                .collect()
        };
        let scale = state.max_abs().max(1e-300);
        let mut iters = 0;
        let mut previous: Option<Vec<Vec<Vec<C64>>>> = None;
        if !self.linear {
            loop {
                let nodes: Vec<Vec<Vec<C64>>> = (0..q).map(|m| evaluate(&forcing, m)).collect();
                let defect = previous.as_ref().map_or(f64::INFINITY, |p| max_diff(p, &nodes) / scale);
                if defect <= PICARD_TOL {
                    break;
                }
                if iters == PICARD_MAX {
                    return Err(SolverError::Picard { defect, iters });
                }
                iters += 1;
                forcing = nodes
                    .iter()
                    .enumerate()
                    .map(|(m, prof)| {
                        let st = self.assemble(state, state.time + self.gauss[m] * dt, prof.clone());
                        let f = self.forcing(&st);
                        (0..=k).map(|a| Self::modal_forcing(&ops[a], f.n(a as i64), f.b(a as i64))).collect()
                    })
                    .collect();
                previous = Some(nodes);
            }
        } else {
            forcing.iter_mut().for_each(|f| f.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0))));
        }
        let end = evaluate(&forcing, q);
        Ok((self.assemble(state, state.time + dt, end), iters))
    }

    fn direct_cache(&mut self, h: f64) {
        if self.direct.as_ref().map_or(true, |c| c.h != h) {
            let cn = self.ops.par_iter().map(|op| op.implicit_lu(h, 0.5)).collect();
            let be_half = self.ops.par_iter().map(|op| op.implicit_lu(0.5 * h, 1.0)).collect();
            self.direct = Some(DirectCache { cn, be_half, h });
        }
    }

    /// `(M - theta h L) w+ = (M + (1 - theta) h L) w + h (M N - B e_0)` per mode.
    fn implicit_step(&self, state: &VorticityState, h: f64, theta: f64, lus: &[Lu], forcing: &NonlinearState, time: f64) -> VorticityState {
        let k = state.k;
        let ops = &self.ops;
        let profiles: Vec<Vec<C64>> = (0..=k)
            .into_par_iter()
            .map(|a| {
                let op = &ops[a];
                let w = op.restrict(&state.mode(a as i64).values);
                let lw = op.lmat.apply_c(w);
                let n = op.restrict(&forcing.n(a as i64).values);
                let mut rhs: Vec<C64> =
                    (0..w.len()).map(|i| w[i] * op.mass[i] + lw[i] * ((1.0 - theta) * h) + n[i] * (h * op.mass[i])).collect();
                rhs[0] -= forcing.b(a as i64) * h;
                op.lift(&lus[a].solve_c(&rhs))
            })
            .collect();
        self.assemble(state, time, profiles)
    }

    /// Crank–Nicolson step; forcing by an Adams–Bashforth predictor and a
    /// trapezoidal corrector. The first step of a trajectory uses two
    /// backward-Euler half steps.
    pub fn direct_advance(&mut self, state: &VorticityState, dt: f64) -> Result<VorticityState, SolverError> {
        self.direct_cache(dt);
        let prev = self.prev_forcing.take();
        let now = self.forcing(state);
        let cache = self.direct.as_ref().unwrap();
        let t1 = state.time + dt;
        let out = match prev {
            None => {
                let half = self.implicit_step(state, 0.5 * dt, 1.0, &cache.be_half, &now, state.time + 0.5 * dt);
                let mid = self.forcing(&half);
                let mut end = self.implicit_step(&half, 0.5 * dt, 1.0, &cache.be_half, &mid, t1);
                end.time = t1;
                end
            }
            Some(prev) => {
                let pred_f = combine_forcing(&now, 1.5, &prev, -0.5);
                let pred = self.implicit_step(state, dt, 0.5, &cache.cn, &pred_f, t1);
                let corr_f = combine_forcing(&now, 0.5, &self.forcing(&pred), 0.5);
                self.implicit_step(state, dt, 0.5, &cache.cn, &corr_f, t1)
            }
        };
        self.prev_forcing = Some(now);
        Ok(out)
    }

    /// SSP-RK3 step of `w_t = -u . grad w`.
    pub fn euler_advance(&mut self, state: &VorticityState, dt: f64) -> Result<VorticityState, SolverError> {
        let c = self.courant(state, dt);
        if c > CFL_EULER_MAX {
            return Err(SolverError::Cfl(c));
        }
        let stage = |base: &VorticityState, a: f64, s: &VorticityState, b: f64| -> VorticityState {
            let f = self.forcing(s);
            let mut out = base.clone();
            for (xi_idx, m) in out.modes.iter_mut().enumerate() {
                let sv = &s.modes[xi_idx].values;
                let nv = &f.n_modes[xi_idx].values;
                for ((o, sv), nv) in m.values.iter_mut().zip(sv).zip(nv) {
                    *o = *o * a + (sv + nv * dt) * b;
                }
            }
            out
        };
        let s1 = stage(state, 0.0, state, 1.0);
        let s2 = stage(state, 0.75, &s1, 0.25);
        let mut s3 = stage(state, 1.0 / 3.0, &s2, 2.0 / 3.0);
        s3.time = state.time + dt;
        Ok(s3)
    }
}

fn combine_forcing(a: &NonlinearState, ca: f64, b: &NonlinearState, cb: f64) -> NonlinearState {
    let n_modes = a
        .n_modes
        .iter()
        .zip(&b.n_modes)
        .map(|(x, y)| x.with_values(x.values.iter().zip(&y.values).map(|(u, v)| u * ca + v * cb).collect()))
        .collect();
    let b_values = a.b_values.iter().zip(&b.b_values).map(|(u, v)| u * ca + v * cb).collect();
    NonlinearState { k: a.k, n_modes, b_values }
}

fn max_diff(a: &[Vec<Vec<C64>>], b: &[Vec<Vec<C64>>]) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        for (u, v) in x.iter().zip(y) {
            for (p, r) in u.iter().zip(v) {
                worst = worst.max((p - r).norm());
            }
        }
    }
    worst
}

/// Shipped initial data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Datum {
    /// `A sin(x) y^2 e^{-y^2}`.
    BoundaryBump,
    /// `A sin(x)` times a smooth profile vanishing for `y <= 1/2`.
    Detached,
    /// `A sum_xi e^{-sigma |xi|} cos(xi x + xi) y e^{-y^2}` over `1 <= |xi| <= K`,
    /// with `sigma = eps0 (1 + 2 mu0)`.
    Analytic,
}

impl Datum {
    pub fn name(self) -> &'static str {
        match self {
            Datum::BoundaryBump => "boundary_bump",
            Datum::Detached => "detached",
            Datum::Analytic => "analytic",
        }
    }
}

fn smooth_step(s: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let (a, b) = (h(s), h(1.0 - s));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Samples a shipped datum with amplitude `amp`.
pub fn initial_datum(datum: Datum, amp: f64, cfg: &RunConfig, grid: Arc<YGrid>) -> VorticityState {
    let k = cfg.k;
    match datum {
        Datum::BoundaryBump => VorticityState::from_profiles(k, grid, |xi, y| {
            if xi == 1 {
                C64::new(0.0, -0.5 * amp * y * y * (-y * y).exp())
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        Datum::Detached => VorticityState::from_profiles(k, grid, |xi, y| {
            if xi == 1 {
                let f = smooth_step(2.0 * (y - 0.5)) * y * y * (-(y - 1.5) * (y - 1.5)).exp();
                C64::new(0.0, -0.5 * amp * f)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
        Datum::Analytic => {
            let sigma = cfg.eps0 * (1.0 + 2.0 * cfg.mu0);
            VorticityState::from_profiles(k, grid, |xi, y| {
                if xi == 0 {
                    return C64::new(0.0, 0.0);
                }
                let x = xi as f64;
                C64::from_polar(0.5 * amp * (-sigma * x).exp() * y * (-y * y).exp(), x)
            })
        }
    }
}

/// Removes the pairing with `e^{-|xi| y}` from every mode by subtracting a
/// multiple of `y^3 e^{-y^2}`, so that `u1(0) = 0`.
pub fn project_compatible(state: &VorticityState, bs: &BiotSavart) -> VorticityState {
    let psi = ModeField::from_fn(0, state.grid.clone(), |y| C64::new(y.powi(3) * (-y * y).exp(), 0.0));
    let mut out = state.clone();
    for xi in 0..=state.k as i64 {
        let f = state.mode(xi);
        let c = bs.compatibility(f);
        let cp = bs.compatibility(&ModeField { xi, ..psi.clone() });
        let vals = f.values.iter().zip(&psi.values).map(|(v, p)| v - c / cp * p).collect();
        out.set_mode(xi, vals);
    }
    out
}

/// Runs `solver` from `initial` to `config.t_final`, with steps of at most
/// `config.dt`; failures truncate the trajectory and are recorded.
pub fn run_with(solver: &mut Solver, initial: &VorticityState) -> Trajectory {
    solver.reset();
    let cfg = solver.config.clone();
    let mut traj = Trajectory {
        snapshots: vec![initial.clone()],
        solver_kind: solver.kind,
        config: cfg.clone(),
        diagnostics: Vec::new(),
        failure: None,
        warnings: Vec::new(),
    };
    let steps = if cfg.t_final > 0.0 { (cfg.t_final / cfg.dt - 1e-9).ceil().max(1.0) as usize } else { 0 };
    let h = if steps > 0 { cfg.t_final / steps as f64 } else { cfg.dt };
    traj.diagnostics.push(solver.diagnostics(initial, h, 0));
    let mut state = initial.clone();
    for n in 1..=steps {
        match solver.advance(&state, h) {
            Ok((next, iters)) => {
                state = next;
                state.time = n as f64 * h;
                let d = solver.diagnostics(&state, h, iters);
                if solver.kind == SolverKind::Direct && d.courant > CFL_WARN {
                    traj.warnings.push(format!("t = {:.6}: Courant number {:.3}", state.time, d.courant));
                }
                traj.diagnostics.push(d);
                if n % cfg.snapshot_every == 0 || n == steps {
                    traj.snapshots.push(state.clone());
                }
            }
            Err(e) => {
                traj.failure = Some(format!("t = {:.6}: {e}", state.time));
                break;
            }
        }
    }
    traj
}

/// Builds a solver for `config` on its own grid and runs it.
pub fn run(config: &RunConfig, initial: &VorticityState, kind: SolverKind) -> Result<Trajectory, SolverError> {
    let mut solver = Solver::new(config, initial.grid.clone(), kind)?;
    Ok(run_with(&mut solver, initial))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_branches_agree() {
        for &z in &[-1.999, -2.001, 1.999, 2.001] {
            let a = phi_functions(z, 5);
            for k in 1..=5 {
                // phi_k(z) = int_0^1 e^{z(1-s)} s^{k-1} / (k-1)! ds
                let (x, w) = gauss_legendre(30);
                let exact: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| {
                        let s = 0.5 * (x + 1.0);
                        0.5 * w * (z * (1.0 - s)).exp() * s.powi(k as i32 - 1) / factorial(k - 1)
                    })
                    .sum();
                assert!((a[k] - exact).abs() < 1e-13 * exact.abs().max(1.0), "z={z} k={k}");
            }
        }
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }
}
