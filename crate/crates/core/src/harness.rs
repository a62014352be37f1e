//! Vanishing-viscosity experiments: dissipation monitors, the Navier–Stokes
//! to Euler convergence table, triple-norm histories and the γ search.

use crate::biot_savart::BiotSavart;
use crate::field::{make_grid, FieldError, RunConfig, VorticityState};
use crate::norms::{triple_norm, NormError, NormParams, NormReport, SliceRule};
use crate::solvers::{initial_datum, project_compatible, run, run_with, Datum, Solver, SolverError, SolverKind, Trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("viscosity list must be strictly decreasing and positive: {0:?}")]
    NuList(Vec<f64>),
    #[error("gamma grid must be strictly increasing and positive: {0:?}")]
    GammaGrid(Vec<f64>),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Full and near-wall viscous dissipation of one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatoReport {
    /// `nu int_0^T int |w|^2`.
    pub total: f64,
    /// `nu int_0^T int_{y <= c nu} |grad u|^2`.
    pub wall: f64,
    pub wall_width: f64,
}

/// `int_{y <= width} |grad u|^2 dx dy` of one state; `d_y u2 = -i xi u1`.
pub fn wall_gradient_sq(bs: &BiotSavart, state: &VorticityState, width: f64) -> f64 {
    if width <= 0.0 {
        return 0.0;
    }
    let rule = SliceRule::new(&state.grid, 0.0, width.min(state.grid.ymax));
    let vel = bs.velocity(state);
    let mut total = 0.0;
    for (u1, u2) in vel.u1_modes.iter().zip(&vel.u2_modes) {
        let xi = u1.xi as f64;
        let a = rule.values(&u1.values);
        let da = rule.values(&u1.dy().values);
        let b = rule.values(&u2.values);
        for q in 0..rule.points.len() {
            let g = xi * xi * (a[q].norm_sqr() + b[q].norm_sqr()) + da[q].norm_sqr() + xi * xi * a[q].norm_sqr();
            total += rule.weights[q] * g;
        }
    }
    2.0 * PI * total
}

/// Time-integrated dissipation over the whole domain and over `{y <= c nu}`.
pub fn kato_monitor(traj: &Trajectory, c: f64) -> KatoReport {
    let nu = if traj.solver_kind == SolverKind::Euler { 0.0 } else { traj.config.nu };
    let width = c * nu;
    if nu == 0.0 || traj.snapshots.len() < 2 {
        return KatoReport { total: traj.dissipation(), wall: 0.0, wall_width: width };
    }
    let bs = BiotSavart::new(traj.snapshots[0].grid.clone(), traj.snapshots[0].k);
    let g: Vec<f64> = traj.snapshots.par_iter().map(|s| wall_gradient_sq(&bs, s, width)).collect();
    let wall = nu
        * traj.snapshots.windows(2).zip(g.windows(2)).map(|(s, g)| 0.5 * (s[1].time - s[0].time) * (g[0] + g[1])).sum::<f64>();
    KatoReport { total: traj.dissipation(), wall, wall_width: width }
}

/// One viscosity of the convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub nu: f64,
    pub sup_dist: f64,
    pub dissipation: f64,
    pub katowall: f64,
    pub t: f64,
    /// Least-squares slope of `log sup_dist` against `log nu` over this and the previous rows.
    pub slope_running: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub failures: Vec<(f64, String)>,
    pub slope: Option<f64>,
    pub datum: Datum,
    pub amplitude: f64,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nu,sup_dist,dissipation,katowall,T,slope_running\n");
        for r in &self.rows {
            let s = r.slope_running.map_or(String::new(), |s| format!("{s:.12e}"));
            out.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}\n", r.nu, r.sup_dist, r.dissipation, r.katowall, r.t, s));
        }
        out
    }

    /// `sup_dist` strictly decreasing down the table.
    pub fn distances_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_dist < w[0].sup_dist)
    }

    /// Successive `dissipation(nu/2) / dissipation(nu)` ratios.
    pub fn dissipation_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[1].dissipation / w[0].dissipation).collect()
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `min(T, mu0/(2 gamma) - 0.05 mu0/gamma)`.
pub fn admissible_time(cfg: &RunConfig) -> f64 {
    cfg.t_final.min(0.45 * cfg.mu0 / cfg.gamma)
}

/// Compatible initial state of `datum` on the given grid.
pub fn prepared_datum(datum: Datum, amp: f64, cfg: &RunConfig, grid: Arc<crate::field::YGrid>) -> VorticityState {
    let bs = BiotSavart::new(grid.clone(), cfg.k);
    project_compatible(&initial_datum(datum, amp, cfg, grid), &bs)
}

/// `sup_t ||u(a) - u(b)||` over snapshot pairs at matching times; `a` is
/// embedded into the mode count of `b`.
pub fn sup_velocity_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let k = b.snapshots[0].k;
    let bs = BiotSavart::new(b.snapshots[0].grid.clone(), k);
    a.snapshots
        .par_iter()
        .zip(&b.snapshots)
        .map(|(x, y)| {
            debug_assert!((x.time - y.time).abs() <= 1e-12 * (1.0 + y.time));
            bs.velocity_l2_sq(&x.with_k(k).difference(y)).sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// Viscous runs over `nu_list` against one Euler reference with twice the modes,
/// all on the grid resolving the smallest viscosity.
pub fn run_convergence(base: &RunConfig, nu_list: &[f64], datum: Datum, amp: f64, kind: SolverKind) -> Result<ConvergenceTable, HarnessError> {
    if nu_list.is_empty() || nu_list.iter().any(|&n| !(n > 0.0)) || nu_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HarnessError::NuList(nu_list.to_vec()));
    }
    let nu_min = *nu_list.last().unwrap();
    let grid = Arc::new(make_grid(base.ny, base.ymax, nu_min)?);
    let mut cfg = base.clone();
    cfg.t_final = admissible_time(base);
    let init = prepared_datum(datum, amp, &cfg, grid.clone());
    let mut ecfg = cfg.clone();
    ecfg.nu = 0.0;
    ecfg.k = 2 * cfg.k;
    let reference = run(&ecfg, &init.with_k(ecfg.k), SolverKind::Euler)?;
    let results: Vec<(f64, Result<(f64, KatoReport), String>)> = nu_list
        .par_iter()
        .map(|&nu| {
            let mut c = cfg.clone();
            c.nu = nu;
            let out = Solver::new(&c, grid.clone(), kind).map_err(|e| e.to_string()).and_then(|mut s| {
                let tr = run_with(&mut s, &init);
                match (&tr.failure, &reference.failure) {
                    (Some(f), _) => Err(f.clone()),
                    (_, Some(f)) => Err(format!("Euler reference: {f}")),
                    _ => Ok((sup_velocity_distance(&tr, &reference), kato_monitor(&tr, 1.0))),
                }
            });
            (nu, out)
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut failures = Vec::new();
    for (nu, r) in results {
        match r {
            Ok((d, k)) => {
                rows.push(ConvergenceRow { nu, sup_dist: d, dissipation: k.total, katowall: k.wall, t: cfg.t_final, slope_running: None });
                let xs: Vec<f64> = rows.iter().map(|r| r.nu).collect();
                let ys: Vec<f64> = rows.iter().map(|r| r.sup_dist).collect();
                rows.last_mut().unwrap().slope_running = loglog_slope(&xs, &ys);
            }
            Err(e) => failures.push((nu, e)),
        }
    }
    let slope = if rows.len() >= 3 {
        loglog_slope(&rows.iter().map(|r| r.nu).collect::<Vec<_>>(), &rows.iter().map(|r| r.sup_dist).collect::<Vec<_>>())
    } else {
        None
    };
    Ok(ConvergenceTable { rows, failures, slope, datum, amplitude: amp })
}

/// Triple norm of every snapshot.
pub fn norm_history(traj: &Trajectory, p: &NormParams) -> Result<Vec<NormReport>, NormError> {
    traj.snapshots.par_iter().map(|s| triple_norm(s, p)).collect()
}

/// `sup_t |||w(t)||| / |||w(0)|||`; zero for a vanishing history.
pub fn growth_ratio(history: &[NormReport]) -> f64 {
    let first = history.first().map_or(0.0, |h| h.triple);
    let sup = history.iter().map(|h| h.triple).fold(0.0, f64::max);
    if sup == 0.0 {
        0.0
    } else {
        sup / first
    }
}

/// Flags a history exceeding `multiple` times its initial value.
pub fn history_exceeds(history: &[NormReport], multiple: f64) -> bool {
    growth_ratio(history) > multiple
}

/// Largest `|Delta triple| / Delta t` between successive snapshots.
pub fn history_lipschitz(history: &[NormReport]) -> f64 {
    history
        .windows(2)
        .map(|w| (w[1].triple - w[0].triple).abs() / (w[1].time - w[0].time))
        .fold(0.0, f64::max)
}

/// Outcome of the γ search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSearch {
    /// Smallest passing γ, if any.
    pub gamma: Option<f64>,
    /// Certified window `mu0 / (2 gamma)` of the passing γ.
    pub window: Option<f64>,
    /// `(gamma, T, growth ratio)` for every tried γ, in grid order.
    pub tried: Vec<(f64, f64, f64)>,
    pub limit: f64,
}

/// Growth multiple allowed by [`gamma_search`].
pub const GROWTH_LIMIT: f64 = 3.0;

/// Smallest γ in `gamma_grid` whose run over `[0, 0.45 mu0/gamma]` keeps the
/// triple norm within [`GROWTH_LIMIT`] times its initial value.
pub fn gamma_search(config: &RunConfig, datum: Datum, amp: f64, gamma_grid: &[f64], kind: SolverKind) -> Result<GammaSearch, HarnessError> {
    if gamma_grid.is_empty() || gamma_grid.iter().any(|&g| !(g > 0.0)) || gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::GammaGrid(gamma_grid.to_vec()));
    }
    let grid = Arc::new(config.grid()?);
    let mut tried = Vec::new();
    for &gamma in gamma_grid {
        let mut cfg = config.clone();
        cfg.gamma = gamma;
        cfg.t_final = 0.45 * cfg.mu0 / gamma;
        let init = prepared_datum(datum, amp, &cfg, grid.clone());
        let traj = run(&cfg, &init, kind)?;
        let ratio = if traj.failure.is_some() {
            f64::INFINITY
        } else {
            growth_ratio(&norm_history(&traj, &NormParams::from_config(&cfg))?)
        };
        tried.push((gamma, cfg.t_final, ratio));
        if ratio <= GROWTH_LIMIT {
            return Ok(GammaSearch { gamma: Some(gamma), window: Some(cfg.mu0 / (2.0 * gamma)), tried, limit: GROWTH_LIMIT });
        }
    }
    Ok(GammaSearch { gamma: None, window: None, tried, limit: GROWTH_LIMIT })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 0.5, 0.25];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn admissible_time_margin() {
        let cfg = RunConfig { t_final: 10.0, ..RunConfig::default() };
        assert!((admissible_time(&cfg) - 0.45).abs() < 1e-15);
    }
}
