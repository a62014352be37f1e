//! Analytic and Sobolev norms of vorticity states.
//!
//! All analytic norms are evaluated on the real slice `y in [0, 1 + mu]`.

use crate::dense::Dense;
use crate::field::{weight_w, ModeField, RunConfig, VorticityState, YGrid};
use crate::quad::gauss_legendre;
use crate::real::Real;
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NormError {
    #[error("radius mu = {mu} must lie in [0, {limit}) (mu0 - gamma t)")]
    Radius { mu: f64, limit: f64 },
    #[error("time {t} outside the admissible window [0, {limit})")]
    Time { t: f64, limit: f64 },
    #[error("grid ends at {ymax}, below 1 + mu = {need}")]
    GridTooShort { ymax: f64, need: f64 },
}

/// Derivative pairs `(i, j)` with `i + j <= 2`, in report order.
pub const PARTS: [(u32, u32); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

/// Intermediate radii `mu < mu1 < mu2 < mu0 - gamma s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuSchedule<T> {
    pub mu: T,
    pub mu1: T,
    pub mu2: T,
}

pub fn mu_schedule<T: Real>(mu: T, mu0: T, gamma: T, s: T) -> Result<MuSchedule<T>, NormError> {
    let gap = mu0 - mu - gamma * s;
    if !(mu >= T::zero() && gap > T::zero()) {
        return Err(NormError::Radius {
            mu: mu.to_f64().unwrap_or(f64::NAN),
            limit: (mu0 - gamma * s).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(MuSchedule { mu, mu1: mu + T::lit(0.25) * gap, mu2: mu + T::lit(0.5) * gap })
}

/// Parameters shared by every norm evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    pub nu: f64,
    pub mu0: f64,
    pub gamma: f64,
    pub eps0: f64,
    pub alpha: f64,
    /// Points in the radius sweep.
    pub n_mu: usize,
}

impl NormParams {
    pub fn from_config(cfg: &RunConfig) -> Self {
        NormParams { nu: cfg.nu, mu0: cfg.mu0, gamma: cfg.gamma, eps0: cfg.eps0, alpha: cfg.alpha, n_mu: 32 }
    }

    pub fn mu_max(&self, t: f64) -> f64 {
        self.mu0 - self.gamma * t
    }

    /// Radius sweep `mu_max (1 - rho^k)`, geometric toward `mu_max`.
    pub fn mu_grid(&self, t: f64) -> Vec<f64> {
        let top = self.mu_max(t);
        let n = self.n_mu.max(2);
        let rho = (1e-4f64).powf(1.0 / (n - 1) as f64);
        (0..n).map(|k| top * (1.0 - rho.powi(k as i32))).collect()
    }
}

/// Exponential factor `e^{eps0 (1 + mu - y)_+ |xi|}`.
pub fn analytic_factor(eps0: f64, mu: f64, y: f64, xi: i64) -> f64 {
    (eps0 * (1.0 + mu - y).max(0.0) * xi.unsigned_abs() as f64).exp()
}

/// `sup_{0 <= y <= 1 + mu} w(y) |f(y)|`, over the nodes and the endpoint.
pub fn weighted_linf(f: &ModeField, mu: f64, nu: f64) -> f64 {
    weighted_sup(f, mu, nu, 0.0)
}

fn weighted_sup(f: &ModeField, mu: f64, nu: f64, eps0: f64) -> f64 {
    let g = &f.grid;
    let top = 1.0 + mu;
    let mut best = 0.0f64;
    for (y, v) in g.nodes.iter().zip(&f.values) {
        if *y > top {
            break;
        }
        best = best.max(weight_w(*y, nu) * analytic_factor(eps0, mu, *y, f.xi) * v.norm());
    }
    if top <= g.ymax {
        best = best.max(weight_w(top, nu) * g.eval(&f.values, top).norm());
    }
    best
}

/// Gauss rule on `[0, top]` laid out in the grid's reference coordinate,
/// with the interpolation matrix from grid values to its nodes.
#[derive(Clone, Debug)]
pub struct SliceRule {
    pub top: f64,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub interp: Dense,
}

impl SliceRule {
    pub fn new(grid: &YGrid, lo: f64, top: f64) -> Self {
        let n = grid.len();
        let (x, w) = gauss_legendre(n);
        let (s0, s1) = (grid.s_of_y(lo), grid.s_of_y(top));
        let half = 0.5 * (s1 - s0);
        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (xk, wk) in x.iter().zip(&w) {
            let s = s0 + half * (xk + 1.0);
            points.push(grid.y_of_s(s));
            weights.push(wk * half * grid.dyds_at(s));
        }
        let interp = grid.interp_matrix(&points);
        SliceRule { top, points, weights, interp }
    }

    pub fn values(&self, f: &[C64]) -> Vec<C64> {
        self.interp.apply_c(f)
    }
}

fn slice_l1(rule: &SliceRule, f: &ModeField, mu: f64, eps0: f64) -> f64 {
    let v = rule.values(&f.values);
    v.iter()
        .zip(rule.points.iter().zip(&rule.weights))
        .map(|(v, (y, w))| w * v.norm() * analytic_factor(eps0, mu, *y, f.xi))
        .sum()
}

/// `int_0^{1+mu} |f| dy` on the real slice.
pub fn slice_l1_norm(f: &ModeField, mu: f64) -> f64 {
    let rule = SliceRule::new(&f.grid, 0.0, 1.0 + mu);
    slice_l1(&rule, f, mu, 0.0)
}

/// `d_x^i (y d_y)^j` of every mode, indexed like [`PARTS`].
pub fn derivative_table(state: &VorticityState) -> Vec<Vec<ModeField>> {
    PARTS
        .par_iter()
        .map(|&(i, j)| state.modes.iter().map(|m| m.conormal_unchecked(j).ddx(i)).collect())
        .collect()
}

/// Components of one radius in the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEntry {
    pub mu: f64,
    /// X_mu part per `(i, j)` in [`PARTS`] order.
    pub x_parts: [f64; 6],
    pub y_parts: [f64; 6],
    pub x_total: f64,
    pub y_total: f64,
}

fn part_sums(table: &[Vec<ModeField>], mu: f64, p: &NormParams, rule: &SliceRule) -> ([f64; 6], [f64; 6]) {
    let mut xp = [0.0; 6];
    let mut yp = [0.0; 6];
    for (k, fields) in table.iter().enumerate() {
        for f in fields {
            xp[k] += weighted_sup(f, mu, p.nu, p.eps0);
            yp[k] += slice_l1(rule, f, mu, p.eps0);
        }
    }
    (xp, yp)
}

fn combine(parts: &[f64; 6], gap: f64, exponent: f64) -> f64 {
    let low: f64 = parts[..3].iter().sum();
    let high: f64 = parts[3..].iter().sum();
    low + gap.max(0.0).powf(exponent) * high
}

fn check_radius(state: &VorticityState, mu: f64, p: &NormParams) -> Result<(), NormError> {
    let limit = p.mu_max(state.time);
    if !(mu >= 0.0 && mu < limit) {
        return Err(NormError::Radius { mu, limit });
    }
    if state.grid.ymax < 1.0 + mu {
        return Err(NormError::GridTooShort { ymax: state.grid.ymax, need: 1.0 + mu });
    }
    Ok(())
}

fn entry(state: &VorticityState, table: &[Vec<ModeField>], mu: f64, p: &NormParams) -> MuEntry {
    let rule = SliceRule::new(&state.grid, 0.0, 1.0 + mu);
    let (x_parts, y_parts) = part_sums(table, mu, p, &rule);
    let gap = p.mu0 - mu - p.gamma * state.time;
    MuEntry {
        mu,
        x_total: combine(&x_parts, gap, 0.5 + p.alpha),
        y_total: combine(&y_parts, gap, p.alpha),
        x_parts,
        y_parts,
    }
}

/// X_mu and Y_mu at one radius.
pub fn mu_norms(state: &VorticityState, mu: f64, p: &NormParams) -> Result<MuEntry, NormError> {
    check_radius(state, mu, p)?;
    let table = derivative_table(state);
    Ok(entry(state, &table, mu, p))
}

pub fn x_mu_norm(state: &VorticityState, mu: f64, p: &NormParams) -> Result<(f64, [f64; 6]), NormError> {
    let e = mu_norms(state, mu, p)?;
    Ok((e.x_total, e.x_parts))
}

pub fn y_mu_norm(state: &VorticityState, mu: f64, p: &NormParams) -> Result<(f64, [f64; 6]), NormError> {
    let e = mu_norms(state, mu, p)?;
    Ok((e.y_total, e.y_parts))
}

/// The radius sweep behind the time-dependent norms.
pub fn mu_sweep(state: &VorticityState, p: &NormParams) -> Result<Vec<MuEntry>, NormError> {
    let limit = p.mu0 / (2.0 * p.gamma);
    if !(state.time >= 0.0 && state.time < limit) {
        return Err(NormError::Time { t: state.time, limit });
    }
    let top = 1.0 + p.mu_max(state.time);
    if state.grid.ymax < top {
        return Err(NormError::GridTooShort { ymax: state.grid.ymax, need: top });
    }
    let table = derivative_table(state);
    Ok(p.mu_grid(state.time).par_iter().map(|&mu| entry(state, &table, mu, p)).collect())
}

fn sup_of(entries: &[MuEntry], f: impl Fn(&MuEntry) -> f64) -> (f64, f64) {
    entries.iter().fold((0.0, 0.0), |(best, arg), e| if f(e) > best { (f(e), e.mu) } else { (best, arg) })
}

/// `X(t)` and the radius achieving it.
pub fn x_t_norm(state: &VorticityState, p: &NormParams) -> Result<(f64, f64), NormError> {
    Ok(sup_of(&mu_sweep(state, p)?, |e| e.x_total))
}

/// `Y(t)` and the radius achieving it.
pub fn y_t_norm(state: &VorticityState, p: &NormParams) -> Result<(f64, f64), NormError> {
    Ok(sup_of(&mu_sweep(state, p)?, |e| e.y_total))
}

/// `int_lo^ymax y^2 |f|^2 dy` from the grid interpolant.
pub fn weighted_l2_sq_from(f: &ModeField, lo: f64) -> f64 {
    let g = &f.grid;
    if lo >= g.ymax {
        return 0.0;
    }
    let rule = SliceRule::new(g, lo, g.ymax);
    rule.values(&f.values)
        .iter()
        .zip(rule.points.iter().zip(&rule.weights))
        .map(|(v, (y, w))| w * y * y * v.norm_sqr())
        .sum()
}

/// `||f||_S = (sum_xi ||y f_xi||^2_{L^2(y >= 1/2)})^{1/2}`.
pub fn s_norm(state: &VorticityState) -> f64 {
    state.modes.par_iter().map(|m| weighted_l2_sq_from(m, 0.5)).sum::<f64>().sqrt()
}

/// `sum_xi ||y f_xi||_{L^2(y >= 1 + mu)}`.
pub fn s_mu_norm(state: &VorticityState, mu: f64) -> f64 {
    state.modes.par_iter().map(|m| weighted_l2_sq_from(m, 1.0 + mu).sqrt()).sum()
}

fn map_modes(state: &VorticityState, f: impl Fn(&ModeField) -> ModeField + Sync + Send) -> VorticityState {
    let mut out = state.clone();
    out.modes = state.modes.par_iter().map(f).collect();
    out
}

/// `sum_{i+j<=3} ||d_x^i d_y^j f||_S` with plain wall-normal derivatives.
pub fn z_norm(state: &VorticityState) -> f64 {
    let mut total = 0.0;
    let mut dyj = state.clone();
    for j in 0..=3u32 {
        for i in 0..=(3 - j) {
            total += s_norm(&map_modes(&dyj, |m| m.ddx(i)));
        }
        if j < 3 {
            dyj = map_modes(&dyj, ModeField::dy);
        }
    }
    total
}

/// Share of the S-integrand on the last unit of the grid, a proxy for the
/// mass cut off at `ymax`.
pub fn tail_fraction(state: &VorticityState) -> f64 {
    let total: f64 = state.modes.iter().map(|m| weighted_l2_sq_from(m, 0.5)).sum();
    if total == 0.0 {
        return 0.0;
    }
    let lo = (state.grid.ymax - 1.0).max(0.5);
    let tail: f64 = state.modes.iter().map(|m| weighted_l2_sq_from(m, lo)).sum();
    tail / total
}

/// Version tag of the serialized report.
pub const NORM_REPORT_VERSION: u32 = 1;

/// All norm components of one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub version: u32,
    pub time: f64,
    pub x_t: f64,
    pub y_t: f64,
    pub z: f64,
    pub triple: f64,
    pub mu_max: f64,
    /// Radii achieving `x_t` and `y_t`.
    pub x_argmax: f64,
    pub y_argmax: f64,
    pub tail_warning: bool,
    pub per_mu: Vec<MuEntry>,
}

impl NormReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn triple_norm(state: &VorticityState, p: &NormParams) -> Result<NormReport, NormError> {
    let per_mu = mu_sweep(state, p)?;
    let (x_t, x_argmax) = sup_of(&per_mu, |e| e.x_total);
    let (y_t, y_argmax) = sup_of(&per_mu, |e| e.y_total);
    let z = z_norm(state);
    Ok(NormReport {
        version: NORM_REPORT_VERSION,
        time: state.time,
        x_t,
        y_t,
        z,
        triple: x_t + y_t + z,
        mu_max: p.mu_max(state.time),
        x_argmax,
        y_argmax,
        tail_warning: tail_fraction(state) > 1e-8,
        per_mu,
    })
}

/// The three sums bounding admissible initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataReport {
    pub x_sum: f64,
    pub y_sum: f64,
    /// `sum_{i+j<=4} ||d_x^i (y d_y)^j f||_S`.
    pub s_sum: f64,
    pub m_est: f64,
    pub finite: bool,
}

pub fn validate_initial_data(state: &VorticityState, p: &NormParams) -> DataReport {
    if state.max_abs() == 0.0 {
        return DataReport { x_sum: 0.0, y_sum: 0.0, s_sum: 0.0, m_est: 0.0, finite: true };
    }
    let mu = p.mu0;
    let table = derivative_table(state);
    let rule = SliceRule::new(&state.grid, 0.0, 1.0 + mu);
    let (xp, yp) = part_sums(&table, mu, p, &rule);
    let x_sum: f64 = xp.iter().sum();
    let y_sum: f64 = yp.iter().sum();
    let mut s_sum = 0.0;
    let mut conormal = state.clone();
    for j in 0..=4u32 {
        for i in 0..=(4 - j) {
            s_sum += s_norm(&map_modes(&conormal, |m| m.ddx(i)));
        }
        if j < 4 {
            conormal = map_modes(&conormal, |m| m.conormal_unchecked(1));
        }
    }
    let m_est = x_sum + y_sum + s_sum;
    DataReport { x_sum, y_sum, s_sum, m_est, finite: m_est.is_finite() }
}

/// `sum |v_xi| <= C (sum (1 + xi^2) |v_xi|^2)^{1/2}` with
/// `C = (sum (1 + xi^2)^{-1})^{1/2}`; returns `(lhs, C * rhs)`.
pub fn l1_l2_bridge(v: &[(i64, f64)]) -> (f64, f64) {
    let lhs: f64 = v.iter().map(|(_, x)| x.abs()).sum();
    let c: f64 = v.iter().map(|(xi, _)| 1.0 / (1.0 + (*xi as f64).powi(2))).sum::<f64>().sqrt();
    let rhs: f64 = v.iter().map(|(xi, x)| (1.0 + (*xi as f64).powi(2)) * x * x).sum::<f64>().sqrt();
    (lhs, c * rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_grid;
    use std::sync::Arc;

    #[test]
    fn schedule_example() {
        let s = mu_schedule(0.02f64, 0.1, 1.0, 0.04).unwrap();
        assert!((s.mu1 - 0.03).abs() < 1e-15 && (s.mu2 - 0.04).abs() < 1e-15);
        assert!(mu_schedule(0.07f64, 0.1, 1.0, 0.04).is_err());
    }

    #[test]
    fn sweep_ends_near_limit() {
        let p = NormParams { nu: 0.01, mu0: 0.1, gamma: 0.1, eps0: 0.05, alpha: 0.25, n_mu: 32 };
        let g = p.mu_grid(0.5);
        assert_eq!(g.len(), 32);
        assert_eq!(g[0], 0.0);
        assert!(g[31] < 0.05 && g[31] > 0.05 * (1.0 - 2e-4));
    }

    #[test]
    fn linf_of_constant_is_one() {
        let g = Arc::new(make_grid(64, 4.0, 0.01).unwrap());
        let f = ModeField::from_fn(0, g, |_| C64::new(1.0, 0.0));
        assert!((weighted_linf(&f, 0.05, 0.01) - 1.0).abs() < 1e-14);
    }
}
