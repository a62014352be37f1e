//! Velocity recovery from vorticity, the boundary trace and the nonlinear forcing.

use crate::dense::Dense;
use crate::field::{ModeField, VorticityState, YGrid};
use crate::quad::gauss_legendre;
use crate::C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BiotSavartError {
    #[error("u2/y near the wall disagrees with its extrapolation by {0:e} (grid too coarse)")]
    WallCancellation(f64),
    #[error("frequency {xi} exceeds the operator range K = {k}")]
    Frequency { xi: i64, k: usize },
}

/// Gauss points per grid cell for the product integration.
const CELL_POINTS: usize = 12;

/// Product-integration matrices for one `a = |xi|`:
/// `P(y) = int_0^y e^{-a(y-z)} (1 - e^{-2az}) w dz` and
/// `Q(y) = int_y^ymax e^{-a(z-y)} w dz`.
#[derive(Clone, Debug)]
struct ModeMats {
    p: Dense,
    q: Dense,
}

fn build_mats(grid: &YGrid, a: f64, gl: &(Vec<f64>, Vec<f64>)) -> ModeMats {
    let n = grid.len();
    let y = &grid.nodes;
    let mut p = Dense::zeros(n, n);
    let mut q = Dense::zeros(n, n);
    let mut cells = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let (s0, s1) = (grid.s[k], grid.s[k + 1]);
        let half = 0.5 * (s1 - s0);
        let pts: Vec<(f64, f64, Vec<f64>)> = gl
            .0
            .iter()
            .zip(&gl.1)
            .map(|(x, w)| {
                let s = 0.5 * (s0 + s1) + half * x;
                let z = grid.y_of_s(s);
                let dz = grid.dyds_at(s) * half * w;
                (z, dz, grid.interp_row_s(s))
            })
            .collect();
        cells.push(pts);
    }
    for k in 0..n - 1 {
        let decay = (-a * (y[k + 1] - y[k])).exp();
        let mut row: Vec<f64> = p.row(k).iter().map(|v| v * decay).collect();
        for (z, dz, r) in &cells[k] {
            let c = (-a * (y[k + 1] - z)).exp() * -(-2.0 * a * z).exp_m1() * dz;
            for (o, ri) in row.iter_mut().zip(r) {
                *o += c * ri;
            }
        }
        p.data[(k + 1) * n..(k + 2) * n].copy_from_slice(&row);
    }
    for k in (0..n - 1).rev() {
        let decay = (-a * (y[k + 1] - y[k])).exp();
        let mut row: Vec<f64> = q.row(k + 1).iter().map(|v| v * decay).collect();
        for (z, dz, r) in &cells[k] {
            let c = (-a * (z - y[k])).exp() * dz;
            for (o, ri) in row.iter_mut().zip(r) {
                *o += c * ri;
            }
        }
        q.data[k * n..(k + 1) * n].copy_from_slice(&row);
    }
    ModeMats { p, q }
}

/// `(1 - e^{-2ay}) / y`, with a series where `a y` is small.
fn damped_ratio(a: f64, y: f64) -> f64 {
    let x = a * y;
    if x < 1e-3 {
        2.0 * a * (1.0 - x + 2.0 / 3.0 * x * x - x * x * x / 3.0)
    } else {
        -(-2.0 * x).exp_m1() / y
    }
}

/// Velocity modes matching a vorticity state.
#[derive(Clone, Debug)]
pub struct VelocityState {
    pub u1_modes: Vec<ModeField>,
    pub u2_modes: Vec<ModeField>,
    pub time: f64,
}

/// Forcing `N = -(u . grad w)` and boundary datum `B` per mode.
#[derive(Clone, Debug)]
pub struct NonlinearState {
    pub k: usize,
    pub n_modes: Vec<ModeField>,
    pub b_values: Vec<C64>,
}

impl NonlinearState {
    pub fn n(&self, xi: i64) -> &ModeField {
        &self.n_modes[(xi + self.k as i64) as usize]
    }

    pub fn b(&self, xi: i64) -> C64 {
        self.b_values[(xi + self.k as i64) as usize]
    }
}

/// Biot–Savart operators for `|xi| <= k` on one grid.
pub struct BiotSavart {
    pub grid: Arc<YGrid>,
    pub k: usize,
    mats: Vec<ModeMats>,
    nx: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for BiotSavart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BiotSavart").field("k", &self.k).field("nx", &self.nx).finish()
    }
}

/// Even transform length satisfying the 3/2 dealiasing rule for `K` modes.
pub fn dealiased_len(k: usize) -> usize {
    let m = 3 * k + 2;
    (m + m % 2).max(4)
}

impl BiotSavart {
    pub fn new(grid: Arc<YGrid>, k: usize) -> Self {
        let gl = gauss_legendre(CELL_POINTS);
        let mats = (0..=k).into_par_iter().map(|a| build_mats(&grid, a as f64, &gl)).collect();
        let nx = dealiased_len(k);
        let mut planner = FftPlanner::new();
        BiotSavart { fwd: planner.plan_fft_forward(nx), inv: planner.plan_fft_inverse(nx), grid, k, mats, nx }
    }

    fn mats(&self, xi: i64) -> &ModeMats {
        let a = xi.unsigned_abs() as usize;
        assert!(a <= self.k, "frequency {xi} beyond operator range {}", self.k);
        &self.mats[a]
    }

    /// Tangential velocity mode.
    pub fn u1(&self, omega: &ModeField) -> ModeField {
        let m = self.mats(omega.xi);
        let a = omega.xi.unsigned_abs() as f64;
        let q = m.q.apply_c(&omega.values);
        if a == 0.0 {
            return omega.with_values(q);
        }
        let p = m.p.apply_c(&omega.values);
        let vals = self
            .grid
            .nodes
            .iter()
            .zip(p.iter().zip(&q))
            .map(|(y, (p, q))| 0.5 * (-p + q * (1.0 + (-2.0 * a * y).exp())))
            .collect();
        omega.with_values(vals)
    }

    /// Wall-normal velocity mode; identically zero for `xi = 0`.
    pub fn u2(&self, omega: &ModeField) -> ModeField {
        if omega.xi == 0 {
            return ModeField::zeros(0, omega.grid.clone());
        }
        let m = self.mats(omega.xi);
        let a = omega.xi.unsigned_abs() as f64;
        let pref = C64::new(0.0, -0.5 * (omega.xi.signum() as f64));
        let p = m.p.apply_c(&omega.values);
        let q = m.q.apply_c(&omega.values);
        let mut vals: Vec<C64> = self
            .grid
            .nodes
            .iter()
            .zip(p.iter().zip(&q))
            .map(|(y, (p, q))| pref * (p - q * (-2.0 * a * y).exp_m1()))
            .collect();
        vals[0] = C64::new(0.0, 0.0);
        omega.with_values(vals)
    }

    fn u2_over_y_raw(&self, omega: &ModeField) -> Vec<C64> {
        let n = self.grid.len();
        if omega.xi == 0 {
            return vec![C64::new(0.0, 0.0); n];
        }
        let m = self.mats(omega.xi);
        let a = omega.xi.unsigned_abs() as f64;
        let pref = C64::new(0.0, -0.5 * (omega.xi.signum() as f64));
        let p = m.p.apply_c(&omega.values);
        let q = m.q.apply_c(&omega.values);
        let mut out = Vec::with_capacity(n);
        out.push(pref * q[0] * (2.0 * a));
        for i in 1..n {
            let y = self.grid.nodes[i];
            out.push(pref * (p[i] / y + q[i] * damped_ratio(a, y)));
        }
        out
    }

    /// `u2 / y`, with the wall value given by its limit `-i xi int e^{-|xi| z} w dz`.
    ///
    /// The wall value is compared against a quadratic extrapolation from the
    /// first three interior nodes.
    pub fn u2_over_y(&self, omega: &ModeField) -> Result<ModeField, BiotSavartError> {
        let v = self.u2_over_y_raw(omega);
        let y = &self.grid.nodes;
        let (y1, y2, y3) = (y[1], y[2], y[3]);
        let l1 = y2 * y3 / ((y1 - y2) * (y1 - y3));
        let l2 = y1 * y3 / ((y2 - y1) * (y2 - y3));
        let l3 = y1 * y2 / ((y3 - y1) * (y3 - y2));
        let extrap = v[1] * l1 + v[2] * l2 + v[3] * l3;
        let scale = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let gap = (extrap - v[0]).norm();
        if scale > 0.0 && gap > 1e-6 * scale {
            return Err(BiotSavartError::WallCancellation(gap / scale));
        }
        Ok(omega.with_values(v))
    }

    /// `-int_0^ymax e^{-|xi| z} n(z) dz`.
    pub fn trace(&self, n: &ModeField) -> C64 {
        let row = self.mats(n.xi).q.row(0);
        -row.iter().zip(&n.values).map(|(r, v)| v * r).sum::<C64>()
    }

    /// `c_xi = int e^{-|xi| z} w dz`, which equals `u1_xi(0)`.
    pub fn compatibility(&self, omega: &ModeField) -> C64 {
        -self.trace(omega)
    }

    pub fn velocity(&self, state: &VorticityState) -> VelocityState {
        let pairs: Vec<(ModeField, ModeField)> = state.modes.par_iter().map(|m| (self.u1(m), self.u2(m))).collect();
        let (u1_modes, u2_modes) = pairs.into_iter().unzip();
        VelocityState { u1_modes, u2_modes, time: state.time }
    }

    /// `||u||^2` over one period in x: `2 pi sum_xi int |u1|^2 + |u2|^2 dy`.
    pub fn velocity_l2_sq(&self, state: &VorticityState) -> f64 {
        let vel = self.velocity(state);
        velocity_l2_sq(&self.grid, &vel)
    }

    /// `N = -(u1 d_x w + (u2/y)(y d_y w))` with 3/2-rule dealiasing, and
    /// `B = int e^{-|xi| z} N dz`.
    pub fn nonlinearity(&self, omega: &VorticityState) -> NonlinearState {
        let k = omega.k;
        assert!(k <= self.k);
        let n = self.grid.len();
        let nx = self.nx;
        let parts: Vec<[Vec<C64>; 4]> = (0..=k as i64)
            .into_par_iter()
            .map(|xi| {
                let w = omega.mode(xi);
                let u1 = self.u1(w).values;
                let u2y = self.u2_over_y_raw(w);
                let wx = w.ddx(1).values;
                let ywy = w.conormal_unchecked(1).values;
                [u1, u2y, wx, ywy]
            })
            .collect();
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut phys: Vec<Vec<C64>> = Vec::with_capacity(4);
                for f in 0..4 {
                    let mut buf = vec![C64::new(0.0, 0.0); nx];
                    for xi in 0..=k {
                        let v = parts[xi][f][i];
                        buf[xi] = v;
                        if xi > 0 {
                            buf[nx - xi] = v.conj();
                        }
                    }
                    self.inv.process(&mut buf);
                    phys.push(buf);
                }
                let mut prod: Vec<C64> =
                    (0..nx).map(|j| -(phys[0][j] * phys[2][j] + phys[1][j] * phys[3][j])).collect();
                self.fwd.process(&mut prod);
                (0..=k).map(|xi| prod[xi] / nx as f64).collect()
            })
            .collect();
        let mut n_modes: Vec<ModeField> = omega.xis().map(|xi| ModeField::zeros(xi, self.grid.clone())).collect();
        let mut b_values = vec![C64::new(0.0, 0.0); 2 * k + 1];
        for xi in 0..=k {
            let mut vals: Vec<C64> = rows.iter().map(|r| r[xi]).collect();
            if xi == 0 {
                vals.iter_mut().for_each(|v| v.im = 0.0);
            }
            let field = ModeField { xi: xi as i64, values: vals, grid: self.grid.clone() };
            let b = -self.trace(&field);
            b_values[k + xi] = b;
            b_values[k - xi] = b.conj();
            n_modes[k - xi].values = field.values.iter().map(|v| v.conj()).collect();
            n_modes[k + xi] = field;
        }
        NonlinearState { k, n_modes, b_values }
    }
}

pub fn velocity_l2_sq(grid: &YGrid, vel: &VelocityState) -> f64 {
    let mut total = 0.0;
    for (a, b) in vel.u1_modes.iter().zip(&vel.u2_modes) {
        let sq: Vec<f64> = a.values.iter().zip(&b.values).map(|(u, v)| u.norm_sqr() + v.norm_sqr()).collect();
        total += grid.integrate(&sq);
    }
    2.0 * std::f64::consts::PI * total
}

fn single(omega: &ModeField) -> BiotSavart {
    BiotSavart::new(omega.grid.clone(), omega.xi.unsigned_abs() as usize)
}

/// One-off tangential velocity of a single mode.
pub fn velocity_u1(omega: &ModeField) -> ModeField {
    single(omega).u1(omega)
}

/// One-off wall-normal velocity of a single mode.
pub fn velocity_u2(omega: &ModeField) -> ModeField {
    single(omega).u2(omega)
}

/// One-off `u2 / y` of a single mode.
pub fn u2_over_y(omega: &ModeField) -> Result<ModeField, BiotSavartError> {
    single(omega).u2_over_y(omega)
}

/// One-off `-int e^{-|xi| z} n dz`.
pub fn trace_operator(n: &ModeField) -> C64 {
    single(n).trace(n)
}
