//! Grids, Fourier-in-x fields, derivative operators and the boundary-layer weight.

use crate::dense::Dense;
use crate::real::Real;
use crate::C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("grid needs at least 32 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("ymax must be at least 2, got {0}")]
    DomainTooShort(f64),
    #[error("viscosity must be positive, got {0}")]
    BadViscosity(f64),
    #[error("{n} nodes cannot place 9 nodes with spacing <= sqrt(nu)/8 inside [0, {layer:e}]")]
    LayerUnresolved { n: usize, layer: f64 },
    #[error("differentiation noise estimate {0:e} exceeds 1e-6 (grid too coarse)")]
    DifferentiationNoise(f64),
    #[error("nx = {nx} aliases modes up to K = {k}; need nx >= 2K+2")]
    Aliasing { nx: usize, k: usize },
    #[error("sample array has {got} entries, expected {expected}")]
    Shape { got: usize, expected: usize },
}

/// Mapped Legendre–Gauss–Lobatto grid on `[0, ymax]`, clustered at the wall.
#[derive(Clone, Debug)]
pub struct YGrid {
    pub nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    pub nu_hint: f64,
    pub ymax: f64,
    /// Clustering parameter of the exponential map (0 means affine).
    pub kappa: f64,
    /// Reference coordinate in [-1, 1] for each node.
    pub s: Vec<f64>,
    /// dy/ds at each node.
    pub dyds: Vec<f64>,
    bary: Vec<f64>,
    /// First-derivative matrix in y.
    pub d1: Dense,
    /// Second-derivative matrix in y.
    pub d2: Dense,
}

fn map_nodes(s: &[f64], ymax: f64, kappa: f64) -> (Vec<f64>, Vec<f64>) {
    let n = s.len();
    let mut y = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for &sk in s {
        if kappa == 0.0 {
            y.push(ymax * (1.0 + sk) / 2.0);
            dy.push(ymax / 2.0);
        } else {
            let den = kappa.exp_m1();
            y.push(ymax * (kappa * (1.0 + sk) / 2.0).exp_m1() / den);
            dy.push(ymax * kappa / 2.0 * (kappa * (1.0 + sk) / 2.0).exp() / den);
        }
    }
    y[0] = 0.0;
    y[n - 1] = ymax;
    (y, dy)
}

fn layer_resolved(y: &[f64], layer: f64) -> bool {
    let inside: Vec<f64> = y.iter().copied().filter(|&v| v <= layer).collect();
    if inside.len() < 9 {
        return false;
    }
    inside.windows(2).all(|w| w[1] - w[0] <= layer / 8.0)
}

/// Legendre–Gauss–Lobatto nodes (ascending) and weights on [-1, 1].
pub fn gauss_lobatto(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let n = npts - 1;
    let nf = n as f64;
    let mut x = vec![0.0; npts];
    let mut w = vec![0.0; npts];
    // P_n and its derivatives by recurrence
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let p = p1;
        let dp = nf * (p0 - z * p) / (1.0 - z * z);
        let d2p = (2.0 * z * dp - nf * (nf + 1.0) * p) / (1.0 - z * z);
        (p, dp, d2p)
    };
    x[0] = -1.0;
    x[n] = 1.0;
    for k in 1..n {
        let mut z = -(PI * k as f64 / nf).cos();
        for _ in 0..100 {
            let (_, dp, d2p) = legendre(z);
            let dz = dp / d2p;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[k] = z;
    }
    for k in 0..npts {
        let p = if k == 0 || k == n {
            if k == 0 && n % 2 == 1 { -1.0 } else { 1.0 }
        } else {
            legendre(x[k]).0
        };
        w[k] = 2.0 / (nf * (nf + 1.0) * p * p);
    }
    (x, w)
}

fn barycentric_weights(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut logs = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for k in 0..n {
        let (mut l, mut sg) = (0.0, 1.0);
        for j in 0..n {
            if j != k {
                let d = s[k] - s[j];
                l += d.abs().ln();
                if d < 0.0 {
                    sg = -sg;
                }
            }
        }
        logs.push(l);
        signs.push(sg);
    }
    let mean = logs.iter().sum::<f64>() / n as f64;
    logs.iter().zip(&signs).map(|(l, sg)| sg * (mean - l).exp()).collect()
}

/// Builds a wall-clustered grid with `n_nodes` points on `[0, ymax]`.
///
/// The clustering parameter is the smallest one (scanned in steps of 0.01)
/// that puts at least 9 nodes in `[0, sqrt(nu)]` with spacing at most
/// `sqrt(nu)/8` there.
pub fn make_grid(n_nodes: usize, ymax: f64, nu: f64) -> Result<YGrid, FieldError> {
    if n_nodes < 32 {
        return Err(FieldError::TooFewNodes(n_nodes));
    }
    if !(ymax >= 2.0) {
        return Err(FieldError::DomainTooShort(ymax));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(FieldError::BadViscosity(nu));
    }
    let n = n_nodes;
    let (s, ref_weights) = gauss_lobatto(n);
    let layer = nu.sqrt();
    let mut found = None;
    for step in 0..=2000 {
        let kappa = step as f64 * 0.01;
        let (y, dy) = map_nodes(&s, ymax, kappa);
        if layer_resolved(&y, layer) {
            found = Some((kappa, y, dy));
            break;
        }
    }
    let (kappa, nodes, dyds) = found.ok_or(FieldError::LayerUnresolved { n, layer })?;
    let quad_weights: Vec<f64> = ref_weights.iter().zip(&dyds).map(|(w, d)| w * d).collect();
    let bary = barycentric_weights(&s);
    let mut ds = Dense::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (s[i] - s[j]);
                ds.set(i, j, v);
                diag -= v;
            }
        }
        ds.set(i, i, diag);
    }
    let d1 = Dense::from_fn(n, n, |i, j| ds.get(i, j) / dyds[i]);
    let d2 = d1.matmul(&d1);
    Ok(YGrid { nodes, quad_weights, nu_hint: nu, ymax, kappa, s, dyds, bary, d1, d2 })
}

impl YGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Reference coordinate of a physical point.
    pub fn s_of_y(&self, y: f64) -> f64 {
        if self.kappa == 0.0 {
            2.0 * y / self.ymax - 1.0
        } else {
            2.0 / self.kappa * (y / self.ymax * self.kappa.exp_m1()).ln_1p() - 1.0
        }
    }

    /// Physical point of a reference coordinate.
    pub fn y_of_s(&self, s: f64) -> f64 {
        if self.kappa == 0.0 {
            self.ymax * (1.0 + s) / 2.0
        } else {
            self.ymax * (self.kappa * (1.0 + s) / 2.0).exp_m1() / self.kappa.exp_m1()
        }
    }

    /// dy/ds at reference coordinate `s`.
    pub fn dyds_at(&self, s: f64) -> f64 {
        if self.kappa == 0.0 {
            self.ymax / 2.0
        } else {
            self.ymax * self.kappa / 2.0 * (self.kappa * (1.0 + s) / 2.0).exp() / self.kappa.exp_m1()
        }
    }

    /// Barycentric interpolation weights for the point with reference coordinate `s`.
    pub fn interp_row_s(&self, s: f64) -> Vec<f64> {
        let n = self.len();
        let mut row = vec![0.0; n];
        for (k, &sk) in self.s.iter().enumerate() {
            if (s - sk).abs() < 1e-15 {
                row[k] = 1.0;
                return row;
            }
        }
        let mut total = 0.0;
        for k in 0..n {
            let v = self.bary[k] / (s - self.s[k]);
            row[k] = v;
            total += v;
        }
        for v in &mut row {
            *v /= total;
        }
        row
    }

    /// Interpolation matrix from grid values to the physical points `ys`.
    pub fn interp_matrix(&self, ys: &[f64]) -> Dense {
        let mut m = Dense::zeros(ys.len(), self.len());
        for (i, &y) in ys.iter().enumerate() {
            let row = self.interp_row_s(self.s_of_y(y));
            m.data[i * self.len()..(i + 1) * self.len()].copy_from_slice(&row);
        }
        m
    }

    /// Evaluates the interpolant of grid values at a physical point.
    pub fn eval(&self, values: &[C64], y: f64) -> C64 {
        let row = self.interp_row_s(self.s_of_y(y));
        row.iter().zip(values).map(|(w, v)| v * w).sum()
    }

    /// Complex-argument evaluation of the interpolant at reference coordinate `s`.
    pub fn eval_complex_s(&self, values: &[C64], s: C64) -> C64 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for (k, &sk) in self.s.iter().enumerate() {
            let d = s - sk;
            if d.norm() < 1e-15 {
                return values[k];
            }
            let c = self.bary[k] / d;
            num += c * values[k];
            den += c;
        }
        num / den
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.quad_weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_c(&self, values: &[C64]) -> C64 {
        self.quad_weights.iter().zip(values).map(|(w, v)| v * w).sum()
    }

    pub fn dy(&self, values: &[C64]) -> Vec<C64> {
        self.d1.apply_c(values)
    }

    /// Largest node gap.
    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).fold(0.0, |m, w| m.max(w[1] - w[0]))
    }

    /// Discrete Legendre coefficients of grid values in the reference variable.
    pub fn legendre_coeffs(&self, values: &[C64]) -> Vec<C64> {
        let n = self.len();
        let rw: Vec<f64> = self.quad_weights.iter().zip(&self.dyds).map(|(w, d)| w / d).collect();
        let mut p_prev = vec![1.0; n];
        let mut p_cur = self.s.clone();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let p = if k == 0 { &p_prev } else { &p_cur };
            let mut num = C64::new(0.0, 0.0);
            let mut den = 0.0;
            for j in 0..n {
                num += values[j] * (rw[j] * p[j]);
                den += rw[j] * p[j] * p[j];
            }
            out.push(num / den);
            if k >= 1 {
                let kf = k as f64;
                let next: Vec<f64> = (0..n)
                    .map(|j| ((2.0 * kf + 1.0) * self.s[j] * p_cur[j] - kf * p_prev[j]) / (kf + 1.0))
                    .collect();
                p_prev = std::mem::replace(&mut p_cur, next);
            }
        }
        out
    }

    /// Relative size of the Legendre tail, amplified by `order` derivatives.
    pub fn noise_estimate(&self, values: &[C64], order: u32) -> f64 {
        let c = self.legendre_coeffs(values);
        let peak = c.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let n = c.len();
        let start = (n * 9) / 10;
        let tail = c[start..].iter().fold(0.0f64, |m, v| m.max(v.norm()));
        tail / peak * ((n - 1) as f64).powi(2 * order as i32)
    }
}

/// Boundary-layer weight: `sqrt(nu)` in the layer, `y` in between, 1 beyond `y = 1`.
pub fn weight_w<T: Real>(y: T, nu: T) -> T {
    let sq = nu.sqrt();
    if y <= sq {
        sq
    } else if y <= T::one() {
        y
    } else {
        T::one()
    }
}

/// Smooth alternative weight `min(sqrt(nu) e^{y/(c sqrt(nu))}, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct ExpWeight<T> {
    pub c: T,
}

impl<T: Real> ExpWeight<T> {
    pub fn new(c: T) -> Self {
        ExpWeight { c }
    }

    pub fn eval(&self, y: T, nu: T) -> T {
        let sq = nu.sqrt();
        (sq * (y / (self.c * sq)).exp()).min(T::one())
    }
}

/// Profile of one tangential Fourier mode.
#[derive(Clone, Debug)]
pub struct ModeField {
    pub xi: i64,
    pub values: Vec<C64>,
    pub grid: Arc<YGrid>,
}

impl ModeField {
    pub fn zeros(xi: i64, grid: Arc<YGrid>) -> Self {
        ModeField { xi, values: vec![C64::new(0.0, 0.0); grid.len()], grid }
    }

    pub fn from_fn(xi: i64, grid: Arc<YGrid>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes.iter().map(|&y| f(y)).collect();
        ModeField { xi, values, grid }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn with_values(&self, values: Vec<C64>) -> Self {
        ModeField { xi: self.xi, values, grid: self.grid.clone() }
    }

    /// `(i xi)^order f`.
    pub fn ddx(&self, order: u32) -> ModeField {
        let factor = C64::new(0.0, self.xi as f64).powu(order);
        self.with_values(self.values.iter().map(|v| v * factor).collect())
    }

    /// Plain wall-normal derivative.
    pub fn dy(&self) -> ModeField {
        self.with_values(self.grid.dy(&self.values))
    }

    /// `(y d/dy)^order f` without the noise check.
    pub fn conormal_unchecked(&self, order: u32) -> ModeField {
        let mut v = self.values.clone();
        for _ in 0..order {
            v = self.grid.dy(&v);
            for (x, y) in v.iter_mut().zip(&self.grid.nodes) {
                *x *= *y;
            }
        }
        self.with_values(v)
    }

    /// `(y d/dy)^order f`, rejecting under-resolved inputs.
    pub fn conormal_dy(&self, order: u32) -> Result<ModeField, FieldError> {
        if order > 0 {
            let est = self.grid.noise_estimate(&self.values, order);
            if est > 1e-6 {
                return Err(FieldError::DifferentiationNoise(est));
            }
        }
        Ok(self.conormal_unchecked(order))
    }
}

/// Physical and numerical parameters of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub nu: f64,
    pub mu0: f64,
    pub gamma: f64,
    pub eps0: f64,
    pub alpha: f64,
    pub theta0: f64,
    /// Largest tangential frequency.
    pub k: usize,
    pub dt: f64,
    /// Final time.
    pub t_final: f64,
    pub ny: usize,
    pub ymax: f64,
    /// Gauss nodes per Duhamel window.
    pub quad_order: usize,
    /// Steps between stored snapshots.
    pub snapshot_every: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("nu = {0} must be positive")]
    Nu(f64),
    #[error("mu0 = {0} violates the radius constraint μ0 ∈ (0, 1/10]")]
    Mu0(f64),
    #[error("gamma = {0} must be positive")]
    Gamma(f64),
    #[error("eps0 = {0} must lie in (0, 1)")]
    Eps0(f64),
    #[error("alpha = {0} violates the time-weight constraint α ∈ (0, 1/2)")]
    Alpha(f64),
    #[error("theta0 = {0} must be positive")]
    Theta0(f64),
    #[error("T = {t} violates the time window T < μ0/(2γ) = {limit}")]
    Horizon { t: f64, limit: f64 },
    #[error("invalid numerics: {0}")]
    Numerics(String),
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nu: 0.05,
            mu0: 0.1,
            gamma: 0.1,
            eps0: 0.05,
            alpha: 0.25,
            theta0: 0.25,
            k: 8,
            dt: 1e-3,
            t_final: 0.1,
            ny: 128,
            ymax: 8.0,
            quad_order: 4,
            snapshot_every: 10,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(ConfigError::Nu(self.nu));
        }
        if !(self.mu0 > 0.0 && self.mu0 <= 0.1) {
            return Err(ConfigError::Mu0(self.mu0));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(ConfigError::Gamma(self.gamma));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            return Err(ConfigError::Eps0(self.eps0));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if !(self.theta0 > 0.0) {
            return Err(ConfigError::Theta0(self.theta0));
        }
        let limit = self.horizon();
        if !(self.t_final >= 0.0 && self.t_final < limit) {
            return Err(ConfigError::Horizon { t: self.t_final, limit });
        }
        if !(self.dt > 0.0) {
            return Err(ConfigError::Numerics(format!("dt = {} must be positive", self.dt)));
        }
        if self.ny < 32 {
            return Err(ConfigError::Numerics(format!("ny = {} must be at least 32", self.ny)));
        }
        if self.ymax < 2.0 {
            return Err(ConfigError::Numerics(format!("ymax = {} must be at least 2", self.ymax)));
        }
        if self.quad_order == 0 || self.quad_order > 12 {
            return Err(ConfigError::Numerics(format!("quad_order = {} must be in 1..=12", self.quad_order)));
        }
        if self.snapshot_every == 0 {
            return Err(ConfigError::Numerics("snapshot_every must be positive".into()));
        }
        Ok(())
    }

    /// Supremum of admissible times, `mu0 / (2 gamma)`.
    pub fn horizon(&self) -> f64 {
        self.mu0 / (2.0 * self.gamma)
    }

    /// Radius limit `mu0 - gamma t`.
    pub fn mu_max(&self, t: f64) -> f64 {
        self.mu0 - self.gamma * t
    }

    pub fn grid(&self) -> Result<YGrid, FieldError> {
        make_grid(self.ny, self.ymax, self.nu)
    }
}

/// All tangential modes `xi in [-K, K]` of the vorticity at one time.
#[derive(Clone, Debug)]
pub struct VorticityState {
    pub k: usize,
    pub grid: Arc<YGrid>,
    /// `modes[xi + K]`.
    pub modes: Vec<ModeField>,
    pub time: f64,
}

impl VorticityState {
    pub fn zeros(k: usize, grid: Arc<YGrid>) -> Self {
        let modes = (-(k as i64)..=k as i64).map(|xi| ModeField::zeros(xi, grid.clone())).collect();
        VorticityState { k, grid, modes, time: 0.0 }
    }

    /// Builds a state from profiles `f(xi, y)` for `xi >= 0`, filling negative
    /// frequencies by conjugation.
    pub fn from_profiles(k: usize, grid: Arc<YGrid>, f: impl Fn(i64, f64) -> C64) -> Self {
        let mut st = Self::zeros(k, grid);
        for xi in 0..=k as i64 {
            let vals: Vec<C64> = st.grid.nodes.iter().map(|&y| f(xi, y)).collect();
            st.set_mode(xi, vals);
        }
        st
    }

    pub fn mode(&self, xi: i64) -> &ModeField {
        &self.modes[(xi + self.k as i64) as usize]
    }

    pub fn mode_mut(&mut self, xi: i64) -> &mut ModeField {
        let k = self.k as i64;
        &mut self.modes[(xi + k) as usize]
    }

    /// Sets mode `xi` and its conjugate partner `-xi`.
    pub fn set_mode(&mut self, xi: i64, values: Vec<C64>) {
        if xi == 0 {
            self.mode_mut(0).values = values.iter().map(|v| C64::new(v.re, 0.0)).collect();
        } else {
            self.mode_mut(-xi).values = values.iter().map(|v| v.conj()).collect();
            self.mode_mut(xi).values = values;
        }
    }

    pub fn xis(&self) -> impl Iterator<Item = i64> {
        -(self.k as i64)..=self.k as i64
    }

    /// Largest deviation from `f_{-xi} = conj(f_xi)`.
    pub fn conjugate_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for xi in 0..=self.k as i64 {
            let a = &self.mode(xi).values;
            let b = &self.mode(-xi).values;
            for (u, v) in a.iter().zip(b) {
                worst = worst.max((u - v.conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.modes.iter().all(ModeField::is_finite)
    }

    /// `sum_xi int |f_xi|^2 dy` (Parseval, without the 2 pi factor).
    pub fn l2_sq(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let sq: Vec<f64> = m.values.iter().map(|v| v.norm_sqr()).collect();
                self.grid.integrate(&sq)
            })
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.modes {
            for v in &mut m.values {
                *v *= c;
            }
        }
        out
    }

    /// `self - other`, mode by mode.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, o) in out.modes.iter_mut().zip(&other.modes) {
            for (v, w) in m.values.iter_mut().zip(&o.values) {
                *v -= w;
            }
        }
        out
    }

    /// Copy with frequencies truncated or zero-padded to `k`.
    pub fn with_k(&self, k: usize) -> Self {
        let mut out = Self::zeros(k, self.grid.clone());
        out.time = self.time;
        let kk = k.min(self.k) as i64;
        for xi in -kk..=kk {
            out.mode_mut(xi).values = self.mode(xi).values.clone();
        }
        out
    }

    /// Real samples `f(x_j, y_i)`, `x_j = 2 pi j / nx`, stored as `[j * ny + i]`.
    pub fn to_physical(&self, nx: usize) -> Result<Vec<f64>, FieldError> {
        if nx < 2 * self.k + 2 {
            return Err(FieldError::Aliasing { nx, k: self.k });
        }
        let ny = self.grid.len();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_inverse(nx);
        let mut out = vec![0.0; nx * ny];
        let mut buf = vec![C64::new(0.0, 0.0); nx];
        for i in 0..ny {
            buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
            for xi in self.xis() {
                buf[xi.rem_euclid(nx as i64) as usize] = self.mode(xi).values[i];
            }
            fft.process(&mut buf);
            for j in 0..nx {
                out[j * ny + i] = buf[j].re;
            }
        }
        Ok(out)
    }

    /// Mode analysis of real samples laid out as in [`VorticityState::to_physical`].
    pub fn from_physical(samples: &[f64], nx: usize, k: usize, grid: Arc<YGrid>) -> Result<Self, FieldError> {
        let ny = grid.len();
        if samples.len() != nx * ny {
            return Err(FieldError::Shape { got: samples.len(), expected: nx * ny });
        }
        if nx < 2 * k + 2 {
            return Err(FieldError::Aliasing { nx, k });
        }
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(nx);
        let mut st = Self::zeros(k, grid);
        let mut buf = vec![C64::new(0.0, 0.0); nx];
        for i in 0..ny {
            for j in 0..nx {
                buf[j] = C64::new(samples[j * ny + i], 0.0);
            }
            fft.process(&mut buf);
            for xi in -(k as i64)..=k as i64 {
                st.mode_mut(xi).values[i] = buf[xi.rem_euclid(nx as i64) as usize] / nx as f64;
            }
        }
        Ok(st)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoint_contract() {
        let g = make_grid(64, 4.0, 1.0).unwrap();
        assert_eq!(g.nodes[0], 0.0);
        assert_eq!(g.nodes[63], 4.0);
    }

    #[test]
    fn grid_resolves_thin_layer() {
        let g = make_grid(256, 4.0, 1e-4).unwrap();
        assert!(g.nodes.iter().filter(|&&y| y < 0.01).count() >= 8);
    }

    #[test]
    fn grid_weights_sum_to_length() {
        let g = make_grid(256, 4.0, 1e-2).unwrap();
        let s: f64 = g.quad_weights.iter().sum();
        assert!((s - 4.0).abs() <= 4.0 * 1e-12, "sum = {s}");
        assert!(g.quad_weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn grid_rejects_small_counts() {
        assert_eq!(make_grid(16, 4.0, 1.0).unwrap_err(), FieldError::TooFewNodes(16));
        assert!(matches!(make_grid(32, 8.0, 1e-8), Err(FieldError::LayerUnresolved { .. })));
    }

    #[test]
    fn weight_branches() {
        assert!((weight_w(0.05, 0.01) - 0.1f64).abs() < 1e-15);
        assert_eq!(weight_w(0.5, 0.01), 0.5);
        assert_eq!(weight_w(1.05, 0.01), 1.0);
        assert_eq!(weight_w(0.05f32, 0.01f32), 0.1f32.max(0.1));
    }

    #[test]
    fn ddx_examples() {
        let g = Arc::new(make_grid(32, 2.0, 1.0).unwrap());
        let one = ModeField::from_fn(0, g.clone(), |_| C64::new(1.0, 0.0));
        assert!(one.ddx(1).values.iter().all(|v| v.norm() == 0.0));
        let f2 = ModeField { xi: 2, ..one.clone() };
        assert!(f2.ddx(1).values.iter().all(|v| *v == C64::new(0.0, 2.0)));
        let f3 = ModeField { xi: 3, ..one };
        assert!(f3.ddx(2).values.iter().all(|v| (*v - C64::new(-9.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn conormal_examples() {
        let g = Arc::new(make_grid(64, 4.0, 0.05).unwrap());
        let f = ModeField::from_fn(0, g.clone(), |y| C64::new(y * y, 0.0));
        let d = f.conormal_dy(1).unwrap();
        for (v, y) in d.values.iter().zip(&g.nodes) {
            assert!((v.re - 2.0 * y * y).abs() < 1e-9 * (1.0 + y * y));
        }
        let c = ModeField::from_fn(0, g.clone(), |_| C64::new(1.0, 0.0));
        let d = c.conormal_dy(1).unwrap();
        assert!(d.values.iter().all(|v| v.norm() < 1e-9));
        assert_eq!(d.values[0], C64::new(0.0, 0.0));
        let e = ModeField::from_fn(0, g.clone(), |y| C64::new((-y).exp(), 0.0));
        let d = e.conormal_dy(2).unwrap();
        for (v, &y) in d.values.iter().zip(&g.nodes) {
            assert!((v.re - (y * y - y) * (-y).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn conormal_flags_noise() {
        let g = Arc::new(make_grid(64, 8.0, 1.0).unwrap());
        let f = ModeField::from_fn(0, g, |y| C64::new((-(y - 4.0).powi(2) * 400.0).exp(), 0.0));
        assert!(matches!(f.conormal_dy(1), Err(FieldError::DifferentiationNoise(_))));
    }

    #[test]
    fn physical_examples() {
        let g = Arc::new(make_grid(32, 2.0, 1.0).unwrap());
        let mut st = VorticityState::zeros(2, g.clone());
        st.set_mode(0, vec![C64::new(1.0, 0.0); g.len()]);
        let p = st.to_physical(8).unwrap();
        assert!(p.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let mut st = VorticityState::zeros(1, g.clone());
        st.set_mode(1, vec![C64::new(0.5, 0.0); g.len()]);
        let p = st.to_physical(8).unwrap();
        for j in 0..8 {
            let x = 2.0 * PI * j as f64 / 8.0;
            assert!((p[j * g.len() + 3] - x.cos()).abs() < 1e-14);
        }
        assert_eq!(st.to_physical(3).unwrap_err(), FieldError::Aliasing { nx: 3, k: 1 });
    }
}
