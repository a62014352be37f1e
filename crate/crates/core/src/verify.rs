//! Numerical checks of the inequality machinery: time-integral bounds,
//! analyticity recovery, weight properties, kernel envelopes, nonlinear
//! estimates and the Sobolev energy bound.
//!
//! Every `<~` relation is checked by fitting the constant `C` in
//! `LHS <= C * RHS` over a sample set and requiring the fit to be finite and
//! stable when the sample set is refined.

use crate::biot_savart::BiotSavart;
use crate::field::{make_grid, weight_w, ExpWeight, ModeField, VorticityState, YGrid};
use crate::kernels::{heat_mass, residual_resolved, translation_defect, KernelError, KernelMatrix};
use crate::norms::{analytic_factor, s_mu_norm, s_norm, weighted_l2_sq_from, NormParams, NormReport, SliceRule};
use crate::quad::{self, QuadError};
use crate::solvers::Trajectory;
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Outcome of one inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub samples: usize,
    /// Largest `LHS / RHS` with the implicit constant set to 1.
    pub worst_ratio: f64,
    pub fitted_constant: f64,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    fn new(name: &str) -> Self {
        InequalityReport {
            name: name.to_string(),
            samples: 0,
            worst_ratio: 0.0,
            fitted_constant: 0.0,
            pass: true,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn detail(&mut self, key: impl Into<String>, v: f64) {
        self.details.insert(key.into(), v);
    }

    fn fail(&mut self, why: impl Into<String>) {
        self.pass = false;
        self.notes.push(why.into());
    }
}

/// Ratio accumulator with the zero-RHS guard.
#[derive(Clone, Debug, Default)]
struct Fit {
    worst: f64,
    samples: usize,
    skipped: usize,
    violated: usize,
}

impl Fit {
    fn add(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        if rhs > 0.0 {
            self.worst = self.worst.max(lhs / rhs);
        } else if lhs != 0.0 {
            self.violated += 1;
        } else {
            self.skipped += 1;
        }
    }

    fn merge(&mut self, o: &Fit) {
        self.worst = self.worst.max(o.worst);
        self.samples += o.samples;
        self.skipped += o.skipped;
        self.violated += o.violated;
    }
}

fn stable(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() <= tol * scale
}

pub fn summary_csv(reports: &[InequalityReport]) -> String {
    let mut out = String::from("name,samples,worst_ratio,fitted_constant,pass\n");
    for r in reports {
        out.push_str(&format!("{},{},{:.12e},{:.12e},{}\n", r.name, r.samples, r.worst_ratio, r.fitted_constant, r.pass));
    }
    out
}

// ---------------------------------------------------------------- time integrals

/// `int_0^t ds / (sqrt(t - s) (m - s))` by adaptive quadrature after `s = t - u^2`.
pub fn arctan_integral(t: f64, m: f64) -> Result<f64, QuadError> {
    quad::integrate(|u| 2.0 / (m - t + u * u), 0.0, t.sqrt(), 1e-300, 1e-13)
}

/// Closed form `2 arctan(sqrt(t / (m - t))) / sqrt(m - t)`.
pub fn arctan_closed(t: f64, m: f64) -> f64 {
    2.0 * (t / (m - t)).sqrt().atan() / (m - t).sqrt()
}

/// `int_0^t (t - s)^{-1/2} (mu0 - mu - gamma s)^{-p} ds`, desingularised by `s = t - u^2`.
/// `end = mu0 - mu - gamma t` is passed directly to avoid cancellation.
/// The integrand peaks in a layer of width `sqrt(end / gamma)` near `u = 0`,
/// so the range is split geometrically from that scale.
pub fn time_weight_integral(t: f64, end: f64, gamma: f64, p: f64) -> Result<f64, QuadError> {
    let f = |u: f64| 2.0 * (end + gamma * u * u).powf(-p);
    let top = t.sqrt();
    let mut cut = (end / gamma).sqrt().min(top);
    let mut total = quad::integrate(f, 0.0, cut, 1e-300, 1e-12)?;
    while cut < top {
        let next = (4.0 * cut).min(top);
        total += quad::integrate(f, cut, next, 1e-300, 1e-12)?;
        cut = next;
    }
    Ok(total)
}

fn int_t_fit(gamma: f64, alpha: f64, mu0: f64, n: usize) -> Result<(Fit, Fit), QuadError> {
    let mut high = Fit::default();
    let mut low = Fit::default();
    for a in 0..n {
        // t / (mu0 / gamma) in [0.05, 0.95]
        let tau = 0.05 + 0.9 * a as f64 / (n - 1) as f64;
        let t = tau * mu0 / gamma;
        for b in 0..n {
            // end gap as a fraction of mu0 - gamma t, from 1 down to 1e-6
            let frac = 10f64.powf(-6.0 * b as f64 / (n - 1) as f64);
            let end = frac * (mu0 - gamma * t);
            let lhs = time_weight_integral(t, end, gamma, 1.0 + alpha)?;
            high.add(lhs, 1.0 / (gamma.sqrt() * end.powf(0.5 + alpha)));
            let lhs = time_weight_integral(t, end, gamma, alpha)?;
            low.add(lhs, 1.0 / gamma.sqrt());
        }
    }
    Ok((high, low))
}

/// Arctan identity on a grid of `(t', mu')`, and fitted constants of the two
/// time-integral bounds for `gamma in {1, 4, 16, 64}`, `alpha in {0.1, 0.25, 0.4}`.
pub fn check_int_t() -> Result<InequalityReport, QuadError> {
    let mut rep = InequalityReport::new("int_t");
    let mut worst_id = 0.0f64;
    let grid5: Vec<f64> = (1..=5).map(|k| k as f64 / 6.0).collect();
    for &tp in &grid5 {
        for &frac in &grid5 {
            // mu' ranges over (t', t' + 2]
            let mp = tp + 2.0 * frac;
            let num = arctan_integral(tp, mp)?;
            let ex = arctan_closed(tp, mp);
            worst_id = worst_id.max((num - ex).abs() / ex.abs());
            rep.samples += 1;
        }
    }
    rep.detail("identity_max_rel_err", worst_id);
    if worst_id > 1e-8 {
        rep.fail(format!("arctan identity error {worst_id:e} above 1e-8"));
    }
    let mu0 = 0.1;
    for (label, pick) in [("high", 0usize), ("low", 1usize)] {
        for &alpha in &[0.1, 0.25, 0.4] {
            let mut per_gamma = Vec::new();
            for &gamma in &[1.0, 4.0, 16.0, 64.0] {
                let (h, l) = int_t_fit(gamma, alpha, mu0, 8)?;
                let (hr, lr) = int_t_fit(gamma, alpha, mu0, 16)?;
                let (base, fine) = if pick == 0 { (h, hr) } else { (l, lr) };
                rep.samples += base.samples + fine.samples;
                if !stable(base.worst, fine.worst, 0.05) {
                    rep.fail(format!("{label} alpha={alpha} gamma={gamma}: C {} -> {} under refinement", base.worst, fine.worst));
                }
                rep.detail(format!("C_{label}_alpha{alpha}_gamma{gamma}"), fine.worst);
                rep.worst_ratio = rep.worst_ratio.max(fine.worst);
                per_gamma.push(fine.worst);
            }
            let (lo, hi) = per_gamma.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
            if !(hi.is_finite() && hi <= 1.05 * lo) {
                rep.fail(format!("{label} alpha={alpha}: C varies across gamma ({lo}..{hi})"));
            }
        }
    }
    rep.fitted_constant = rep.worst_ratio;
    Ok(rep)
}

// ---------------------------------------------------------------- recovery

/// `sum_xi sup_{y <= 1+mu} w e^{eps0 (1+mu-y)_+ |xi|} |f_xi|` over a list of modes.
pub fn x_norm_modes(modes: &[ModeField], mu: f64, nu: f64, eps0: f64) -> f64 {
    modes.iter().map(|f| sup_weighted(f, mu, nu, eps0, true)).sum()
}

/// `sum_xi int_0^{1+mu} e^{eps0 (1+mu-y)_+ |xi|} |f_xi| dy`.
pub fn y_norm_modes(modes: &[ModeField], mu: f64, eps0: f64) -> f64 {
    if modes.is_empty() {
        return 0.0;
    }
    let rule = SliceRule::new(&modes[0].grid, 0.0, 1.0 + mu);
    modes
        .iter()
        .map(|f| {
            let v = rule.values(&f.values);
            v.iter()
                .zip(rule.points.iter().zip(&rule.weights))
                .map(|(v, (y, w))| w * v.norm() * analytic_factor(eps0, mu, *y, f.xi))
                .sum::<f64>()
        })
        .sum()
}

fn sup_weighted(f: &ModeField, mu: f64, nu: f64, eps0: f64, weighted: bool) -> f64 {
    let top = 1.0 + mu;
    let mut best = 0.0f64;
    for (y, v) in f.grid.nodes.iter().zip(&f.values) {
        if *y > top {
            break;
        }
        let w = if weighted { weight_w(*y, nu) } else { 1.0 };
        best = best.max(w * analytic_factor(eps0, mu, *y, f.xi) * v.norm());
    }
    let w = if weighted { weight_w(top, nu) } else { 1.0 };
    best.max(w * f.grid.eval(&f.values, top).norm())
}

fn recovery_family(grid: &Arc<YGrid>, seed: u64, members: usize) -> Vec<Vec<ModeField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..members)
        .map(|_| {
            let b = rng.gen_range(0.5..3.0);
            let c = rng.gen_range(0.0..1.0);
            let kmax = rng.gen_range(1..=8i64);
            let phase = rng.gen_range(0.0..2.0 * PI);
            (1..=kmax)
                .map(|xi| {
                    let amp = C64::from_polar(1.0 / xi as f64, phase * xi as f64);
                    ModeField::from_fn(xi, grid.clone(), |y| amp * (-b * (y - c) * (y - c)).exp())
                })
                .collect()
        })
        .collect()
}

/// Analyticity recovery for the X and Y norms on an entire-field family
/// (20 Gaussian-times-trigonometric members) and a one-mode family, over
/// gaps `2^-3 .. 2^-8` above `mu = 0`.
pub fn check_recovery(eps0: f64, nu: f64, seed: u64) -> InequalityReport {
    let mut rep = InequalityReport::new("recovery");
    let grid = Arc::new(make_grid(160, 4.0, nu).expect("recovery grid"));
    let fam = recovery_family(&grid, seed, 20);
    let gaps: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
    let mu = 0.0;
    let mut cx = Vec::new();
    let mut cy = Vec::new();
    for &gap in &gaps {
        let mut fx = Fit::default();
        let mut fy = Fit::default();
        for modes in &fam {
            let dx: Vec<ModeField> = modes.iter().map(|m| m.ddx(1)).collect();
            let dc: Vec<ModeField> = modes.iter().map(|m| m.conormal_unchecked(1)).collect();
            let lhs_x = x_norm_modes(&dx, mu, nu, eps0) + x_norm_modes(&dc, mu, nu, eps0);
            fx.add(gap * lhs_x, x_norm_modes(modes, mu + gap, nu, eps0));
            let lhs_y = y_norm_modes(&dx, mu, eps0) + y_norm_modes(&dc, mu, eps0);
            fy.add(gap * lhs_y, y_norm_modes(modes, mu + gap, eps0));
        }
        rep.samples += fx.samples + fy.samples;
        rep.detail(format!("C_x_gap{gap}"), fx.worst);
        rep.detail(format!("C_y_gap{gap}"), fy.worst);
        cx.push(fx.worst);
        cy.push(fy.worst);
    }
    for (label, c) in [("x", &cx), ("y", &cy)] {
        let first = c[0];
        let max = c.iter().cloned().fold(0.0, f64::max);
        if !(max.is_finite() && max <= 2.0 * first) {
            rep.fail(format!("{label}: constants grow as the gap shrinks ({c:?})"));
        }
        rep.worst_ratio = rep.worst_ratio.max(max);
    }
    // One-mode family: ratio is |xi| gap e^{-eps0 gap |xi|} <= 1/(eps0 e).
    let optimum = 1.0 / (eps0 * std::f64::consts::E);
    let mut one = Fit::default();
    for &gap in &gaps {
        let centre = (1.0 / (eps0 * gap)).round() as i64;
        for xi in [1, centre / 4, centre / 2, centre - 1, centre, centre + 1, 2 * centre] {
            let xi = xi.max(1);
            let f = ModeField::from_fn(xi, grid.clone(), |y| C64::new((-y * y).exp(), 0.0));
            let lhs = gap * sup_weighted(&f.ddx(1), mu, nu, eps0, true);
            one.add(lhs, sup_weighted(&f, mu + gap, nu, eps0, true));
        }
    }
    rep.samples += one.samples;
    rep.detail("C_one_mode", one.worst);
    rep.detail("one_mode_optimum", optimum);
    if !(one.worst <= 2.0 * optimum && one.worst >= 0.5 * optimum) {
        rep.fail(format!("one-mode constant {} not within 2x of {optimum}", one.worst));
    }
    rep.worst_ratio = rep.worst_ratio.max(one.worst);
    rep.fitted_constant = rep.worst_ratio;
    rep
}

// ---------------------------------------------------------------- weights

/// Weight family used by [`check_weight_properties`].
#[derive(Clone, Copy, Debug)]
pub enum WeightKind {
    Piecewise,
    Exponential(f64),
}

impl WeightKind {
    pub fn eval(self, y: f64, nu: f64) -> f64 {
        match self {
            WeightKind::Piecewise => weight_w(y, nu),
            WeightKind::Exponential(c) => ExpWeight::new(c).eval(y, nu),
        }
    }

    fn label(self) -> &'static str {
        match self {
            WeightKind::Piecewise => "piecewise",
            WeightKind::Exponential(_) => "exponential",
        }
    }
}

/// Fitted constants of properties (a), (b), (d), (e) and the extremes of (c).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WeightConstants {
    pub a: f64,
    pub b: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub d: f64,
    pub e: f64,
}

/// Samples `n` points per unit of `[0, 1 + mu0]`, with extra points in the layer.
pub fn weight_constants(kind: WeightKind, nu: f64, mu0: f64, n: usize, c_e: f64) -> WeightConstants {
    let top = 1.0 + mu0;
    let sq = nu.sqrt();
    let mut ys: Vec<f64> = (0..=n).map(|k| top * k as f64 / n as f64).collect();
    ys.extend((0..=n).map(|k| (4.0 * sq).min(top) * k as f64 / n as f64));
    ys.extend((0..=n).map(|k| (16.0 * sq * 4.0).min(top) * k as f64 / n as f64));
    ys.push(sq.min(top));
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let w: Vec<f64> = ys.iter().map(|&y| kind.eval(y, nu)).collect();
    let mut out = WeightConstants { c_min: f64::INFINITY, ..Default::default() };
    for (i, &y) in ys.iter().enumerate() {
        out.c_min = out.c_min.min(w[i] / sq);
        out.c_max = out.c_max.max(w[i]);
        out.d = out.d.max(y / w[i]);
        out.e = out.e.max(w[i] * (-y / (c_e * sq)).exp() / sq);
        for (j, &z) in ys.iter().enumerate() {
            if y <= z {
                out.a = out.a.max(w[i] / w[j]);
            }
            if y > 0.0 && y / 2.0 <= z {
                out.b = out.b.max(w[i] / w[j]);
            }
        }
    }
    out
}

/// Properties (a)–(e) for the piecewise weight and `min(sqrt(nu) e^{y/(16 sqrt(nu))}, 1)`
/// over `nu in {1, 1e-1, 1e-2, 1e-4}`.
pub fn check_weight_properties(mu0: f64) -> InequalityReport {
    let mut rep = InequalityReport::new("weights");
    let c_e = 16.0;
    for kind in [WeightKind::Piecewise, WeightKind::Exponential(16.0)] {
        let mut fits: Vec<(WeightConstants, WeightConstants)> = Vec::new();
        for &nu in &[1.0, 1e-1, 1e-2, 1e-4] {
            let base = weight_constants(kind, nu, mu0, 200, c_e);
            let fine = weight_constants(kind, nu, mu0, 400, c_e);
            rep.samples += 3 * 201 + 3 * 401;
            let l = kind.label();
            rep.detail(format!("{l}_nu{nu}_a"), fine.a);
            rep.detail(format!("{l}_nu{nu}_b"), fine.b);
            rep.detail(format!("{l}_nu{nu}_d"), fine.d);
            rep.detail(format!("{l}_nu{nu}_e"), fine.e);
            if fine.c_min < 1.0 - 1e-12 || fine.c_max > 1.0 + 1e-12 {
                rep.fail(format!("{l} nu={nu}: (c) fails, w/sqrt(nu) >= {} and w <= {}", fine.c_min, fine.c_max));
            }
            fits.push((base, fine));
        }
        let l = kind.label();
        for (name, get) in [
            ("a", (|c: &WeightConstants| c.a) as fn(&WeightConstants) -> f64),
            ("b", |c| c.b),
            ("d", |c| c.d),
            ("e", |c| c.e),
        ] {
            let base = fits.iter().map(|(b, _)| get(b)).fold(0.0, f64::max);
            let fine = fits.iter().map(|(_, f)| get(f)).fold(0.0, f64::max);
            rep.detail(format!("{l}_{name}"), fine);
            if !(fine.is_finite() && stable(base, fine, 0.10)) {
                rep.fail(format!("{l} ({name}): constant {base} -> {fine} under doubling"));
            }
            rep.worst_ratio = rep.worst_ratio.max(fine);
        }
        // (d) in the form y <= (1 + mu0) w(y) for the piecewise weight.
        if let WeightKind::Piecewise = kind {
            let d = fits.iter().map(|(_, f)| f.d).fold(0.0, f64::max);
            if d > 1.0 + mu0 + 1e-12 {
                rep.fail(format!("piecewise (d): y/w reaches {d} > 1 + mu0"));
            }
        }
    }
    rep.fitted_constant = rep.worst_ratio;
    rep
}

// ---------------------------------------------------------------- kernels

/// Envelope `b^{k+1} e^{-theta b s} + (nu t)^{-(k+1)/2} e^{-theta s^2 / (nu t)} e^{-nu xi^2 t / 8}`.
pub fn kernel_envelope(k: u32, b: f64, theta: f64, s: f64, nu: f64, t: f64, xi: f64) -> f64 {
    let nt = nu * t;
    b.powi(k as i32 + 1) * (-theta * b * s).exp()
        + nt.powf(-(k as f64 + 1.0) / 2.0) * (-theta * s * s / nt).exp() * (-nu * xi * xi * t / 8.0).exp()
}

/// `d_z^k R` in the unnormalised convention (mass `2 sqrt(pi)` for the heat part).
pub fn residual_derivatives(r: &KernelMatrix, kmax: u32) -> Vec<crate::dense::Dense> {
    let scale = heat_mass::<f64>();
    let mut cur = r.entries.clone();
    for v in &mut cur.data {
        *v *= scale;
    }
    let dt = transpose(&r.grid.d1);
    let mut out = vec![cur.clone()];
    for _ in 0..kmax {
        cur = cur.matmul(&dt);
        out.push(cur.clone());
    }
    out
}

fn transpose(m: &crate::dense::Dense) -> crate::dense::Dense {
    crate::dense::Dense::from_fn(m.cols, m.rows, |i, j| m.get(j, i))
}

/// Entries below this fraction of `max |d_z^k R|` are at the discretisation
/// noise level and are left out of the fit.
pub const RESOLUTION_FLOOR: f64 = 1e-6;

/// `C(theta) = max |d_z^k R| / envelope` for each `theta` in `thetas`.
fn envelope_constants(derivs: &[crate::dense::Dense], r: &KernelMatrix, thetas: &[f64]) -> Vec<Vec<f64>> {
    let y = &r.grid.nodes;
    let n = y.len();
    let xi = r.xi as f64;
    derivs
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let floor = RESOLUTION_FLOOR * d.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            thetas
                .par_iter()
                .map(|&th| {
                    let mut c = 0.0f64;
                    for i in 0..n {
                        for j in 0..n {
                            let v = d.get(i, j).abs();
                            if v > floor {
                                let env = kernel_envelope(k as u32, r.b, th, y[i] + y[j], r.nu, r.t, xi);
                                c = c.max(v / env);
                            }
                        }
                    }
                    c
                })
                .collect()
        })
        .collect()
}

/// Kernel-bound matrix: frequencies, times and viscosities.
#[derive(Clone, Debug)]
pub struct KernelBoundSetup {
    pub xis: Vec<i64>,
    pub times: Vec<f64>,
    pub nus: Vec<f64>,
    pub nodes: usize,
    pub ymax: f64,
    /// Largest admissible fitted constant.
    pub c_cap: f64,
}

impl Default for KernelBoundSetup {
    fn default() -> Self {
        KernelBoundSetup {
            xis: vec![0, 1, 4, 16],
            times: vec![1e-3, 1e-2, 1e-1],
            nus: vec![1e-1, 1e-2],
            nodes: 96,
            ymax: 2.0,
            c_cap: 50.0,
        }
    }
}

/// Per-`k` fit `(theta_fit, C)`: `theta_fit` is the largest `theta` on the
/// search grid whose constant stays below `c_cap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeFit {
    pub theta: f64,
    pub c: f64,
}

fn theta_grid() -> Vec<f64> {
    (0..=80).map(|k| 0.01 * 1.07f64.powi(k)).collect()
}

/// Fits the envelope on one grid size; also returns the worst translation defect.
pub fn fit_kernel_envelopes(setup: &KernelBoundSetup, nodes: usize) -> Result<(Vec<EnvelopeFit>, f64, usize), KernelError> {
    let thetas = theta_grid();
    let mut worst_c = vec![vec![0.0f64; thetas.len()]; 3];
    let mut defect = 0.0f64;
    let mut samples = 0;
    for &nu in &setup.nus {
        for &t in &setup.times {
            let grid = Arc::new(make_grid(nodes, setup.ymax, nu * t).map_err(|e| KernelError::Mismatch(e.to_string()))?);
            for &xi in &setup.xis {
                let r = residual_resolved(xi, t, nu, grid.clone())?;
                defect = defect.max(translation_defect(&r));
                let derivs = residual_derivatives(&r, 2);
                let cs = envelope_constants(&derivs, &r, &thetas);
                samples += 3 * nodes * nodes;
                for k in 0..3 {
                    for (w, c) in worst_c[k].iter_mut().zip(&cs[k]) {
                        *w = w.max(*c);
                    }
                }
            }
        }
    }
    let fits = worst_c
        .iter()
        .map(|cs| {
            let mut fit = EnvelopeFit { theta: 0.0, c: f64::INFINITY };
            for (th, c) in thetas.iter().zip(cs) {
                if *c <= setup.c_cap {
                    fit = EnvelopeFit { theta: *th, c: *c };
                }
            }
            fit
        })
        .collect();
    Ok((fits, defect, samples))
}

/// Envelope fits for `k = 0, 1, 2`, the `y + z` structure, and stability of
/// the fit under doubling of the grid.
pub fn check_kernel_bounds(setup: &KernelBoundSetup) -> Result<InequalityReport, KernelError> {
    let mut rep = InequalityReport::new("kernel_bounds");
    let (base, d0, s0) = fit_kernel_envelopes(setup, setup.nodes)?;
    let (fine, d1, s1) = fit_kernel_envelopes(setup, 2 * setup.nodes)?;
    rep.samples = s0 + s1;
    rep.detail("translation_defect", d0.max(d1));
    if d0.max(d1) > 1e-4 {
        rep.fail(format!("(d_y - d_z) R defect {:e} above 1e-4 max|R|", d0.max(d1)));
    }
    for k in 0..3 {
        rep.detail(format!("theta_k{k}"), base[k].theta);
        rep.detail(format!("C_k{k}"), base[k].c);
        rep.detail(format!("theta_k{k}_refined"), fine[k].theta);
        rep.detail(format!("C_k{k}_refined"), fine[k].c);
        if !(stable(base[k].theta, fine[k].theta, 0.10) && stable(base[k].c, fine[k].c, 0.10)) {
            rep.fail(format!("k={k}: fit ({}, {}) -> ({}, {}) under refinement", base[k].theta, base[k].c, fine[k].theta, fine[k].c));
        }
    }
    if !(base[0].theta >= 0.05 && base[0].c <= setup.c_cap) {
        rep.fail(format!("k=0 envelope: theta_fit {} C {}", base[0].theta, base[0].c));
    }
    rep.worst_ratio = base[0].c;
    rep.fitted_constant = base[0].c;
    Ok(rep)
}

// ---------------------------------------------------------------- nonlinear estimates

fn modes_of(state: &VorticityState, f: impl Fn(&ModeField) -> ModeField) -> Vec<ModeField> {
    state.modes.iter().map(f).collect()
}

fn state_with(state: &VorticityState, modes: Vec<ModeField>) -> VorticityState {
    VorticityState { modes, ..state.clone() }
}

/// LHS and RHS of the nonlinear X, Y and S_mu estimates and the two velocity
/// bounds at radius `mu`.
pub fn nonlinear_terms(state: &VorticityState, bs: &BiotSavart, mu: f64, p: &NormParams, triple: f64) -> Vec<(&'static str, f64, f64)> {
    let nu = p.nu;
    let eps = p.eps0;
    let nl = bs.nonlinearity(state);
    let n_state = state_with(state, nl.n_modes.clone());
    let xn = |m: &[ModeField]| x_norm_modes(m, mu, nu, eps);
    let yn = |m: &[ModeField]| y_norm_modes(m, mu, eps);
    let smu = |m: Vec<ModeField>| s_mu_norm(&state_with(state, m), mu);
    let der = |s: &VorticityState, i: u32, j: u32| modes_of(s, |m| m.conormal_unchecked(j).ddx(i));
    let low = [(0u32, 0u32), (1, 0), (0, 1)];
    let two = [(0u32, 0u32), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    let ys_mix = |imax: u32| -> f64 {
        (0..=imax).map(|i| yn(&der(state, i, 0)) + smu(der(state, i, 0))).sum()
    };
    let lhs_x: f64 = low.iter().map(|&(i, j)| xn(&der(&n_state, i, j))).sum();
    let lhs_y: f64 = low.iter().map(|&(i, j)| yn(&der(&n_state, i, j))).sum();
    let x2: f64 = two.iter().map(|&(i, j)| xn(&der(state, i, j))).sum();
    let x1: f64 = low.iter().map(|&(i, j)| xn(&der(state, i, j))).sum();
    let x1e: f64 = low[1..].iter().map(|&(i, j)| xn(&der(state, i, j))).sum();
    let y2: f64 = two.iter().map(|&(i, j)| yn(&der(state, i, j))).sum();
    let y1: f64 = low.iter().map(|&(i, j)| yn(&der(state, i, j))).sum();
    let y1e: f64 = low[1..].iter().map(|&(i, j)| yn(&der(state, i, j))).sum();
    let x0 = xn(&state.modes);
    let (m1, m2) = (ys_mix(1), ys_mix(2));
    let rhs_x = m1 * x2 + m2 * x1 + x0 * x1e;
    let rhs_y = m1 * y2 + m2 * y1 + x0 * y1e;
    // Sobolev estimate with plain derivatives.
    let plain = |s: &VorticityState, i: u32, j: u32| {
        modes_of(s, |m| {
            let mut f = m.clone();
            for _ in 0..j {
                f = f.dy();
            }
            f.ddx(i)
        })
    };
    let lhs_s: f64 = [(0u32, 0u32), (1, 0), (0, 1)].iter().map(|&(i, j)| smu(plain(&n_state, i, j))).sum();
    let mut z3 = 0.0;
    for j in 0..=3u32 {
        for i in 0..=(3 - j) {
            z3 += s_norm(&state_with(state, plain(state, i, j)));
        }
    }
    let rhs_s = triple * z3;
    let mut out = vec![("nonlinear_x", lhs_x, rhs_x), ("nonlinear_y", lhs_y, rhs_y), ("nonlinear_s", lhs_s, rhs_s)];
    // Velocity bounds.
    let vel = bs.velocity(state);
    let sup_e = |m: &[ModeField]| m.iter().map(|f| sup_weighted(f, mu, nu, eps, false)).sum::<f64>();
    for &(i, j) in &low {
        let u1: Vec<ModeField> = vel.u1_modes.iter().map(|m| m.conormal_unchecked(j).ddx(i)).collect();
        let dw = der(state, i + j, 0);
        let rhs = yn(&dw) + smu(dw.clone()) + if j == 1 { x0 } else { 0.0 };
        out.push(("velocity_u1", sup_e(&u1), rhs));
        let u2y: Vec<ModeField> = state
            .modes
            .iter()
            .map(|m| {
                let v = bs.u2_over_y(m).unwrap_or_else(|_| ModeField::zeros(m.xi, m.grid.clone()));
                v.ddx(i).conormal_unchecked(j)
            })
            .collect();
        let dw1 = der(state, i + 1, 0);
        out.push(("velocity_u2", sup_e(&u2y), yn(&dw1) + smu(dw1.clone())));
    }
    out
}

/// Random band-limited states with profiles from a fixed Gaussian family.
pub fn random_states(k: usize, grid: Arc<YGrid>, seed: u64, count: usize) -> Vec<VorticityState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coeffs: Vec<Vec<C64>> = (0..=k)
                .map(|xi| {
                    let decay = (-0.5 * xi as f64).exp();
                    (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay).collect()
                })
                .collect();
            VorticityState::from_profiles(k, grid.clone(), |xi, y| {
                let c = &coeffs[xi as usize];
                let g = (-y * y).exp();
                let basis = [y * g, y * y * g, (1.0 - 2.0 * y * y) * g, (-(y - 1.0) * (y - 1.0)).exp()];
                let v: C64 = c.iter().zip(basis).map(|(c, b)| c * b).sum();
                if xi == 0 {
                    C64::new(v.re, 0.0)
                } else {
                    v
                }
            })
        })
        .collect()
}

fn nonlinear_fit(states: &[VorticityState], bs: &BiotSavart, p: &NormParams) -> BTreeMap<&'static str, Fit> {
    let per: Vec<BTreeMap<&'static str, Fit>> = states
        .par_iter()
        .map(|st| {
            let triple = crate::norms::triple_norm(st, p).map(|r| r.triple).unwrap_or(f64::NAN);
            let mut m: BTreeMap<&'static str, Fit> = BTreeMap::new();
            for mu in p.mu_grid(st.time).into_iter().step_by(4) {
                for (name, l, r) in nonlinear_terms(st, bs, mu, p, triple) {
                    m.entry(name).or_default().add(l, r);
                }
            }
            m
        })
        .collect();
    let mut out: BTreeMap<&'static str, Fit> = BTreeMap::new();
    for m in per {
        for (k, f) in m {
            out.entry(k).or_default().merge(&f);
        }
    }
    out
}

/// Nonlinear and velocity estimates on `state` and on a 10-member random
/// family, with worst ratios compared across a grid doubling.
pub fn check_nonlinear_estimates(state: &VorticityState, p: &NormParams, seed: u64) -> InequalityReport {
    let mut rep = InequalityReport::new("nonlinear_estimates");
    let bs = BiotSavart::new(state.grid.clone(), state.k);
    let own = nonlinear_fit(std::slice::from_ref(state), &bs, p);
    for (name, f) in &own {
        rep.detail(format!("{name}_given_state"), f.worst);
        if f.violated > 0 {
            rep.fail(format!("{name}: nonzero LHS with zero RHS on the given state"));
        }
        rep.samples += f.samples;
    }
    let k = state.k.min(6);
    let n = state.grid.len();
    let g0 = Arc::new(make_grid(n, state.grid.ymax, p.nu).expect("grid"));
    let g1 = Arc::new(make_grid(2 * n, state.grid.ymax, p.nu).expect("grid"));
    let f0 = nonlinear_fit(&random_states(k, g0.clone(), seed, 10), &BiotSavart::new(g0, k), p);
    let f1 = nonlinear_fit(&random_states(k, g1.clone(), seed, 10), &BiotSavart::new(g1, k), p);
    for (name, a) in &f0 {
        let b = &f1[name];
        rep.samples += a.samples + b.samples;
        rep.detail(format!("{name}_random"), a.worst);
        rep.detail(format!("{name}_random_refined"), b.worst);
        if !(a.worst.is_finite() && stable(a.worst, b.worst, 0.10)) {
            rep.fail(format!("{name}: worst ratio {} -> {} under grid doubling", a.worst, b.worst));
        }
        rep.worst_ratio = rep.worst_ratio.max(a.worst).max(own.get(name).map_or(0.0, |f| f.worst));
    }
    rep.fitted_constant = rep.worst_ratio;
    rep
}

// ---------------------------------------------------------------- Sobolev energy

/// Smooth cutoff: 0 on `[0, 1/4]`, 1 on `[1/2, inf)`.
pub fn cutoff_psi(y: f64) -> f64 {
    let s = 4.0 * (y - 0.25);
    let h = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let (a, b) = (h(s), h(1.0 - s));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

fn plain_derivs(state: &VorticityState) -> Vec<Vec<ModeField>> {
    let mut out = Vec::new();
    let mut dyj = state.modes.clone();
    for j in 0..=3u32 {
        for i in 0..=(3 - j) {
            out.push(dyj.iter().map(|m| m.ddx(i)).collect());
        }
        dyj = dyj.iter().map(ModeField::dy).collect();
    }
    out
}

/// `sum_{i+j<=3} ||phi d_x^i d_y^j w||^2` with `phi = y psi(y)`.
pub fn sobolev_lhs(state: &VorticityState) -> f64 {
    let g = &state.grid;
    let rule = SliceRule::new(g, 0.25, g.ymax);
    let phi2: Vec<f64> = rule.points.iter().map(|&y| (y * cutoff_psi(y)).powi(2)).collect();
    plain_derivs(state)
        .iter()
        .flatten()
        .map(|m| {
            rule.values(&m.values).iter().zip(&rule.weights).zip(&phi2).map(|((v, w), p)| w * p * v.norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// `sum_{i+j<=3} ||y d_x^i d_y^j w||^2_{L^2(y >= 1/4)}`.
pub fn sobolev_datum(state: &VorticityState) -> f64 {
    plain_derivs(state).iter().flatten().map(|m| weighted_l2_sq_from(m, 0.25)).sum()
}

/// Energy bound along a trajectory with its norm history; the exponent
/// constant is fixed to 1 and the prefactor is fitted.
pub fn check_sobolev_gronwall(traj: &Trajectory, history: &[NormReport]) -> InequalityReport {
    let mut rep = InequalityReport::new("sobolev_gronwall");
    let d0 = sobolev_datum(&traj.snapshots[0]);
    let mut sup = 0.0f64;
    let mut fit = Fit::default();
    let mut lhs_series = Vec::new();
    for (st, h) in traj.snapshots.iter().zip(history) {
        sup = sup.max(h.triple);
        let t = st.time;
        let lhs = sobolev_lhs(st);
        let rhs = (1.0 + t * sup.powi(3)) * (t * (1.0 + sup)).exp() * d0;
        fit.add(lhs, rhs);
        lhs_series.push(lhs);
    }
    rep.samples = fit.samples;
    rep.worst_ratio = fit.worst;
    rep.fitted_constant = fit.worst;
    rep.detail("datum", d0);
    rep.detail("lhs_initial", lhs_series.first().copied().unwrap_or(0.0));
    rep.detail("lhs_final", lhs_series.last().copied().unwrap_or(0.0));
    if fit.violated > 0 {
        rep.fail("nonzero LHS with vanishing datum");
    }
    if !(fit.worst.is_finite() && fit.worst <= 100.0) {
        rep.fail(format!("fitted constant {} above 100", fit.worst));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arctan_sample_value() {
        let v = arctan_integral(0.5, 1.0).unwrap();
        assert!((v - PI / 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(cutoff_psi(0.2), 0.0);
        assert_eq!(cutoff_psi(0.6), 1.0);
        assert!(cutoff_psi(0.3) > 0.0 && cutoff_psi(0.3) < 1.0);
    }

    #[test]
    fn envelope_reduces_to_heat_scale() {
        let e = kernel_envelope(0, 10.0, 0.1, 0.0, 0.01, 1.0, 0.0);
        assert!((e - 20.0).abs() < 1e-12);
    }
}
