//! Heat kernels, the discrete Robin operator and the Stokes Green's function.
//!
//! Kernel matrices are unit-mass normalised: the Neumann kernel matrix is
//! `heat_htilde / (2 sqrt(pi))`, so that `int G(t, y, z) dz -> 1` as `t -> 0`.
//! The scalar functions [`heat_h`] and [`heat_htilde`] keep the unnormalised form.

use crate::dense::{Dense, Lu};
use crate::field::{ModeField, YGrid};
use crate::quad::{self, QuadError};
use crate::real::Real;
use crate::C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("eigendecomposition of the Robin operator failed")]
    Eigen,
    #[error("Robin operator has complex spectrum (max |Im| = {0:e})")]
    ComplexSpectrum(f64),
    #[error("Robin operator has an unstable eigenvalue {0:e}")]
    Unstable(f64),
    #[error("kernel is negative ({0:e} relative) where it must be positive")]
    Positivity(f64),
    #[error("residual kernel is not a function of y+z: defect {defect:e} > {tol:e} * max|R| = {max:e}")]
    NotTranslationInvariant { defect: f64, tol: f64, max: f64 },
    #[error("kernel metadata mismatch: {0}")]
    Mismatch(String),
    #[error("elapsed time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Free-space heat kernel `(nu t)^{-1/2} e^{-(y-z)^2/(4 nu t)} e^{-nu xi^2 t}`.
pub fn heat_h<T: Real>(xi: T, t: T, y: T, z: T, nu: T) -> T {
    let nt = nu * t;
    let d = y - z;
    (-(d * d) / (T::lit(4.0) * nt) - nu * xi * xi * t).exp() / nt.sqrt()
}

/// Neumann half-line kernel: `heat_h(y, z) + heat_h(y, -z)`.
pub fn heat_htilde<T: Real>(xi: T, t: T, y: T, z: T, nu: T) -> T {
    heat_h(xi, t, y, z, nu) + heat_h(xi, t, y, -z, nu)
}

/// Mass of `z -> heat_h(0, t, y, z, nu)` over the real line.
pub fn heat_mass<T: Real>() -> T {
    T::lit(2.0) * T::PI().sqrt()
}

/// Galerkin form (Lobatto quadrature, lumped mass) of `nu (d_yy - a^2)` with
/// the natural condition `nu (d_y + a) w = B` at `y = 0` and `w = 0` at `y = ymax`.
///
/// The unknowns are the values at every node but the last; they evolve as
/// `w' = M^{-1} L w - (B / m_0) e_0 + F`, with `M = diag(m)`.
#[derive(Clone, Debug)]
pub struct RobinOperator {
    pub grid: Arc<YGrid>,
    pub nu: f64,
    /// `|xi|`.
    pub a: f64,
    /// Symmetric stiffness part `L`.
    pub lmat: Dense,
    /// Lumped mass (quadrature weights without the last node).
    pub mass: Vec<f64>,
    /// Eigenvalues of `M^{-1} L`, descending.
    pub lambda: Vec<f64>,
    /// Orthonormal eigenvectors of `M^{-1/2} L M^{-1/2}` (columns).
    pub q: Dense,
    sqrt_mass: Vec<f64>,
}

impl RobinOperator {
    pub fn new(grid: Arc<YGrid>, nu: f64, a: f64) -> Result<Self, KernelError> {
        let n = grid.len();
        let m = n - 1;
        let d1 = &grid.d1;
        let w = &grid.quad_weights;
        let mut lmat = Dense::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut k = 0.0;
                for (qn, wq) in w.iter().enumerate() {
                    k += wq * d1.get(qn, i) * d1.get(qn, j);
                }
                let mut v = -nu * k;
                if i == j {
                    v -= nu * a * a * w[i];
                }
                if i == 0 && j == 0 {
                    v += nu * a;
                }
                lmat.set(i, j, v);
                lmat.set(j, i, v);
            }
        }
        let mass: Vec<f64> = w[..m].to_vec();
        let sqrt_mass: Vec<f64> = mass.iter().map(|v| v.sqrt()).collect();
        let sym = faer::Mat::<f64>::from_fn(m, m, |i, j| lmat.get(i, j) / (sqrt_mass[i] * sqrt_mass[j]));
        let evd = sym.self_adjoint_eigen(faer::Side::Lower).map_err(|_| KernelError::Eigen)?;
        let s = evd.S();
        let u = evd.U();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&p, &r| s[r].partial_cmp(&s[p]).unwrap());
        let lambda: Vec<f64> = order.iter().map(|&k| s[k]).collect();
        let scale = lambda.iter().fold(0.0f64, |acc, l| acc.max(l.abs())).max(1e-300);
        if !lambda.iter().all(|l| l.is_finite()) {
            return Err(KernelError::Eigen);
        }
        if lambda[0] > 1e-9 * scale {
            return Err(KernelError::Unstable(lambda[0]));
        }
        let q = Dense::from_fn(m, m, |i, c| u[(i, order[c])]);
        Ok(RobinOperator { grid, nu, a, lmat, mass, lambda, q, sqrt_mass })
    }

    /// Number of unknowns (all nodes except `y = ymax`).
    pub fn n_dof(&self) -> usize {
        self.lambda.len()
    }

    /// Full profile from the unknowns (appends the zero at `y = ymax`).
    pub fn lift(&self, dof: &[C64]) -> Vec<C64> {
        let mut full = dof.to_vec();
        full.push(C64::new(0.0, 0.0));
        full
    }

    pub fn restrict<'a>(&self, full: &'a [C64]) -> &'a [C64] {
        &full[..full.len() - 1]
    }

    /// `nu (d_y + a) w(0) - b` evaluated in strong form.
    pub fn boundary_defect(&self, full: &[C64], b: C64) -> C64 {
        let dw: C64 = self.grid.d1.row(0).iter().zip(full).map(|(d, w)| w * d).sum();
        (dw + full[0] * self.a) * self.nu - b
    }

    /// Modal coordinates `Q^T M^{1/2} w`.
    pub fn to_modal(&self, dof: &[C64]) -> Vec<C64> {
        let m = self.n_dof();
        let scaled: Vec<C64> = dof.iter().zip(&self.sqrt_mass).map(|(v, s)| v * s).collect();
        let mut out = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            let row = self.q.row(i);
            let x = scaled[i];
            for (o, qv) in out.iter_mut().zip(row) {
                *o += x * qv;
            }
        }
        out
    }

    /// Nodal values `M^{-1/2} Q z`.
    pub fn from_modal(&self, modal: &[C64]) -> Vec<C64> {
        let mut out = self.q.apply_c(modal);
        for (o, s) in out.iter_mut().zip(&self.sqrt_mass) {
            *o /= s;
        }
        out
    }

    /// Modal image of a unit boundary datum: `Q^T M^{1/2} (e_0 / m_0)`.
    pub fn boundary_modal(&self) -> Vec<f64> {
        self.q.row(0).iter().map(|v| v / self.sqrt_mass[0]).collect()
    }

    /// Nodal propagator `exp(t M^{-1} L)`.
    pub fn propagator(&self, t: f64) -> Dense {
        let m = self.n_dof();
        let e: Vec<f64> = self.lambda.iter().map(|l| (l * t).exp()).collect();
        let mut left = Dense::zeros(m, m);
        for i in 0..m {
            for c in 0..m {
                left.set(i, c, self.q.get(i, c) * e[c] / self.sqrt_mass[i]);
            }
        }
        let right = Dense::from_fn(m, m, |c, j| self.q.get(j, c) * self.sqrt_mass[j]);
        left.matmul(&right)
    }

    /// `M^{-1} L` applied to the unknowns.
    pub fn apply(&self, dof: &[C64]) -> Vec<C64> {
        let mut out = self.lmat.apply_c(dof);
        for (o, m) in out.iter_mut().zip(&self.mass) {
            *o /= m;
        }
        out
    }

    /// LU of `M - theta h L`.
    pub fn implicit_lu(&self, h: f64, theta: f64) -> Lu {
        let m = self.n_dof();
        let mut lhs = self.lmat.clone();
        for v in &mut lhs.data {
            *v *= -theta * h;
        }
        for i in 0..m {
            lhs.data[i * m + i] += self.mass[i];
        }
        Lu::new(&lhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    H,
    Htilde,
    GNumeric,
    R,
}

/// Kernel `K(t, y_i, z_j)` on the grid tensor; column 0 is `z = 0`.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    pub xi: i64,
    pub t: f64,
    pub nu: f64,
    pub grid: Arc<YGrid>,
    pub entries: Dense,
    /// Weights used by [`apply_kernel`]; zero at nodes slaved to boundary conditions.
    pub weights: Vec<f64>,
    pub kind: KernelKind,
    /// `|xi| + 1/sqrt(nu)`.
    pub b: f64,
}

impl KernelMatrix {
    fn new(xi: i64, t: f64, nu: f64, grid: Arc<YGrid>, entries: Dense, kind: KernelKind) -> Self {
        let weights = grid.quad_weights.clone();
        KernelMatrix { xi, t, nu, b: xi.unsigned_abs() as f64 + 1.0 / nu.sqrt(), grid, entries, weights, kind }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.max_abs()
    }

    fn closed_form(xi: i64, t: f64, nu: f64, grid: Arc<YGrid>, kind: KernelKind, f: fn(f64, f64, f64, f64, f64) -> f64) -> Self {
        let y = &grid.nodes;
        let mass = heat_mass::<f64>();
        let x = xi as f64;
        let entries = Dense::from_fn(y.len(), y.len(), |i, j| f(x, t, y[i], y[j], nu) / mass);
        Self::new(xi, t, nu, grid, entries, kind)
    }

    /// Unit-mass free-space kernel on the grid.
    pub fn heat(xi: i64, t: f64, nu: f64, grid: Arc<YGrid>) -> Self {
        Self::closed_form(xi, t, nu, grid, KernelKind::H, heat_h)
    }

    /// Unit-mass Neumann kernel on the grid.
    pub fn htilde(xi: i64, t: f64, nu: f64, grid: Arc<YGrid>) -> Self {
        Self::closed_form(xi, t, nu, grid, KernelKind::Htilde, heat_htilde)
    }
}

fn positivity_check(k: &KernelMatrix) -> Result<(), KernelError> {
    let resolved = k.grid.max_spacing() <= (k.nu * k.t).sqrt();
    if k.xi != 0 || !resolved {
        return Ok(());
    }
    let max = k.max_abs();
    let min = k.entries.data.iter().fold(0.0f64, |m, v| m.min(*v));
    if min < -1e-8 * max {
        return Err(KernelError::Positivity(-min / max));
    }
    Ok(())
}

/// Green's function of the discrete Robin problem at elapsed time `t`.
///
/// Column `j` is the solution started from the discrete delta `e_j / m_j`
/// at `z_j` (unit quadrature mass), evolved exactly through the
/// eigendecomposition; column 0 is the kernel at `z = 0`, so the boundary
/// contribution of the Duhamel formula is `-int_0^t G(t-s, y, 0) B(s) ds`.
/// Positivity is checked for `xi = 0` once the grid resolves `sqrt(nu t)`.
pub fn green_numeric(xi: i64, t: f64, nu: f64, grid: Arc<YGrid>) -> Result<KernelMatrix, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::NonPositiveTime(t));
    }
    let op = RobinOperator::new(grid, nu, xi.unsigned_abs() as f64)?;
    let k = green_from_operator(xi, t, &op);
    positivity_check(&k)?;
    Ok(k)
}

/// [`green_numeric`] for a prebuilt operator, without the positivity check.
pub fn green_from_operator(xi: i64, t: f64, op: &RobinOperator) -> KernelMatrix {
    let grid = op.grid.clone();
    let n = grid.len();
    let m = op.n_dof();
    let e = op.propagator(t);
    let mut entries = Dense::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            entries.set(i, j, e.get(i, j) / op.mass[j]);
        }
    }
    KernelMatrix::new(xi, t, op.nu, grid, entries, KernelKind::GNumeric)
}

/// `int_0^t e^{lambda (t - s)} s^{-1/2} e^{-z^2/(4 nu s) - nu a^2 s} ds`.
fn boundary_time_integral(lambda: f64, t: f64, z: f64, nu: f64, a: f64) -> Result<f64, QuadError> {
    let h = 0.5 * t;
    let tol = 1e-13;
    let piece_a = quad::integrate(
        |u| {
            let s = h * u * u;
            let decay = if u == 0.0 {
                if z == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-z * z / (4.0 * nu * s) - nu * a * a * s).exp()
            };
            (lambda * (t - s)).exp() * decay * 2.0 * h.sqrt()
        },
        0.0,
        1.0,
        1e-300,
        tol,
    )?;
    let f = |s: f64| (-z * z / (4.0 * nu * s) - nu * a * a * s).exp() / s.sqrt();
    let stiff = -lambda * h;
    let piece_b = if stiff > 1.0 {
        let l = -lambda;
        quad::integrate(|x| (-x).exp() * f(t - x / l) / l, 0.0, stiff.min(60.0), 1e-300, tol)?
    } else {
        quad::integrate(|tau| (lambda * tau).exp() * f(t - tau), 0.0, h, 1e-300, tol)?
    };
    Ok(piece_a + piece_b)
}

/// Residual `R = G - Htilde` (unit mass) from the boundary-forced Robin problem.
///
/// `R` solves the homogeneous equation with zero initial data and boundary
/// datum `-nu |xi| Htilde(s, 0, z)`; the time integral is done per
/// eigenvalue by adaptive quadrature, so no delta needs to be resolved.
pub fn residual_resolved(xi: i64, t: f64, nu: f64, grid: Arc<YGrid>) -> Result<KernelMatrix, KernelError> {
    if !(t > 0.0) {
        return Err(KernelError::NonPositiveTime(t));
    }
    let a = xi.unsigned_abs() as f64;
    let n = grid.len();
    let mut entries = Dense::zeros(n, n);
    if a > 0.0 {
        let op = RobinOperator::new(grid.clone(), nu, a)?;
        let m = op.n_dof();
        let bmodal = op.boundary_modal();
        let pref = nu * a / (PI * nu).sqrt();
        let cols: Vec<Result<Vec<C64>, KernelError>> = grid
            .nodes
            .par_iter()
            .map(|&z| {
                let mut coeff = vec![C64::new(0.0, 0.0); m];
                for k in 0..m {
                    if bmodal[k] != 0.0 {
                        let j = boundary_time_integral(op.lambda[k], t, z, nu, a)?;
                        coeff[k] = C64::new(bmodal[k] * pref * j, 0.0);
                    }
                }
                Ok(op.lift(&op.from_modal(&coeff)))
            })
            .collect();
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col?.into_iter().enumerate() {
                entries.set(i, j, v.re);
            }
        }
    }
    Ok(KernelMatrix::new(xi, t, nu, grid, entries, KernelKind::R))
}

/// Green's function assembled as `Htilde + R` with the resolved residual.
pub fn green_resolved(xi: i64, t: f64, nu: f64, grid: Arc<YGrid>) -> Result<KernelMatrix, KernelError> {
    let r = residual_resolved(xi, t, nu, grid.clone())?;
    let mut g = KernelMatrix::htilde(xi, t, nu, grid);
    for (e, r) in g.entries.data.iter_mut().zip(&r.entries.data) {
        *e += r;
    }
    g.kind = KernelKind::GNumeric;
    Ok(g)
}

/// Interior defect of `(d_y - d_z) R` relative to `max |R|`.
pub fn translation_defect(r: &KernelMatrix) -> f64 {
    let n = r.grid.len();
    let d = &r.grid.d1;
    let max = r.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let dy = d.matmul(&r.entries);
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let dz = dot_row_col(&r.entries, i, d, j);
            worst = worst.max((dy.get(i, j) - dz).abs());
        }
    }
    worst / max
}

fn dot_row_col(m: &Dense, i: usize, d: &Dense, j: usize) -> f64 {
    // d_z acts on the column index: sum_k m[i][k] d[j][k]
    m.row(i).iter().zip(d.row(j)).map(|(a, b)| a * b).sum()
}

/// `G - Htilde`, checking that the result depends on `y + z` only.
pub fn residual_r(g: &KernelMatrix, htilde: &KernelMatrix) -> Result<KernelMatrix, KernelError> {
    if g.xi != htilde.xi || g.t != htilde.t || g.nu != htilde.nu || !Arc::ptr_eq(&g.grid, &htilde.grid) {
        return Err(KernelError::Mismatch("residual needs matching (xi, t, nu, grid)".into()));
    }
    let mut entries = g.entries.clone();
    for (e, h) in entries.data.iter_mut().zip(&htilde.entries.data) {
        *e -= h;
    }
    let r = KernelMatrix::new(g.xi, g.t, g.nu, g.grid.clone(), entries, KernelKind::R);
    let tol = 1e-4;
    let defect = translation_defect(&r);
    if defect > tol {
        return Err(KernelError::NotTranslationInvariant { defect: defect * r.max_abs(), tol, max: r.max_abs() });
    }
    Ok(r)
}

/// `y -> sum_j K(y, z_j) f(z_j) w_j`.
pub fn apply_kernel(kernel: &KernelMatrix, f: &ModeField) -> ModeField {
    let wf: Vec<C64> = f.values.iter().zip(&kernel.weights).map(|(v, w)| v * w).collect();
    ModeField { xi: f.xi, values: kernel.entries.apply_c(&wf), grid: f.grid.clone() }
}

/// `y -> K(t, y, 0) b`.
pub fn boundary_column(kernel: &KernelMatrix, b: C64) -> ModeField {
    let n = kernel.grid.len();
    let values = (0..n).map(|i| b * kernel.entries.get(i, 0)).collect();
    ModeField { xi: kernel.xi, values, grid: kernel.grid.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_grid;

    #[test]
    fn heat_h_examples() {
        let (t, nu) = (0.3, 0.2);
        assert!((heat_h(0.0, t, 0.4, 0.4, nu) - 1.0 / (nu * t as f64).sqrt()).abs() < 1e-14);
        let f = heat_h(3.0, t, 0.1, 0.7, nu);
        let g = (-nu * 9.0 * t).exp() * heat_h(0.0, t, 0.1, 0.7, nu);
        assert!((f - g).abs() < 1e-14);
    }

    #[test]
    fn htilde_is_image_sum() {
        let v = heat_htilde(2.0, 0.1, 0.3, 0.2, 0.5);
        let w = heat_h(2.0, 0.1, 0.3, 0.2, 0.5) + heat_h(2.0, 0.1, 0.3, -0.2, 0.5);
        assert_eq!(v, w);
    }

    #[test]
    fn robin_operator_spectrum_is_stable() {
        let g = Arc::new(make_grid(64, 4.0, 0.05).unwrap());
        for a in [0.0, 1.0, 5.0] {
            let op = RobinOperator::new(g.clone(), 0.05, a).unwrap();
            assert!(op.lambda.iter().all(|l| *l <= 1e-8));
        }
    }

    #[test]
    fn modal_round_trip() {
        let g = Arc::new(make_grid(48, 4.0, 0.5).unwrap());
        let op = RobinOperator::new(g.clone(), 0.5, 2.0).unwrap();
        let dof: Vec<C64> = g.nodes[..g.len() - 1].iter().map(|y| C64::new((-y).exp(), y.sin())).collect();
        let back = op.from_modal(&op.to_modal(&dof));
        for (a, b) in back.iter().zip(&dof) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_mode_is_neutral() {
        let g = Arc::new(make_grid(64, 8.0, 0.5).unwrap());
        let op = RobinOperator::new(g.clone(), 0.5, 2.0).unwrap();
        assert!(op.lambda[0].abs() < 1e-8, "{}", op.lambda[0]);
    }

    #[test]
    fn boundary_column_doubles() {
        let g = Arc::new(make_grid(32, 2.0, 1.0).unwrap());
        let k = KernelMatrix::htilde(1, 0.1, 1.0, g);
        let one = boundary_column(&k, C64::new(1.0, 0.0));
        let two = boundary_column(&k, C64::new(2.0, 0.0));
        for (a, b) in one.values.iter().zip(&two.values) {
            assert_eq!(*a * 2.0, *b);
        }
        assert!(boundary_column(&k, C64::new(0.0, 0.0)).values.iter().all(|v| v.norm() == 0.0));
    }
}
