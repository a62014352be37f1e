//! Row-major dense real matrices applied to complex profiles.

use crate::C64;
use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Dense { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut out = Dense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn apply_c(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        self.apply_c_into(x, &mut out);
        out
    }

    pub fn apply_c_into(&self, x: &[C64], out: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (a, v) in self.row(i).iter().zip(x) {
                re += a * v.re;
                im += a * v.im;
            }
            *o = C64::new(re, im);
        }
    }

    pub fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub fn from_faer(m: &Mat<f64>) -> Self {
        Dense::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Inverse through partial-pivot LU.
    pub fn inverse(&self) -> Dense {
        assert_eq!(self.rows, self.cols);
        let lu = self.to_faer().partial_piv_lu();
        Dense::from_faer(&lu.inverse())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorisation kept for repeated solves with complex right-hand sides.
pub struct Lu {
    inner: faer::linalg::solvers::PartialPivLu<f64>,
    n: usize,
}

impl Lu {
    pub fn new(m: &Dense) -> Self {
        assert_eq!(m.rows, m.cols);
        Lu { inner: m.to_faer().partial_piv_lu(), n: m.rows }
    }

    pub fn solve_c(&self, rhs: &[C64]) -> Vec<C64> {
        use faer::linalg::solvers::Solve;
        let b = Mat::from_fn(self.n, 2, |i, j| if j == 0 { rhs[i].re } else { rhs[i].im });
        let x = self.inner.solve(&b);
        (0..self.n).map(|i| C64::new(x[(i, 0)], x[(i, 1)])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_lu_agree() {
        let a = Dense::from_fn(5, 5, |i, j| if i == j { 4.0 + i as f64 } else { 1.0 / (1.0 + i as f64 + j as f64) });
        let inv = a.inverse();
        let id = a.matmul(&inv);
        for i in 0..5 {
            for j in 0..5 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - e).abs() < 1e-13);
            }
        }
        let rhs: Vec<C64> = (0..5).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let x = Lu::new(&a).solve_c(&rhs);
        let back = a.apply_c(&x);
        for (b, r) in back.iter().zip(&rhs) {
            assert!((b - r).norm() < 1e-12);
        }
    }
}
