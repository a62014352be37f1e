use nshs_core::field::{make_grid, ModeField};
use nshs_core::kernels::*;
use nshs_core::C64;
use statrs::function::erf::{erf, erfc};
use std::sync::Arc;

/// Image-method residual for the Robin problem (unit mass).
fn residual_oracle(a: f64, t: f64, nu: f64, s: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let d = nu * t;
    a * (-a * s).exp() * erfc((s - 2.0 * a * d) / (2.0 * d.sqrt()))
}

#[test]
fn resolved_residual_matches_image_oracle() {
    for &(xi, t, nu) in &[(1i64, 1e-3, 1e-2), (16, 1e-3, 1e-2), (4, 1e-1, 1e-1), (1, 1e-2, 1e-1)] {
        let g = Arc::new(make_grid(96, 2.0, nu * t).unwrap());
        let r = residual_resolved(xi, t, nu, g.clone()).unwrap();
        let mut worst = 0.0f64;
        let mut peak = 0.0f64;
        for i in 0..g.len() {
            for j in 0..g.len() {
                let ex = residual_oracle(xi as f64, t, nu, g.nodes[i] + g.nodes[j]);
                worst = worst.max((r.entries.get(i, j) - ex).abs());
                peak = peak.max(ex.abs());
            }
        }
        assert!(worst <= 1e-8 * peak, "xi={xi} t={t} nu={nu}: {worst:e} vs {peak:e}");
    }
}

#[test]
fn zero_mode_residual_vanishes() {
    let g = Arc::new(make_grid(64, 2.0, 1e-3).unwrap());
    let r = residual_resolved(0, 1e-2, 0.1, g).unwrap();
    assert_eq!(r.max_abs(), 0.0);
}

#[test]
fn residual_depends_on_sum() {
    let g = Arc::new(make_grid(96, 2.0, 1e-3).unwrap());
    let gr = green_resolved(4, 1e-2, 0.1, g.clone()).unwrap();
    let h = KernelMatrix::htilde(4, 1e-2, 0.1, g);
    let r = residual_r(&gr, &h).unwrap();
    assert!(translation_defect(&r) <= 1e-4);
}

#[test]
fn htilde_minus_itself_is_zero() {
    let g = Arc::new(make_grid(64, 2.0, 1e-2).unwrap());
    let h = KernelMatrix::htilde(2, 0.1, 0.1, g);
    let r = residual_r(&h, &h).unwrap();
    assert_eq!(r.max_abs(), 0.0);
}

#[test]
fn green_short_time_is_identity() {
    let nu = 0.1;
    let g = Arc::new(make_grid(96, 4.0, nu).unwrap());
    for xi in [0i64, 1, 3] {
        let k = green_numeric(xi, 1e-6, nu, g.clone()).unwrap();
        let f = ModeField::from_fn(xi, g.clone(), |y| C64::new(y * y * (-y * y).exp(), 0.0));
        let out = apply_kernel(&k, &f);
        let err = out.values.iter().zip(&f.values).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err <= 1e-3, "xi={xi} err={err:e}");
    }
}

#[test]
fn green_satisfies_homogeneous_boundary_condition() {
    let nu = 0.05;
    let g = Arc::new(make_grid(96, 4.0, nu).unwrap());
    for xi in [0i64, 2, 5] {
        let k = green_numeric(xi, 0.05, nu, g.clone()).unwrap();
        let f = ModeField::from_fn(xi, g.clone(), |y| C64::new((-y).exp() * y, 0.5 * y * (-y * y).exp()));
        let out = apply_kernel(&k, &f);
        let dw: C64 = g.d1.row(0).iter().zip(&out.values).map(|(d, w)| w * d).sum();
        let defect = ((dw + out.values[0] * xi.abs() as f64) * nu).norm();
        let scale = f.max_abs();
        assert!(defect <= 1e-6 * scale, "xi={xi} defect={defect:e}");
    }
}

#[test]
fn green_zero_mode_positive_when_resolved() {
    let nu = 0.1;
    let g = Arc::new(make_grid(64, 2.0, nu).unwrap());
    let k = green_numeric(0, 2.0, nu, g).unwrap();
    let min = k.entries.data.iter().fold(0.0f64, |m, v| m.min(*v));
    assert!(min >= -1e-8 * k.max_abs(), "min {min:e} max {:e}", k.max_abs());
}

#[test]
fn green_decays_like_viscous_damping() {
    let nu = 0.1;
    let t = 0.5;
    let g = Arc::new(make_grid(96, 4.0, nu).unwrap());
    // The profile e^{-|xi| y} is a steady mode of the Robin problem, so the
    // datum is projected to have zero pairing with it.
    let compatible = |xi: i64| {
        let a = xi as f64;
        let f = |y: f64| y * y * (-y * y).exp();
        let psi = |y: f64| y.powi(3) * (-y * y).exp();
        let cf = g.integrate(&g.nodes.iter().map(|&y| (-a * y).exp() * f(y)).collect::<Vec<_>>());
        let cp = g.integrate(&g.nodes.iter().map(|&y| (-a * y).exp() * psi(y)).collect::<Vec<_>>());
        ModeField::from_fn(xi, g.clone(), |y| C64::new(f(y) - cf / cp * psi(y), 0.0))
    };
    let base = apply_kernel(&green_numeric(20, t, nu, g.clone()).unwrap(), &compatible(20));
    let next = apply_kernel(&green_numeric(24, t, nu, g.clone()).unwrap(), &compatible(24));
    let ratio = (next.max_abs() / base.max_abs()).ln();
    let expected = -nu * (24.0f64 * 24.0 - 20.0 * 20.0) * t;
    assert!((ratio - expected).abs() <= 0.05 * expected.abs(), "{ratio} vs {expected}");
}

#[test]
fn htilde_zero_mode_mass_matches_erf() {
    let (t, nu) = (0.02, 0.5);
    let g = Arc::new(make_grid(128, 6.0, nu * t).unwrap());
    let k = KernelMatrix::htilde(0, t, nu, g.clone());
    let one = ModeField::from_fn(0, g.clone(), |_| C64::new(1.0, 0.0));
    let out = apply_kernel(&k, &one);
    let d = (4.0 * nu * t).sqrt();
    for (v, &y) in out.values.iter().zip(&g.nodes) {
        // half-line images integrated over [0, ymax]
        let exact = 0.5
            * (erf((6.0 - y) / d) + erf((6.0 + y) / d));
        assert!((v.re - exact).abs() <= 1e-8, "y={y}: {} vs {exact}", v.re);
    }
}

#[test]
fn neumann_slope_vanishes() {
    let h = 1e-6;
    for &(t, y) in &[(0.1f64, 0.3f64), (0.01, 0.05), (1.0, 1.0)] {
        let d = (heat_htilde(1.0, t, y, h, 0.2) - heat_htilde(1.0, t, y, -h, 0.2)) / (2.0 * h);
        assert!(d.abs() <= 1e-8);
    }
}

#[test]
fn gaussian_mass() {
    let (t, nu) = (0.3, 0.7);
    let v = nshs_core::quad::integrate(|z| heat_h(0.0, t, 0.4, z, nu), -20.0, 20.0, 0.0, 1e-13).unwrap();
    assert!((v - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    let v = nshs_core::quad::integrate(|z| heat_htilde(0.0, t, 0.4, z, nu), 0.0, 20.0, 0.0, 1e-13).unwrap();
    assert!((v - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
}

#[test]
fn boundary_column_of_htilde() {
    let g = Arc::new(make_grid(64, 2.0, 0.1).unwrap());
    let (t, nu) = (0.05, 0.1);
    let k = KernelMatrix::htilde(3, t, nu, g.clone());
    let col = boundary_column(&k, C64::new(1.0, 0.0));
    let mass = 2.0 * std::f64::consts::PI.sqrt();
    for (v, &y) in col.values.iter().zip(&g.nodes) {
        let ex = 2.0 / (nu * t).sqrt() * (-y * y / (4.0 * nu * t)).exp() * (-nu * 9.0 * t).exp() / mass;
        assert!((v.re - ex).abs() <= 1e-12 * ex.abs().max(1.0));
    }
}
