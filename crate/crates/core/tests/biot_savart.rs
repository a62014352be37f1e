use nshs_core::biot_savart::BiotSavart;
use nshs_core::field::{make_grid, ModeField, VorticityState};
use nshs_core::C64;
use proptest::prelude::*;
use std::sync::Arc;

fn setup(k: usize) -> (Arc<nshs_core::YGrid>, BiotSavart) {
    let g = Arc::new(make_grid(128, 10.0, 1e-2).unwrap());
    let bs = BiotSavart::new(g.clone(), k);
    (g, bs)
}

fn profile(xi: i64, g: &Arc<nshs_core::YGrid>) -> ModeField {
    ModeField::from_fn(xi, g.clone(), |y| C64::new(y * (-y * y).exp(), 0.3 * (-(y - 1.0).powi(2)).exp()))
}

#[test]
fn divergence_free_and_curl_consistent() {
    let (g, bs) = setup(6);
    for xi in [1i64, 3, -2, 6] {
        let w = profile(xi, &g);
        let u1 = bs.u1(&w);
        let u2 = bs.u2(&w);
        let ix = C64::new(0.0, xi as f64);
        let du1 = u1.dy();
        let du2 = u2.dy();
        let scale = w.max_abs();
        for i in 0..g.len() - 1 {
            let div = ix * u1.values[i] + du2.values[i];
            let curl = ix * u2.values[i] - du1.values[i];
            assert!(div.norm() <= 1e-8 * scale, "xi={xi} i={i} div={div}");
            assert!((curl - w.values[i]).norm() <= 1e-6 * scale, "xi={xi} i={i} curl={curl}");
        }
        assert_eq!(u2.values[0], C64::new(0.0, 0.0));
    }
}

#[test]
fn shear_mode_velocity() {
    let (g, bs) = setup(2);
    let w = ModeField::from_fn(0, g.clone(), |y| C64::new((-y).exp(), 0.0));
    let u1 = bs.u1(&w);
    for (v, &y) in u1.values.iter().zip(&g.nodes) {
        // u1 = int_y^inf e^{-s} ds, truncated at ymax
        let exact = (-y).exp() - (-10.0f64).exp();
        assert!((v.re - exact).abs() < 1e-10, "y={y}");
    }
    assert!(bs.u2(&w).values.iter().all(|v| *v == C64::new(0.0, 0.0)));
}

#[test]
fn wall_slip_is_exponential_moment() {
    let (g, bs) = setup(4);
    let xi = 3i64;
    let w = ModeField::from_fn(xi, g.clone(), |y| C64::new((-2.0 * y).exp(), 0.0));
    let slip = bs.u1(&w).values[0];
    // int_0^10 e^{-3z} e^{-2z} dz
    let exact = (1.0 - (-50.0f64).exp()) / 5.0;
    assert!((slip.re - exact).abs() < 1e-12 && slip.im.abs() < 1e-14);
    assert!((bs.compatibility(&w) - slip).norm() < 1e-14);
}

#[test]
fn u2_over_y_limit_at_wall() {
    let (g, bs) = setup(4);
    let w = profile(2, &g);
    let q = bs.u2_over_y(&w).unwrap();
    let u2 = bs.u2(&w);
    for i in 1..g.len() {
        assert!((q.values[i] * g.nodes[i] - u2.values[i]).norm() < 1e-12);
    }
    let limit = C64::new(0.0, -2.0) * bs.compatibility(&w);
    assert!((q.values[0] - limit).norm() < 1e-10 * limit.norm());
}

#[test]
fn shear_state_has_no_nonlinearity() {
    let (g, bs) = setup(3);
    let st = VorticityState::from_profiles(3, g, |xi, y| if xi == 0 { C64::new(y * (-y * y).exp(), 0.0) } else { C64::new(0.0, 0.0) });
    let nl = bs.nonlinearity(&st);
    assert!(nl.n_modes.iter().all(|m| m.max_abs() == 0.0));
    assert!(nl.b_values.iter().all(|b| b.norm() == 0.0));
}

#[test]
fn nonlinearity_matches_physical_space_product() {
    let (g, bs) = setup(3);
    let st = VorticityState::from_profiles(3, g.clone(), |xi, y| match xi {
        1 => C64::new(0.2, -0.5) * y * (-y * y).exp(),
        2 => C64::new(0.1, 0.3) * y * y * (-y * y).exp(),
        _ => C64::new(0.0, 0.0),
    });
    let nl = bs.nonlinearity(&st);
    let vel = bs.velocity(&st);
    // direct convolution sum: N_xi = -sum_{p+q=xi} (u1_p (i q) w_q + u2_p d_y w_q)
    for xi in 0..=3i64 {
        for i in 1..g.len() - 1 {
            let mut acc = C64::new(0.0, 0.0);
            for p in -3..=3i64 {
                let q = xi - p;
                if q.abs() > 3 {
                    continue;
                }
                let wq = st.mode(q);
                let dwq = wq.dy();
                let u1 = vel.u1_modes[(p + 3) as usize].values[i];
                let u2 = vel.u2_modes[(p + 3) as usize].values[i];
                acc -= u1 * C64::new(0.0, q as f64) * wq.values[i] + u2 * dwq.values[i];
            }
            let got = nl.n(xi).values[i];
            assert!((got - acc).norm() <= 1e-9 * (1.0 + acc.norm()), "xi={xi} i={i}: {got} vs {acc}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn velocity_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (g, bs) = setup(2);
        let f = profile(2, &g);
        let h = ModeField::from_fn(2, g.clone(), |y| C64::new((-y).exp() * y, 0.0));
        let comb = f.with_values(f.values.iter().zip(&h.values).map(|(x, y)| x * a + y * b).collect());
        let lhs = bs.u1(&comb);
        let (uf, uh) = (bs.u1(&f), bs.u1(&h));
        for i in 0..g.len() {
            prop_assert!((lhs.values[i] - (uf.values[i] * a + uh.values[i] * b)).norm() <= 1e-12 * (1.0 + a.abs() + b.abs()));
        }
    }
}
