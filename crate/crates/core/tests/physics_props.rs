use std::f64::consts::{PI, TAU};

use dendrite_core::physics::{
    double_well, epsilon_of_theta, interface_angle, m_of_temperature, reaction_term, ModelParams,
    RngStream,
};
use proptest::prelude::*;

fn model(delta: f64, j_mode: u32, theta0: f64) -> ModelParams {
    ModelParams {
        delta,
        j_mode,
        theta0,
        ..ModelParams::default()
    }
}

#[test]
fn rng_streams_repeat_by_seed() {
    let mut a = RngStream::new(7);
    let mut b = RngStream::new(7);
    let mut c = RngStream::new(8);
    let xs: Vec<f64> = (0..1000).map(|_| a.uniform_sym()).collect();
    let ys: Vec<f64> = (0..1000).map(|_| b.uniform_sym()).collect();
    let zs: Vec<f64> = (0..1000).map(|_| c.uniform_sym()).collect();
    assert_eq!(xs, ys);
    assert_ne!(xs, zs);
    assert!(xs.iter().all(|x| (-0.5..0.5).contains(x)));
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 0.05);
}

proptest! {
    #[test]
    fn reaction_is_minus_potential_slope(phi in -0.5f64..1.5, m in -0.45f64..0.45) {
        let h = 1e-6;
        let fd = (double_well(phi + h, m) - double_well(phi - h, m)) / (2.0 * h);
        prop_assert!((reaction_term(phi, m) + fd).abs() <= 1e-8);
    }

    #[test]
    fn m_is_bounded_and_nonincreasing(t in -1e4f64..1e4, dt in 0.0f64..10.0) {
        let p = ModelParams::default();
        let a = m_of_temperature(t, &p);
        let b = m_of_temperature(t + dt, &p);
        prop_assert!(a.abs() <= p.alpha / 2.0);
        prop_assert!(b <= a);
    }

    #[test]
    fn epsilon_has_the_mode_period(
        theta in -10.0f64..10.0,
        delta in 0.0f64..0.1,
        j in 1u32..9,
        theta0 in -PI..PI,
    ) {
        let p = model(delta, j, theta0);
        let (e0, d0) = epsilon_of_theta(theta, &p);
        let (e1, d1) = epsilon_of_theta(theta + TAU / j as f64, &p);
        prop_assert!((e0 - e1).abs() <= 1e-14);
        prop_assert!((d0 - d1).abs() <= 1e-12);
        prop_assert!(e0 >= p.eps_bar * (1.0 - delta) - 1e-15);
        prop_assert!(e0 <= p.eps_max() + 1e-15);
    }

    #[test]
    fn epsilon_slope_matches_difference(theta in -PI..PI, delta in 0.0f64..0.1, j in 1u32..9) {
        let p = model(delta, j, 1.57);
        let h = 1e-6;
        let fd = (epsilon_of_theta(theta + h, &p).0 - epsilon_of_theta(theta - h, &p).0) / (2.0 * h);
        prop_assert!((epsilon_of_theta(theta, &p).1 - fd).abs() <= 1e-8);
    }

    #[test]
    fn angle_ignores_gradient_magnitude(gx in -1e3f64..1e3, gy in -1e3f64..1e3, s in 1e-3f64..1e3) {
        prop_assume!(gx != 0.0 || gy != 0.0);
        let a = interface_angle(gx, gy);
        let b = interface_angle(s * gx, s * gy);
        prop_assert!((a - b).abs() <= 1e-12);
    }
}
