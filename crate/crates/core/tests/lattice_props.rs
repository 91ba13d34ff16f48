use std::f64::consts::TAU;

use dendrite_core::lattice::{
    central_gradient, lattice_sum, nine_point_laplacian, DivisorMode, Field,
};
use dendrite_core::solver::{initialize, SimParams, Solver};
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = Field> {
    (3usize..12, 3usize..12).prop_flat_map(|(nx, ny)| {
        prop::collection::vec(-2.0f64..2.0, nx * ny)
            .prop_map(move |data| Field::from_vec(nx, ny, 0.1, 0.1, data).unwrap())
    })
}

fn shifted(f: &Field, si: usize, sj: usize) -> Field {
    Field::from_fn(f.nx(), f.ny(), f.dx(), f.dy(), |i, j| {
        f.get(
            (i + f.nx() - si % f.nx()) % f.nx(),
            (j + f.ny() - sj % f.ny()) % f.ny(),
        )
    })
    .unwrap()
}

#[test]
fn laplacian_of_fourier_modes() {
    let (nx, ny, dx) = (16, 12, 0.03);
    for a in 0..nx {
        for b in 0..ny {
            let kx = TAU * a as f64 / nx as f64;
            let ky = TAU * b as f64 / ny as f64;
            let f = Field::from_fn(nx, ny, dx, dx, |i, j| (kx * i as f64 + ky * j as f64).cos())
                .unwrap();
            let lambda =
                (4.0 * (kx.cos() + ky.cos()) + 4.0 * kx.cos() * ky.cos() - 12.0) / (3.0 * dx * dx);
            let lap = nine_point_laplacian(&f).unwrap();
            for (got, v) in lap.data().iter().zip(f.data()) {
                assert!(
                    (got - lambda * v).abs() <= 1e-9 / (dx * dx),
                    "mode ({a}, {b})"
                );
            }
        }
    }
}

#[test]
fn laplacian_commutes_with_quarter_turn() {
    let n = 9;
    let f = Field::from_fn(n, n, 0.1, 0.1, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.37).unwrap();
    let rot = |g: &Field| Field::from_fn(n, n, 0.1, 0.1, |i, j| g.get(j, n - 1 - i)).unwrap();
    let a = nine_point_laplacian(&rot(&f)).unwrap();
    let b = rot(&nine_point_laplacian(&f).unwrap());
    for (x, y) in a.data().iter().zip(b.data()) {
        assert!((x - y).abs() <= 1e-11);
    }
}

#[test]
fn solver_step_is_translation_equivariant() {
    let mut p = SimParams {
        nx: 32,
        ny: 24,
        ..SimParams::default()
    };
    p.model.delta = 0.05;
    let mut a = initialize(&p).unwrap();
    let mut b = a.clone();
    b.phi = shifted(&a.phi, 5, 17);
    b.temp = shifted(&a.temp, 5, 17);
    let mut sa = Solver::new(p).unwrap();
    let mut sb = Solver::new(p).unwrap();
    for _ in 0..20 {
        sa.step(&mut a).unwrap();
        sb.step(&mut b).unwrap();
    }
    assert_eq!(shifted(&a.phi, 5, 17), b.phi);
    assert_eq!(shifted(&a.temp, 5, 17), b.temp);
}

proptest! {
    #[test]
    fn laplacian_is_translation_invariant(f in field_strategy(), si in 0usize..20, sj in 0usize..20) {
        let lhs = nine_point_laplacian(&shifted(&f, si, sj)).unwrap();
        let rhs = shifted(&nine_point_laplacian(&f).unwrap(), si, sj);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn laplacian_ignores_constant_offset(f in field_strategy(), c in -5.0f64..5.0) {
        let a = nine_point_laplacian(&f).unwrap();
        let b = nine_point_laplacian(&f.map(|v| v + c)).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn laplacian_sums_to_zero(f in field_strategy()) {
        let lap = nine_point_laplacian(&f).unwrap();
        let scale: f64 = lap.data().iter().map(|v| v.abs()).sum::<f64>() + 1.0;
        prop_assert!(lattice_sum(&lap).abs() <= 1e-12 * scale);
    }

    #[test]
    fn gradient_is_translation_invariant(f in field_strategy(), si in 0usize..20, sj in 0usize..20) {
        for mode in [DivisorMode::PaperCode, DivisorMode::Centered] {
            let (gx, gy) = central_gradient(&shifted(&f, si, sj), mode);
            let (hx, hy) = central_gradient(&f, mode);
            prop_assert_eq!(gx, shifted(&hx, si, sj));
            prop_assert_eq!(gy, shifted(&hy, si, sj));
        }
    }

    #[test]
    fn paper_code_gradient_is_twice_centered(f in field_strategy()) {
        let (px, py) = central_gradient(&f, DivisorMode::PaperCode);
        let (cx, cy) = central_gradient(&f, DivisorMode::Centered);
        for (a, b) in px.data().iter().zip(cx.data()).chain(py.data().iter().zip(cy.data())) {
            prop_assert!((a - 2.0 * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn lattice_sum_matches_naive(f in field_strategy()) {
        let mut naive = 0.0;
        for j in 0..f.ny() {
            for i in 0..f.nx() {
                naive += f.get(i, j) * f.dx() * f.dy();
            }
        }
        prop_assert!((lattice_sum(&f) - naive).abs() <= 1e-12 * (1.0 + naive.abs()));
    }
}
