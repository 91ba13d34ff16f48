use dendrite_core::diagnostics::{
    arm_count, conservation_sum, solid_fraction, tip_extent, ArmCountSettings, Axis,
};
use dendrite_core::lattice::Field;
use dendrite_core::solver::{initialize, SimParams, Solver};
use proptest::prelude::*;

fn star(n: usize, radius: f64, arms: f64) -> Field {
    let c = (n / 2) as f64;
    Field::from_fn(n, n, 0.03, 0.03, |i, j| {
        let (x, y) = (i as f64 - c, j as f64 - c);
        let r = radius * (1.0 + 0.35 * (arms * y.atan2(x)).cos());
        if x.hypot(y) <= r {
            1.0
        } else {
            0.0
        }
    })
    .unwrap()
}

fn quarter_turn(f: &Field) -> Field {
    // (i, j) -> (c - (j - c), c + (i - c)) about the integer centre
    let n = f.nx();
    let c = n / 2;
    Field::from_fn(n, n, f.dx(), f.dy(), |i, j| {
        let (x, y) = (i as isize - c as isize, j as isize - c as isize);
        let (si, sj) = (c as isize + y, c as isize - x);
        if (0..n as isize).contains(&si) && (0..n as isize).contains(&sj) {
            f.get(si as usize, sj as usize)
        } else {
            0.0
        }
    })
    .unwrap()
}

#[test]
fn seed_disk_matches_brute_force_count() {
    let p = SimParams::default();
    let state = initialize(&p).unwrap();
    let (cx, cy) = p.center();
    let mut expected = 0;
    for j in 0..p.ny {
        for i in 0..p.nx {
            let (di, dj) = (i as i64 - cx as i64, j as i64 - cy as i64);
            if di * di + dj * dj < p.seed_radius_sq as i64 {
                expected += 1;
            }
        }
    }
    let ones = state.phi.data().iter().filter(|&&v| v == 1.0).count();
    let zeros = state.phi.data().iter().filter(|&&v| v == 0.0).count();
    assert_eq!(ones, expected);
    assert_eq!(ones + zeros, p.nx * p.ny);
    assert!(state.temp.data().iter().all(|&t| t == 0.0));
    assert_eq!(
        solid_fraction(&state.phi),
        expected as f64 / (p.nx * p.ny) as f64
    );
}

#[test]
fn arm_count_survives_quarter_turns() {
    let settings = ArmCountSettings::default();
    for (arms, radius) in [(4.0, 30.0), (6.0, 35.0), (3.0, 25.0)] {
        let mut f = star(129, radius, arms);
        let expected = arm_count(&f, &settings);
        assert_eq!(expected, arms as usize);
        for _ in 0..3 {
            f = quarter_turn(&f);
            assert_eq!(arm_count(&f, &settings), expected);
        }
    }
}

#[test]
fn tip_extents_rotate_with_the_field() {
    let f = star(129, 30.0, 3.0);
    let g = quarter_turn(&f);
    assert_eq!(tip_extent(&g, Axis::PlusY), tip_extent(&f, Axis::PlusX));
    assert_eq!(tip_extent(&g, Axis::MinusX), tip_extent(&f, Axis::PlusY));
    assert_eq!(tip_extent(&g, Axis::MinusY), tip_extent(&f, Axis::MinusX));
}

#[test]
fn conservation_sum_is_flat_over_a_run() {
    let p = SimParams {
        nx: 64,
        ny: 64,
        ..SimParams::default()
    };
    let k = p.model.latent_heat;
    let mut state = initialize(&p).unwrap();
    let start = conservation_sum(&state, k);
    let mut solver = Solver::new(p).unwrap();
    for _ in 0..300 {
        solver.step(&mut state).unwrap();
        let drift = (conservation_sum(&state, k) - start).abs();
        assert!(drift <= 1e-10 * (start.abs() + 1.0), "drift {drift:e}");
    }
}

proptest! {
    #[test]
    fn threshold_nudges_do_not_change_solid_metrics(
        bits in prop::collection::vec(any::<bool>(), 15 * 15),
        eps in 1e-12f64..1e-3,
    ) {
        let solid = Field::from_fn(15, 15, 0.1, 0.1, |i, j| {
            if bits[j * 15 + i] { 0.5 + 0.4 } else { 0.5 - 0.4 }
        })
        .unwrap();
        let nudged = solid.map(|v| if v > 0.5 { v - 0.4 + eps } else { v + 0.4 - eps });
        prop_assert_eq!(solid_fraction(&solid), solid_fraction(&nudged));
        for axis in Axis::ALL {
            prop_assert_eq!(tip_extent(&solid, axis), tip_extent(&nudged, axis));
        }
    }

    #[test]
    fn solid_fraction_is_a_fraction(values in prop::collection::vec(-1.0f64..2.0, 36)) {
        let f = Field::from_vec(6, 6, 0.2, 0.2, values).unwrap();
        let s = solid_fraction(&f);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(solid_fraction(&f.map(|v| 1.0 - v)) + s <= 1.0, true);
    }
}
