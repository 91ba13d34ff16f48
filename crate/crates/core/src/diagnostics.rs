//! Scalar measurements of a simulation state.
//!
//! A cell counts as solid when `phi >= 0.5`. Distances are in physical
//! units (cells times `dx`) and are measured from the nucleus centre
//! `(nx / 2, ny / 2)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{central_gradient, lattice_sum, DivisorMode, Field};
use crate::physics::{
    double_well, epsilon_of_theta, interface_angle, m_of_temperature, ModelParams,
};
use crate::solver::{SimParams, SimState};

pub const SOLID_THRESHOLD: f64 = 0.5;

#[inline]
fn is_solid(v: f64) -> bool {
    v >= SOLID_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub time: f64,
    pub solid_fraction: f64,
    /// Tip extents along +x, -x, +y, -y.
    pub tip_extent: [f64; 4],
    pub conservation_sum: f64,
    pub free_energy: f64,
    pub arm_count: usize,
}

impl DiagnosticsRecord {
    /// Largest of the four axis extents.
    pub fn max_tip_extent(&self) -> f64 {
        self.tip_extent.iter().copied().fold(0.0, f64::max)
    }
}

pub fn solid_fraction(phi: &Field) -> f64 {
    let solid = phi.data().iter().filter(|&&v| is_solid(v)).count();
    solid as f64 / phi.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::PlusX, Axis::MinusX, Axis::PlusY, Axis::MinusY];
}

/// Distance from the centre to the farthest solid cell on the given axis ray.
pub fn tip_extent(phi: &Field, axis: Axis) -> f64 {
    let (nx, ny) = (phi.nx(), phi.ny());
    let (cx, cy) = (nx / 2, ny / 2);
    let (reach, di, dj) = match axis {
        Axis::PlusX => (nx - 1 - cx, 1, 0),
        Axis::MinusX => (cx, -1, 0),
        Axis::PlusY => (ny - 1 - cy, 0, 1),
        Axis::MinusY => (cy, 0, -1),
    };
    (0..=reach)
        .rev()
        .find(|&k| {
            let i = cx.checked_add_signed(di * k as isize).unwrap();
            let j = cy.checked_add_signed(dj * k as isize).unwrap();
            is_solid(phi.get(i, j))
        })
        .map_or(0.0, |k| k as f64 * phi.dx())
}

pub fn tip_extents(phi: &Field) -> [f64; 4] {
    Axis::ALL.map(|axis| tip_extent(phi, axis))
}

/// Tunables for [`arm_count`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmCountSettings {
    pub bins: usize,
    /// Width of the circular moving average, in bins.
    pub smoothing_window: usize,
    /// Minimum peak prominence, in cells (multiplied by `dx`).
    pub prominence_cells: f64,
    /// Minimum prominence as a fraction of the most prominent peak. Keeps
    /// side lobes on the flanks of an arm from being counted as arms.
    /// 0 disables the relative test.
    pub relative_prominence: f64,
}

impl ArmCountSettings {
    /// Absolute prominence test only.
    pub fn absolute_only() -> Self {
        Self {
            relative_prominence: 0.0,
            ..Self::default()
        }
    }
}

impl Default for ArmCountSettings {
    fn default() -> Self {
        Self {
            bins: 360,
            smoothing_window: 5,
            prominence_cells: 2.0,
            relative_prominence: 0.5,
        }
    }
}

/// Polar profile `r(b)`: the largest solid radius found in each angular bin.
///
/// A cell belongs to every bin its unit square overlaps, so bins narrower
/// than a cell at small radii are still populated. The radius recorded is
/// that of the cell centre.
pub fn radial_profile(phi: &Field, bins: usize) -> Vec<f64> {
    let (cx, cy) = (phi.nx() / 2, phi.ny() / 2);
    let bin_width = TAU / bins as f64;
    let mut profile = vec![0.0; bins];
    for j in 0..phi.ny() {
        for i in 0..phi.nx() {
            if !is_solid(phi.get(i, j)) {
                continue;
            }
            let x = i as f64 - cx as f64;
            let y = j as f64 - cy as f64;
            let r = x.hypot(y) * phi.dx();
            if r == 0.0 {
                continue;
            }
            let centre = y.atan2(x);
            // Corner angles relative to the centre direction; the square does
            // not contain the origin, so they span less than pi.
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for (ox, oy) in [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)] {
                let a = (y + oy).atan2(x + ox) - centre;
                let a = (a + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
                lo = lo.min(a);
                hi = hi.max(a);
            }
            let first = ((centre + lo) / bin_width).floor() as isize;
            let last = ((centre + hi) / bin_width).floor() as isize;
            for b in first..=last {
                let b = b.rem_euclid(bins as isize) as usize;
                if r > profile[b] {
                    profile[b] = r;
                }
            }
        }
    }
    profile
}

fn circular_moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    if window <= 1 || n == 0 {
        return values.to_vec();
    }
    let half = (window / 2) as isize;
    let width = (2 * half + 1) as f64;
    (0..n as isize)
        .map(|b| {
            (-half..=half)
                .map(|o| values[(b + o).rem_euclid(n as isize) as usize])
                .sum::<f64>()
                / width
        })
        .collect()
}

/// Prominences of every circular local maximum. Plateaus count once.
fn circular_peak_prominences(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Vec::new();
    }
    let at = |k: isize| values[k.rem_euclid(n as isize) as usize];
    // Start scanning just after a global minimum so no plateau straddles the start.
    let start = values.iter().position(|&v| v == lo).unwrap() as isize;
    let mut prominences = Vec::new();
    let mut k = start + 1;
    while k < start + n as isize {
        let h = at(k);
        let mut end = k;
        while end + 1 < start + n as isize && at(end + 1) == h {
            end += 1;
        }
        if at(k - 1) < h && at(end + 1) < h {
            prominences.push(h - key_col(&at, k, end, h, n));
        }
        k = end + 1;
    }
    prominences
}

/// Higher of the two minima met walking outwards from a plateau `[first, last]`
/// until a higher value (or the whole circle) is covered.
///
/// Ties: the leftward walk stops at an equal peak, the rightward walk does
/// not, so of two equal peaks only one keeps the full prominence.
fn key_col(at: &impl Fn(isize) -> f64, first: isize, last: isize, h: f64, n: usize) -> f64 {
    let walk = |from: isize, dir: isize| -> (f64, bool) {
        let mut min = h;
        for s in 1..n as isize {
            let v = at(from + dir * s);
            if v > h || (dir < 0 && v == h && min < h) {
                return (min, true);
            }
            min = min.min(v);
        }
        (min, false)
    };
    let (left, left_found) = walk(first, -1);
    let (right, right_found) = walk(last, 1);
    if !left_found && !right_found {
        // Global maximum: measured down to the lowest point of the profile.
        left.min(right)
    } else {
        left.max(right)
    }
}

/// Number of primary arms: prominent maxima of the smoothed polar profile.
pub fn arm_count(phi: &Field, settings: &ArmCountSettings) -> usize {
    let profile = radial_profile(phi, settings.bins);
    let smooth = circular_moving_average(&profile, settings.smoothing_window);
    let prominences = circular_peak_prominences(&smooth);
    let largest = prominences.iter().copied().fold(0.0, f64::max);
    let threshold =
        (settings.prominence_cells * phi.dx()).max(settings.relative_prominence * largest);
    prominences.into_iter().filter(|&p| p >= threshold).count()
}

/// `sum(T) - K sum(phi)`, the discrete enthalpy, conserved by the scheme.
pub fn conservation_sum(state: &SimState, latent_heat: f64) -> f64 {
    lattice_sum(&state.temp) - latent_heat * lattice_sum(&state.phi)
}

/// Driving force evaluated at every cell.
pub fn m_field(temp: &Field, model: &ModelParams) -> Field {
    temp.map(|t| m_of_temperature(t, model))
}

/// Discrete free energy `sum [f(phi, m) + eps(theta)^2 / 2 |grad phi|^2] dx dy`.
///
/// Gradients always use the standard centred difference, independent of the
/// solver's divisor setting.
pub fn free_energy(phi: &Field, m: &Field, model: &ModelParams) -> Result<f64> {
    phi.ensure_same_shape(m)?;
    let (gx, gy) = central_gradient(phi, DivisorMode::Centered);
    let density = phi
        .data()
        .iter()
        .zip(m.data())
        .zip(gx.data().iter().zip(gy.data()))
        .map(|((&p, &m), (&gx, &gy))| {
            let (eps, _) = epsilon_of_theta(interface_angle(gx, gy), model);
            double_well(p, m) + 0.5 * eps * eps * (gx * gx + gy * gy)
        })
        .collect();
    let field = Field::from_vec(phi.nx(), phi.ny(), phi.dx(), phi.dy(), density)?;
    Ok(lattice_sum(&field))
}

pub fn record(state: &SimState, p: &SimParams, arms: &ArmCountSettings) -> DiagnosticsRecord {
    let m = m_field(&state.temp, &p.model);
    DiagnosticsRecord {
        step: state.step,
        time: state.time,
        solid_fraction: solid_fraction(&state.phi),
        tip_extent: tip_extents(&state.phi),
        conservation_sum: conservation_sum(state, p.model.latent_heat),
        // phi and m always share a shape here
        free_energy: free_energy(&state.phi, &m, &p.model).unwrap_or(f64::NAN),
        arm_count: arm_count(&state.phi, arms),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn disk(n: usize, r: f64) -> Field {
        let c = (n / 2) as f64;
        Field::from_fn(n, n, 0.03, 0.03, |i, j| {
            let d = (i as f64 - c).hypot(j as f64 - c);
            if d <= r {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    fn star(n: usize, r0: f64, arms: f64) -> Field {
        let c = (n / 2) as f64;
        Field::from_fn(n, n, 0.03, 0.03, |i, j| {
            let (x, y) = (i as f64 - c, j as f64 - c);
            let theta = y.atan2(x);
            if x.hypot(y) <= r0 * (1.0 + 0.3 * (arms * theta).cos()) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn solid_fraction_examples() {
        let zeros = Field::new(4, 4, 1.0, 1.0).unwrap();
        assert_eq!(solid_fraction(&zeros), 0.0);
        assert_eq!(solid_fraction(&zeros.like(1.0)), 1.0);
        let half = Field::from_fn(4, 4, 1.0, 1.0, |i, _| if i < 2 { 0.9 } else { 0.1 }).unwrap();
        assert_eq!(solid_fraction(&half), 0.5);
    }

    #[test]
    fn tip_extent_of_liquid_is_zero() {
        let f = Field::new(20, 20, 0.03, 0.03).unwrap();
        for axis in Axis::ALL {
            assert_eq!(tip_extent(&f, axis), 0.0);
        }
    }

    #[test]
    fn tip_extent_of_disk() {
        let f = disk(101, 17.0);
        for axis in Axis::ALL {
            assert!((tip_extent(&f, axis) - 17.0 * 0.03).abs() <= 0.03 + 1e-12);
        }
    }

    #[test]
    fn tip_extent_uses_farthest_not_contiguous() {
        let mut f = Field::new(20, 20, 0.5, 0.5).unwrap();
        f.set(10, 10, 1.0);
        f.set(17, 10, 0.7);
        assert_eq!(tip_extent(&f, Axis::PlusX), 3.5);
        assert_eq!(tip_extent(&f, Axis::MinusX), 0.0);
    }

    #[test]
    fn disk_has_no_arms() {
        let settings = ArmCountSettings::default();
        for r in [10.0, 30.0, 45.0] {
            assert_eq!(arm_count(&disk(128, r), &settings), 0, "radius {r}");
        }
    }

    #[test]
    fn star_arms_are_counted() {
        let settings = ArmCountSettings::default();
        assert_eq!(arm_count(&star(128, 30.0, 4.0), &settings), 4);
        assert_eq!(arm_count(&star(128, 30.0, 6.0), &settings), 6);
        assert_eq!(arm_count(&star(200, 50.0, 5.0), &settings), 5);
    }

    #[test]
    fn side_lobes_are_not_arms() {
        // four arms of amplitude 0.3 plus a small lobe in each valley
        let n = 200;
        let c = (n / 2) as f64;
        let f = Field::from_fn(n, n, 0.03, 0.03, |i, j| {
            let (x, y) = (i as f64 - c, j as f64 - c);
            let t = y.atan2(x);
            let off = (t.rem_euclid(FRAC_PI_2) - FRAC_PI_4) / 0.08;
            let r = 50.0 * (1.0 + 0.3 * (4.0 * t).cos() + 0.2 * (-off * off).exp());
            if x.hypot(y) <= r {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(arm_count(&f, &ArmCountSettings::default()), 4);
        assert!(arm_count(&f, &ArmCountSettings::absolute_only()) > 4);
    }

    #[test]
    fn prominence_of_simple_profiles() {
        let flat = vec![1.0; 10];
        assert!(circular_peak_prominences(&flat).is_empty());
        let two = [0.0, 3.0, 1.0, 2.0, 0.5, 0.0];
        let mut p = circular_peak_prominences(&two);
        p.sort_by(f64::total_cmp);
        assert_eq!(p, vec![1.0, 3.0]);
        // plateau peak wrapping the end of the array
        let wrapped = [2.0, 2.0, 0.0, 0.0, 2.0];
        assert_eq!(circular_peak_prominences(&wrapped), vec![2.0]);
    }

    #[test]
    fn moving_average_wraps() {
        let v = [5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let s = circular_moving_average(&v, 5);
        assert_eq!(s[0], 1.0);
        assert_eq!(s[5], 1.0);
        assert_eq!(s[3], 0.0);
    }

    #[test]
    fn uniform_free_energy() {
        let model = ModelParams::default();
        let phi = Field::filled(100, 100, 0.03, 0.03, 1.0).unwrap();
        let m = phi.like(0.3);
        let f = free_energy(&phi, &m, &model).unwrap();
        let expected = 100.0 * 100.0 * 0.03 * 0.03 * (-0.3 / 6.0);
        assert!((f - expected).abs() <= 1e-12 * expected.abs());
        let zero = free_energy(&phi.like(0.0), &m, &model).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn conservation_sum_example() {
        let phi = Field::filled(100, 100, 0.03, 0.03, 1.0).unwrap();
        let state = SimState {
            temp: phi.like(0.0),
            phi,
            step: 0,
            time: 0.0,
        };
        assert!((conservation_sum(&state, 1.8) + 16.2).abs() < 1e-12);
    }
}
