//! Pointwise model terms: anisotropy, driving force, double-well potential,
//! reaction and interface noise.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Material and kinetic parameters of the phase-field model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mean interfacial width coefficient.
    pub eps_bar: f64,
    /// Anisotropy strength.
    pub delta: f64,
    /// Anisotropy mode number (number of preferred growth directions).
    pub j_mode: u32,
    /// Anisotropy offset angle in radians.
    pub theta0: f64,
    /// Driving-force amplitude, `0 < alpha < 1`.
    pub alpha: f64,
    /// Supercooling gain.
    pub gamma: f64,
    /// Equilibrium temperature.
    pub t_eq: f64,
    /// Dimensionless latent heat.
    pub latent_heat: f64,
    /// Phase-field relaxation time.
    pub tau: f64,
    /// Amplitude of the interface noise.
    pub noise_amp: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            eps_bar: 0.01,
            delta: 0.01,
            j_mode: 4,
            theta0: 1.57,
            alpha: 0.9,
            gamma: 10.0,
            t_eq: 1.0,
            latent_heat: 1.8,
            tau: 3e-4,
            noise_amp: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        fn bad(key: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParam {
                key,
                reason: reason.into(),
            })
        }
        let finite = [
            ("eps_bar", self.eps_bar),
            ("delta", self.delta),
            ("theta0", self.theta0),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("t_eq", self.t_eq),
            ("latent_heat", self.latent_heat),
            ("tau", self.tau),
            ("noise_amp", self.noise_amp),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return bad(key, format!("must be finite, got {v}"));
            }
        }
        // eps_bar = 0 is accepted: it switches off the gradient terms entirely.
        if self.eps_bar < 0.0 {
            return bad("eps_bar", "must be >= 0");
        }
        if !(0.0..1.0).contains(&self.delta) {
            return bad("delta", format!("must lie in [0, 1), got {}", self.delta));
        }
        if self.j_mode == 0 {
            return bad("j_mode", "must be a positive integer");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha", format!("must lie in (0, 1), got {}", self.alpha));
        }
        if self.gamma <= 0.0 {
            return bad("gamma", "must be > 0");
        }
        if self.latent_heat < 0.0 {
            return bad("latent_heat", "must be >= 0");
        }
        if self.tau <= 0.0 {
            return bad("tau", "must be > 0");
        }
        if self.noise_amp < 0.0 {
            return bad("noise_amp", "must be >= 0");
        }
        Ok(())
    }

    /// Largest value `eps` can take, `eps_bar (1 + delta)`.
    pub fn eps_max(&self) -> f64 {
        self.eps_bar * (1.0 + self.delta)
    }
}

/// Deterministic source of the interface noise.
///
/// Backed by ChaCha with 8 rounds, seeded from a 64-bit integer through
/// `SeedableRng::seed_from_u64`. Both are value-stable across platforms.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on `[-0.5, 0.5)` using the top 53 bits of one output word.
    pub fn uniform_sym(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        bits as f64 * (1.0 / (1u64 << 53) as f64) - 0.5
    }

    /// Fills `out` in order, one draw per element.
    pub fn fill_sym(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.uniform_sym();
        }
    }
}

/// Orientation of the vector `(gx, gy)` measured from the +x axis.
///
/// Returns 0 for a zero vector.
#[inline]
pub fn interface_angle(gx: f64, gy: f64) -> f64 {
    if gx == 0.0 && gy == 0.0 {
        0.0
    } else {
        gy.atan2(gx)
    }
}

/// Anisotropic coefficient `eps(theta)` and its angular derivative.
#[inline]
pub fn epsilon_of_theta(theta: f64, p: &ModelParams) -> (f64, f64) {
    let j = f64::from(p.j_mode);
    let (s, c) = (j * (theta - p.theta0)).sin_cos();
    let eps = p.eps_bar * (1.0 + p.delta * c);
    let eps_prime = -p.eps_bar * j * p.delta * s;
    (eps, eps_prime)
}

/// Driving force `m(T) = (alpha / pi) atan(gamma (T_eq - T))`, bounded by `alpha / 2`.
#[inline]
pub fn m_of_temperature(temp: f64, p: &ModelParams) -> f64 {
    p.alpha / PI * (p.gamma * (p.t_eq - temp)).atan()
}

/// Tilted double well with minima at 0 and 1.
#[inline]
pub fn double_well(phi: f64, m: f64) -> f64 {
    let phi2 = phi * phi;
    0.25 * phi2 * phi2 - (0.5 - m / 3.0) * phi2 * phi + (0.25 - 0.5 * m) * phi2
}

/// `phi (1 - phi) (phi - 1/2 + m)`, the negative derivative of [`double_well`].
#[inline]
pub fn reaction_term(phi: f64, m: f64) -> f64 {
    phi * (1.0 - phi) * (phi - 0.5 + m)
}

/// Noise confined to the interface: `a phi (1 - phi) chi`.
#[inline]
pub fn noise_term(phi: f64, a: f64, chi: f64) -> f64 {
    a * phi * (1.0 - phi) * chi
}
