//! Named parameter bundles for the standard experiments.

use crate::solver::SimParams;

/// Baseline study: 500x500, `dt = 1e-4`, 2000 steps (`t = 0.2`), fourfold anisotropy.
pub fn paper_s3() -> SimParams {
    SimParams::default()
}

/// Latent-heat study base: `dt = 2e-4`, sixfold anisotropy, 500 steps (`t = 0.1`).
pub fn paper_s6() -> SimParams {
    let mut p = SimParams {
        dt: 2e-4,
        total_steps: 500,
        ..SimParams::default()
    };
    p.model.j_mode = 6;
    p
}

/// Reduced grid for quick runs and CI: 300x300, 1500 steps.
pub fn desk() -> SimParams {
    SimParams {
        nx: 300,
        ny: 300,
        total_steps: 1500,
        ..SimParams::default()
    }
}

pub const PRESET_NAMES: [&str; 3] = ["paper-s3", "paper-s6", "desk"];

pub fn by_name(name: &str) -> Option<SimParams> {
    match name {
        "paper-s3" => Some(paper_s3()),
        "paper-s6" => Some(paper_s6()),
        "desk" => Some(desk()),
        _ => None,
    }
}
