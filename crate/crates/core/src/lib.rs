//! Phase-field simulation of anisotropic dendritic solidification.
//!
//! The model couples an order parameter `phi` (0 liquid, 1 solid) to a
//! dimensionless temperature `T` on a periodic square lattice:
//!
//! ```text
//! tau dphi/dt = -d/dx(eps eps' dphi/dy) + d/dy(eps eps' dphi/dx)
//!               + div(eps^2 grad phi) + phi (1 - phi)(phi - 1/2 + m(T)) [+ noise]
//! dT/dt       = lap T + K dphi/dt
//! ```
//!
//! with `eps(theta) = eps_bar (1 + delta cos(j (theta - theta0)))` and
//! `m(T) = (alpha / pi) atan(gamma (T_eq - T))`. Both equations are advanced
//! with explicit Euler steps and a nine-point Laplacian.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod lattice;
pub mod output;
pub mod physics;
pub mod presets;
pub mod solver;

pub use diagnostics::{ArmCountSettings, DiagnosticsRecord};
pub use error::{Error, Result};
pub use lattice::{DivisorMode, Field};
pub use physics::{ModelParams, RngStream};
pub use solver::{
    initialize, run, stability_check, RunOptions, RunSink, SimParams, SimState, Solver,
    StabilityReport,
};
