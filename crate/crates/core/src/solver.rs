//! Explicit time integration of the coupled phase / temperature system.
//!
//! Each step is a strict two-pass Jacobi update. Pass one evaluates every
//! spatial quantity (gradients, Laplacians, anisotropy fluxes) from the
//! current fields; pass two combines them cell by cell into the new fields.
//! No value written in pass two is read within the same step, so the result
//! does not depend on how rows are split across worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, ArmCountSettings, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::lattice::{laplacian_at, west_east, DivisorMode, Field, RowNeighbours};
use crate::physics::{
    epsilon_of_theta, interface_angle, m_of_temperature, noise_term, reaction_term, ModelParams,
    RngStream,
};

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub model: ModelParams,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dt: f64,
    pub total_steps: u64,
    /// Cells with squared distance (in cells) below this value start solid.
    pub seed_radius_sq: u64,
    pub rng_seed: u64,
    pub divisor_mode: DivisorMode,
    /// 0 disables periodic snapshots (step 0 and the final step are still written).
    pub snapshot_every: u64,
    /// 0 disables periodic diagnostics (step 0 and the final step are still sampled).
    pub diagnostics_every: u64,
    /// Reuse one `grad(eps^2)` vector for every cell, as the original code did.
    pub replicate_appendix_bug: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            nx: 500,
            ny: 500,
            dx: 0.03,
            dt: 1e-4,
            total_steps: 2000,
            seed_radius_sq: 20,
            rng_seed: 1,
            divisor_mode: DivisorMode::PaperCode,
            snapshot_every: 500,
            diagnostics_every: 100,
            replicate_appendix_bug: false,
        }
    }
}

impl SimParams {
    /// Structural validation; does not include the stability check.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.nx < 3 {
            return Err(invalid("nx", "must be >= 3"));
        }
        if self.ny < 3 {
            return Err(invalid("ny", "must be >= 3"));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(invalid("dx", "must be positive and finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive and finite"));
        }
        let reach = seed_reach(self.seed_radius_sq);
        let (cx, cy) = self.center();
        if let Some(k) = reach {
            if k > cx || cx + k >= self.nx || k > cy || cy + k >= self.ny {
                return Err(invalid(
                    "seed_radius_sq",
                    format!(
                        "nucleus of squared radius {} does not fit a {}x{} grid",
                        self.seed_radius_sq, self.nx, self.ny
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Nucleus centre `(nx / 2, ny / 2)`, zero-based.
    pub fn center(&self) -> (usize, usize) {
        (self.nx / 2, self.ny / 2)
    }

    pub fn end_time(&self) -> f64 {
        self.total_steps as f64 * self.dt
    }
}

fn invalid(key: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        key,
        reason: reason.into(),
    }
}

/// Largest on-axis offset `k` with `k^2 < r2`, or `None` for an empty nucleus.
fn seed_reach(r2: u64) -> Option<usize> {
    if r2 == 0 {
        return None;
    }
    let mut k = 0u64;
    while (k + 1) * (k + 1) < r2 {
        k += 1;
    }
    Some(k as usize)
}

/// Explicit-Euler stability limits for the nine-point scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub ok: bool,
    /// `3 dx^2 / 8`: the stencil's most negative eigenvalue is `-16 / (3 dx^2)`.
    pub dt_max_thermal: f64,
    /// Thermal bound scaled by `tau / eps_max^2`; infinite when `eps_bar = 0`.
    pub dt_max_phase: f64,
}

impl StabilityReport {
    pub fn bound(&self) -> f64 {
        self.dt_max_thermal.min(self.dt_max_phase)
    }
}

pub fn stability_check(p: &SimParams) -> StabilityReport {
    let dt_max_thermal = 3.0 * p.dx * p.dx / 8.0;
    let eps_max = p.model.eps_max();
    let dt_max_phase = if eps_max == 0.0 {
        f64::INFINITY
    } else {
        dt_max_thermal * p.model.tau / (eps_max * eps_max)
    };
    StabilityReport {
        ok: p.dt <= dt_max_thermal.min(dt_max_phase),
        dt_max_thermal,
        dt_max_phase,
    }
}

/// Returns [`Error::Unstable`] when `dt` exceeds the bound.
pub fn ensure_stable(p: &SimParams) -> Result<StabilityReport> {
    let report = stability_check(p);
    if report.ok {
        Ok(report)
    } else {
        Err(Error::Unstable {
            dt: p.dt,
            bound: report.bound(),
            thermal: report.dt_max_thermal,
            phase: report.dt_max_phase,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub phi: Field,
    pub temp: Field,
    pub step: u64,
    pub time: f64,
}

/// Solid disk of squared radius `seed_radius_sq` at the grid centre in a bath at `T = 0`.
pub fn initialize(p: &SimParams) -> Result<SimState> {
    p.validate()?;
    let (cx, cy) = p.center();
    let r2 = p.seed_radius_sq as i64;
    let phi = Field::from_fn(p.nx, p.ny, p.dx, p.dx, |i, j| {
        let di = i as i64 - cx as i64;
        let dj = j as i64 - cy as i64;
        if di * di + dj * dj < r2 {
            1.0
        } else {
            0.0
        }
    })?;
    let temp = phi.like(0.0);
    Ok(SimState {
        phi,
        temp,
        step: 0,
        time: 0.0,
    })
}

/// Quantities evaluated in the first pass, one per cell.
#[derive(Debug, Clone, Copy, Default)]
struct CellTerms {
    gx: f64,
    gy: f64,
    lap_phi: f64,
    lap_temp: f64,
    eps2: f64,
    /// `eps eps' dphi/dx`
    flux_x: f64,
    /// `eps eps' dphi/dy`
    flux_y: f64,
}

/// Reusable stepper. Owns the scratch buffers, the noise stream and an
/// optional dedicated thread pool.
pub struct Solver {
    params: SimParams,
    rng: RngStream,
    terms: Vec<CellTerms>,
    noise: Vec<f64>,
    next_phi: Vec<f64>,
    next_temp: Vec<f64>,
    freeze_temperature: bool,
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("params", &self.params)
            .field("freeze_temperature", &self.freeze_temperature)
            .field(
                "workers",
                &self.pool.as_ref().map(|p| p.current_num_threads()),
            )
            .finish_non_exhaustive()
    }
}

impl Solver {
    pub fn new(params: SimParams) -> Result<Self> {
        params.validate()?;
        let n = params.nx * params.ny;
        Ok(Self {
            rng: RngStream::new(params.rng_seed),
            params,
            terms: vec![CellTerms::default(); n],
            noise: vec![0.0; n],
            next_phi: vec![0.0; n],
            next_temp: vec![0.0; n],
            freeze_temperature: false,
            pool: None,
        })
    }

    /// Runs the sweeps on a private pool of `workers` threads instead of the
    /// global rayon pool.
    pub fn with_workers(mut self, workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Grid(format!("thread pool: {e}")))?;
        self.pool = Some(pool);
        Ok(self)
    }

    /// Holds the temperature field fixed; used to isolate the phase dynamics.
    pub fn freeze_temperature(mut self, freeze: bool) -> Self {
        self.freeze_temperature = freeze;
        self
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Advances `state` by one time step in place.
    pub fn step(&mut self, state: &mut SimState) -> Result<()> {
        if !state.phi.same_shape(&state.temp)
            || state.phi.nx() != self.params.nx
            || state.phi.ny() != self.params.ny
        {
            return Err(Error::ExtentMismatch(
                state.phi.nx(),
                state.phi.ny(),
                self.params.nx,
                self.params.ny,
            ));
        }
        if self.params.model.noise_amp > 0.0 {
            self.rng.fill_sym(&mut self.noise);
        }
        match self.pool.take() {
            Some(pool) => {
                pool.install(|| self.sweep(state));
                self.pool = Some(pool);
            }
            None => self.sweep(state),
        }
        let step = state.step + 1;
        if let Some(k) = self.next_phi.iter().position(|v| !v.is_finite()) {
            return Err(blow_up(step, "phi", k, self.params.nx));
        }
        if let Some(k) = self.next_temp.iter().position(|v| !v.is_finite()) {
            return Err(blow_up(step, "temperature", k, self.params.nx));
        }
        state.phi.swap_data(&mut self.next_phi);
        state.temp.swap_data(&mut self.next_temp);
        state.step = step;
        state.time = step as f64 * self.params.dt;
        Ok(())
    }

    fn sweep(&mut self, state: &SimState) {
        let p = &self.params;
        let (nx, ny) = (p.nx, p.ny);
        let phi = state.phi.data();
        let temp = state.temp.data();
        let model = &p.model;
        let inv_grad = 1.0 / (p.divisor_mode.span() * p.dx);
        let inv_lap = 1.0 / (3.0 * p.dx * p.dx);

        self.terms
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(j, row)| {
                let rows = RowNeighbours::new(j, nx, ny);
                for (i, cell) in row.iter_mut().enumerate() {
                    let (im, ip) = west_east(i, nx);
                    let gx = (phi[rows.row + ip] - phi[rows.row + im]) * inv_grad;
                    let gy = (phi[rows.north + i] - phi[rows.south + i]) * inv_grad;
                    let theta = interface_angle(gx, gy);
                    let (eps, eps_prime) = epsilon_of_theta(theta, model);
                    let aniso = eps * eps_prime;
                    *cell = CellTerms {
                        gx,
                        gy,
                        lap_phi: laplacian_at(phi, rows, i, im, ip, inv_lap),
                        lap_temp: laplacian_at(temp, rows, i, im, ip, inv_lap),
                        eps2: eps * eps,
                        flux_x: aniso * gx,
                        flux_y: aniso * gy,
                    };
                }
            });

        let terms = &self.terms;
        // The original code evaluated grad(eps^2) into scalars and read back
        // whichever value the final cell left behind.
        let stale_grad_eps2 = p.replicate_appendix_bug.then(|| {
            let (i, j) = (nx - 1, ny - 1);
            let rows = RowNeighbours::new(j, nx, ny);
            let (im, ip) = west_east(i, nx);
            (
                (terms[rows.row + ip].eps2 - terms[rows.row + im].eps2) * inv_grad,
                (terms[rows.north + i].eps2 - terms[rows.south + i].eps2) * inv_grad,
            )
        });
        let noise = (model.noise_amp > 0.0).then_some(self.noise.as_slice());
        let rate = p.dt / model.tau;
        let dt = p.dt;
        let latent = model.latent_heat;
        let freeze = self.freeze_temperature;

        self.next_phi
            .par_chunks_mut(nx)
            .zip(self.next_temp.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(j, (phi_row, temp_row))| {
                let rows = RowNeighbours::new(j, nx, ny);
                for i in 0..nx {
                    let (im, ip) = west_east(i, nx);
                    let k = rows.row + i;
                    let c = terms[k];
                    let term1 =
                        (terms[rows.north + i].flux_x - terms[rows.south + i].flux_x) * inv_grad;
                    let term2 =
                        -(terms[rows.row + ip].flux_y - terms[rows.row + im].flux_y) * inv_grad;
                    let (de2_dx, de2_dy) = stale_grad_eps2.unwrap_or_else(|| {
                        (
                            (terms[rows.row + ip].eps2 - terms[rows.row + im].eps2) * inv_grad,
                            (terms[rows.north + i].eps2 - terms[rows.south + i].eps2) * inv_grad,
                        )
                    });
                    let term3 = de2_dx * c.gx + de2_dy * c.gy;

                    let old_phi = phi[k];
                    let old_temp = temp[k];
                    let m = m_of_temperature(old_temp, model);
                    let mut rhs =
                        term1 + term2 + c.eps2 * c.lap_phi + term3 + reaction_term(old_phi, m);
                    if let Some(chi) = noise {
                        rhs += noise_term(old_phi, model.noise_amp, chi[k]);
                    }
                    let d_phi = rate * rhs;
                    phi_row[i] = old_phi + d_phi;
                    temp_row[i] = if freeze {
                        old_temp
                    } else {
                        old_temp + dt * c.lap_temp + latent * d_phi
                    };
                }
            });
    }
}

fn blow_up(step: u64, field: &'static str, k: usize, nx: usize) -> Error {
    Error::BlowUp {
        step,
        field,
        i: k % nx,
        j: k / nx,
    }
}

/// One step without a long-lived [`Solver`]. Allocates scratch space on each call.
pub fn step(state: &SimState, p: &SimParams, rng: &mut RngStream) -> Result<SimState> {
    let mut solver = Solver::new(*p)?;
    solver.rng = rng.clone();
    let mut next = state.clone();
    solver.step(&mut next)?;
    *rng = solver.rng;
    Ok(next)
}

/// Receives the outputs of [`run`].
pub trait RunSink {
    fn snapshot(&mut self, state: &SimState, params: &SimParams) -> Result<()>;
    fn diagnostics(&mut self, record: &DiagnosticsRecord) -> Result<()>;
}

/// Discards everything.
#[derive(Debug, Default)]
pub struct NullSink;

impl RunSink for NullSink {
    fn snapshot(&mut self, _: &SimState, _: &SimParams) -> Result<()> {
        Ok(())
    }

    fn diagnostics(&mut self, _: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SimState,
    pub records: Vec<DiagnosticsRecord>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for the sweeps; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub arm_count: ArmCountSettings,
}

fn due(step: u64, every: u64, last: u64) -> bool {
    step == 0 || step == last || (every > 0 && step.is_multiple_of(every))
}

/// Initializes and advances `total_steps` steps, feeding snapshots and
/// diagnostics to `sink`.
///
/// On blow-up the last good state is handed to the sink before the error is
/// returned.
pub fn run(p: &SimParams, sink: &mut dyn RunSink, opts: &RunOptions) -> Result<RunOutcome> {
    let mut solver = Solver::new(*p)?;
    if let Some(w) = opts.workers {
        solver = solver.with_workers(w)?;
    }
    let mut state = initialize(p)?;
    let mut records = Vec::new();
    let last = p.total_steps;
    let mut emit = |state: &SimState, sink: &mut dyn RunSink| -> Result<()> {
        if due(state.step, p.snapshot_every, last) {
            sink.snapshot(state, p)?;
        }
        if due(state.step, p.diagnostics_every, last) {
            let record = diagnostics::record(state, p, &opts.arm_count);
            sink.diagnostics(&record)?;
            records.push(record);
        }
        Ok(())
    };
    emit(&state, sink)?;
    while state.step < last {
        let good = state.clone();
        if let Err(e) = solver.step(&mut state) {
            if !due(good.step, p.snapshot_every, last) {
                sink.snapshot(&good, p)?;
            }
            return Err(e);
        }
        emit(&state, sink)?;
    }
    Ok(RunOutcome { state, records })
}
