//! Structured-grid integrator for the local balance laws of a kinetic continuum.
//!
//! Unknowns per cell are `ρ`, `ẋ`, `Y`, `B`, `H` and optionally the thermal
//! energy `ε`:
//!
//! ```text
//! ∂ρ/∂τ = -div(ρẋ)
//! ∂Y/∂τ = -(grad Y)ẋ + BY + YBᵀ
//! ρ(∂ẋ/∂τ + Lẋ) = div T + ρf
//! ρ(∂B/∂τ + (grad B)ẋ + B²)Y = ρMᵀ + 2η₃(L - B)
//! ∂H/∂τ = -(grad H)ẋ - LH - HLᵀ + S + (β/ρ)Δ(ρH) - αH + (γ/ρ)D²
//! ```
//!
//! Space is discretised on a collocated cell-centred grid with two ghost
//! layers; fluxes of mass and stress are taken on faces, advection is
//! second-order upwind, and time stepping is classical RK4.

mod boundary;
mod diagnostics;
mod grid;
mod output;
mod rhs;
mod state;
mod stencil;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constitutive::{MaterialParams, ParamsError};
use crate::exec::Exec;
use crate::tensor::{project_psd, SymTen2, Ten2, Vec3};

pub use boundary::{BoundarySpec, FermentBc, Inflow, SideSpec, VelocityBc, SIDE_NAMES};
pub use diagnostics::Diagnostics;
pub use grid::{Grid, GHOSTS};
pub use output::{write_diagnostics_csv, write_snapshot_csv, DIAGNOSTICS_HEADER, SNAPSHOT_HEADER};
pub use rhs::{FaceFluxes, FaceState, Model};
pub use state::{Cell, FieldState};
pub use stencil::{Linear, Stencil};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid boundary specification: {0}")]
    InvalidBoundary(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("initial state: {0}")]
    InvalidState(String),
    #[error(
        "degenerate inertia at cell {cell:?}, t = {time}: affine-rate forcing has a component {leak:e} outside range(Y)"
    )]
    DegenerateY {
        cell: (usize, usize),
        time: f64,
        leak: f64,
    },
    #[error("blow-up at t = {time} in cell {cell:?}: {reason}")]
    BlowUp {
        time: f64,
        cell: (usize, usize),
        reason: String,
    },
}

impl SolverError {
    fn at_time(self, t: f64) -> Self {
        match self {
            SolverError::DegenerateY { cell, leak, .. } => SolverError::DegenerateY {
                cell,
                time: t,
                leak,
            },
            e => e,
        }
    }
}

/// How the affine rate is determined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// `B` evolves by its own balance.
    #[default]
    IndependentB,
    /// `B = L`.
    BEqualsL,
    /// `B = skw L`.
    BEqualsSkwL,
}

/// Sources per unit mass in one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSource {
    /// Body force.
    pub f: Vec3,
    /// Tensor moment of external actions.
    pub m: Ten2,
    /// External stirring.
    pub s: SymTen2,
    /// Heat generation.
    pub lambda_heat: f64,
}

/// Uniform sources, optionally overridden per cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSpec {
    pub f: Vec3,
    pub m: Ten2,
    pub s: SymTen2,
    pub lambda_heat: f64,
    #[serde(skip)]
    pub per_cell: Vec<CellSource>,
}

impl SourceSpec {
    pub fn at(&self, k: usize) -> CellSource {
        if self.per_cell.is_empty() {
            CellSource {
                f: self.f,
                m: self.m,
                s: self.s,
                lambda_heat: self.lambda_heat,
            }
        } else {
            self.per_cell[k]
        }
    }

    pub fn body_force(f: Vec3) -> Self {
        SourceSpec {
            f,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Fraction of the stability limits used for the step.
    pub cfl: f64,
    pub t_end: f64,
    /// Fixed step overriding the stability estimate.
    pub dt: Option<f64>,
    pub constraint_mode: ConstraintMode,
    pub psd_projection: bool,
    /// Drop out-of-plane components except `Y₃₃` and `H₃₃`.
    pub plane_flow: bool,
    pub evolve_energy: bool,
    /// Snapshot interval; `None` keeps only the initial and final states.
    pub snapshot_every: Option<f64>,
    /// Diagnostics interval; `None` records every step.
    pub diagnostics_every: Option<f64>,
    pub max_steps: usize,
    /// Magnitude beyond which a field counts as blown up.
    pub overflow_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl: 0.4,
            t_end: 1.0,
            dt: None,
            constraint_mode: ConstraintMode::IndependentB,
            psd_projection: true,
            plane_flow: true,
            evolve_energy: false,
            snapshot_every: None,
            diagnostics_every: None,
            max_steps: 50_000_000,
            overflow_guard: 1e150,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "cfl = {} must lie in (0, 1)",
                self.cfl
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "t_end = {} must be non-negative",
                self.t_end
            )));
        }
        for (name, v) in [
            ("dt", self.dt),
            ("snapshot_every", self.snapshot_every),
            ("diagnostics_every", self.diagnostics_every),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(SolverError::InvalidConfig(format!(
                        "{name} = {v} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Everything that defines a run except the state.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub grid: Grid,
    pub params: MaterialParams,
    pub boundary: BoundarySpec,
    pub sources: SourceSpec,
    pub config: SolverConfig,
}

impl Problem {
    pub fn validate(&self) -> Result<(), SolverError> {
        self.grid.validate()?;
        self.params.validate()?;
        self.boundary.validate(&self.grid)?;
        self.config.validate()?;
        if !self.sources.per_cell.is_empty() && self.sources.per_cell.len() != self.grid.len() {
            return Err(SolverError::InvalidConfig(format!(
                "{} per-cell sources for {} cells",
                self.sources.per_cell.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    pub fn model(&self) -> Model<'_> {
        Model {
            grid: &self.grid,
            params: &self.params,
            boundary: &self.boundary,
            sources: &self.sources,
            mode: self.config.constraint_mode,
            plane_flow: self.config.plane_flow,
            evolve_energy: self.config.evolve_energy,
        }
    }
}

/// A problem together with its evolving state.
#[derive(Clone, Debug)]
pub struct Solver {
    problem: Problem,
    state: FieldState,
    time: f64,
    steps: usize,
    exec: Exec,
    rho_floor: f64,
    /// Largest relative PSD correction of `H` since the last diagnostics record.
    psd_since_record: f64,
    /// Largest relative PSD correction of `H` over the whole run.
    psd_max: f64,
}

/// Snapshots and diagnostics collected by [`Solver::run`].
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub snapshots: Vec<(f64, FieldState)>,
    pub diagnostics: Vec<Diagnostics>,
    pub steps: usize,
    pub max_psd_correction: f64,
}

impl Solver {
    pub fn new(problem: Problem, initial: FieldState) -> Result<Self, SolverError> {
        problem.validate()?;
        if initial.cells.len() != problem.grid.len() {
            return Err(SolverError::InvalidState(format!(
                "{} cells for a grid of {}",
                initial.cells.len(),
                problem.grid.len()
            )));
        }
        for (k, c) in initial.cells.iter().enumerate() {
            if !(c.rho > 0.0) || !c.is_finite() {
                return Err(SolverError::InvalidState(format!(
                    "cell {:?} has density {} or non-finite values",
                    problem.grid.coords(k),
                    c.rho
                )));
            }
        }
        let mean_rho =
            initial.cells.iter().map(|c| c.rho).sum::<f64>() / problem.grid.len() as f64;
        let mut s = Solver {
            problem,
            state: initial,
            time: 0.0,
            steps: 0,
            exec: Exec::default(),
            rho_floor: 1e-12 * mean_rho,
            psd_since_record: 0.0,
            psd_max: 0.0,
        };
        s.finish_state();
        Ok(s)
    }

    /// Builds the initial state by sampling `f`.
    pub fn from_fn(problem: Problem, f: impl Fn([f64; 2]) -> Cell) -> Result<Self, SolverError> {
        let state = FieldState::from_fn(&problem.grid, &problem.boundary, f);
        Solver::new(problem, state)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn max_psd_correction(&self) -> f64 {
        self.psd_max
    }

    pub fn rhs(&self, state: &FieldState) -> Result<FieldState, SolverError> {
        self.problem
            .model()
            .rhs(state, self.exec)
            .map_err(|e| e.at_time(self.time))
    }

    /// Step size from advective, diffusive and reactive limits, scaled by `cfl`.
    pub fn stable_dt(&self) -> f64 {
        if let Some(dt) = self.problem.config.dt {
            return dt;
        }
        let g = &self.problem.grid;
        let p = &self.problem.params;
        let mut speed: f64 = 0.0;
        let mut rho_min = f64::INFINITY;
        let mut rate: f64 = p.alpha + p.gamma_hat;
        let st = Stencil::new(g, &self.problem.boundary, &self.state);
        for k in 0..g.len() {
            let c = &self.state.cells[k];
            // Gershgorin bound on the largest eigenvalue
            let h_max = (0..3)
                .map(|a| c.h.get(a, a) + (0..3).filter(|b| *b != a).map(|b| c.h.get(a, b).abs()).sum::<f64>())
                .fold(0.0, f64::max);
            speed = speed.max(c.v.norm() + h_max.sqrt());
            rho_min = rho_min.min(c.rho);
            let (i, j) = g.coords(k);
            let l = st.velocity_gradient(i as isize, j as isize);
            rate = rate.max(p.alpha + p.gamma_hat + 2.0 * l.norm() + c.b.norm());
        }
        let nu = p
            .beta
            .max(p.kappa)
            .max(2.0 * (p.eta1 + p.eta3.abs() + p.eta2.abs()) / rho_min);
        let inv_h2: f64 = (0..2)
            .filter(|d| g.is_active(*d))
            .map(|d| 1.0 / (g.h[d] * g.h[d]))
            .sum();
        let h_min = (0..2)
            .filter(|d| g.is_active(*d))
            .map(|d| g.h[d])
            .fold(f64::INFINITY, f64::min);
        let mut dt = f64::INFINITY;
        if speed > 0.0 {
            dt = dt.min(h_min / speed);
        }
        if nu > 0.0 {
            // RK4 covers the real axis down to -2.785
            dt = dt.min(2.785 / (4.0 * nu * inv_h2));
        }
        if rate > 0.0 {
            dt = dt.min(1.0 / rate);
        }
        if !dt.is_finite() {
            dt = h_min;
        }
        self.problem.config.cfl * dt
    }

    /// One classical RK4 step, then constraint enforcement, PSD projection and guards.
    pub fn step(&mut self, dt: f64) -> Result<(), SolverError> {
        let s0 = &self.state;
        let k1 = self.rhs(s0)?;
        let k2 = self.rhs(&s0.axpy(0.5 * dt, &k1))?;
        let k3 = self.rhs(&s0.axpy(0.5 * dt, &k2))?;
        let k4 = self.rhs(&s0.axpy(dt, &k3))?;
        let mut next = s0.axpy(dt / 6.0, &k1);
        next = next.axpy(dt / 3.0, &k2);
        next = next.axpy(dt / 3.0, &k3);
        next = next.axpy(dt / 6.0, &k4);
        self.state = next;
        self.time += dt;
        self.steps += 1;
        self.finish_state();
        self.check()
    }

    fn finish_state(&mut self) {
        let model = self.problem.model();
        if self.problem.config.plane_flow {
            for c in self.state.cells.iter_mut() {
                c.project_plane();
            }
        }
        if model.mode != ConstraintMode::IndependentB {
            let g = &self.problem.grid;
            let st = Stencil::new(g, &self.problem.boundary, &self.state);
            let rates: Vec<Ten2> = (0..g.len())
                .map(|k| {
                    let (i, j) = g.coords(k);
                    model.cell_rates(&st, i as isize, j as isize).1
                })
                .collect();
            drop(st);
            for (c, b) in self.state.cells.iter_mut().zip(rates) {
                c.b = b;
            }
        }
        if self.problem.config.psd_projection {
            for c in self.state.cells.iter_mut() {
                let (h, dh) = project_psd(&c.h);
                let (y, _) = project_psd(&c.y);
                if dh > 0.0 {
                    let rel = dh / c.h.norm().max(f64::MIN_POSITIVE);
                    self.psd_since_record = self.psd_since_record.max(rel);
                    self.psd_max = self.psd_max.max(rel);
                }
                c.h = h;
                c.y = y;
            }
        }
    }

    fn check(&self) -> Result<(), SolverError> {
        let guard = self.problem.config.overflow_guard;
        for (k, c) in self.state.cells.iter().enumerate() {
            let reason = if !c.is_finite() {
                Some("non-finite value".to_string())
            } else if c.max_abs() > guard {
                Some(format!("magnitude {:e} exceeds {guard:e}", c.max_abs()))
            } else if c.rho < self.rho_floor {
                Some(format!("density {} below floor {}", c.rho, self.rho_floor))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(SolverError::BlowUp {
                    time: self.time,
                    cell: self.problem.grid.coords(k),
                    reason,
                });
            }
        }
        Ok(())
    }

    /// Steps until `t`, shortening the last step to land on it.
    pub fn advance_to(&mut self, t: f64) -> Result<(), SolverError> {
        while self.time < t * (1.0 - 1e-14) - 1e-300 {
            if self.steps >= self.problem.config.max_steps {
                return Err(SolverError::InvalidConfig(format!(
                    "max_steps = {} reached at t = {}",
                    self.problem.config.max_steps, self.time
                )));
            }
            let dt = self.stable_dt().min(t - self.time);
            self.step(dt)?;
        }
        Ok(())
    }

    pub fn diagnostics(&mut self) -> Result<Diagnostics, SolverError> {
        let rate = self.rhs(&self.state)?;
        let d = diagnostics::compute(
            &self.problem.model(),
            &self.state,
            &rate,
            self.time,
            self.psd_since_record,
            self.exec,
        );
        self.psd_since_record = 0.0;
        Ok(d)
    }

    /// Runs to `t_end`, recording snapshots and diagnostics on their cadences.
    pub fn run(&mut self) -> Result<RunOutput, SolverError> {
        let cfg = self.problem.config.clone();
        let mut out = RunOutput::default();
        out.snapshots.push((self.time, self.state.clone()));
        out.diagnostics.push(self.diagnostics()?);
        let next_after = |t: f64, every: Option<f64>| every.map(|e| ((t / e).floor() + 1.0) * e);
        let mut next_snap = next_after(self.time, cfg.snapshot_every);
        let mut next_diag = next_after(self.time, cfg.diagnostics_every);
        while self.time < cfg.t_end * (1.0 - 1e-14) {
            let mut target = cfg.t_end;
            for t in [next_snap, next_diag].into_iter().flatten() {
                target = target.min(t);
            }
            if cfg.diagnostics_every.is_none() {
                let dt = self.stable_dt().min(cfg.t_end - self.time);
                target = self.time + dt;
            }
            self.advance_to(target)?;
            let tol = 1e-9 * cfg.t_end.max(1e-300);
            if cfg.diagnostics_every.is_none()
                || next_diag.is_some_and(|t| (self.time - t).abs() <= tol)
            {
                out.diagnostics.push(self.diagnostics()?);
                next_diag = next_after(self.time + tol, cfg.diagnostics_every);
            }
            if next_snap.is_some_and(|t| (self.time - t).abs() <= tol) {
                out.snapshots.push((self.time, self.state.clone()));
                next_snap = next_after(self.time + tol, cfg.snapshot_every);
            }
        }
        if out.snapshots.last().map(|s| s.0) != Some(self.time) {
            out.snapshots.push((self.time, self.state.clone()));
        }
        if out.diagnostics.last().map(|d| d.t) != Some(self.time) {
            out.diagnostics.push(self.diagnostics()?);
        }
        out.steps = self.steps;
        out.max_psd_correction = self.psd_max;
        Ok(out)
    }
}
