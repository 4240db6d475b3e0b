//! Method-of-lines discretization of `y_t = k·y_xx + u + d` on `[0, L]`.
//!
//! Every agent field is sampled on the same uniform grid of `M + 1` nodes.
//! Time integration is explicit Euler, guarded by `dt ≤ 0.8·dx²/(2k)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fraction of the explicit-Euler diffusion limit `dx²/(2k)` allowed for `dt`.
pub const STABILITY_SAFETY: f64 = 0.8;
/// Tolerance for an initial profile to count as vanishing at the endpoints.
pub const DIRICHLET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid needs positive length and at least 4 cells (L = {length}, M = {cells})")]
    InvalidGrid { length: f64, cells: usize },

    #[error("diffusion coefficient must be positive, got {0}")]
    InvalidDiffusion(f64),

    #[error("dt = {dt} exceeds the stability limit {limit}")]
    StabilityViolation { dt: f64, limit: f64 },

    #[error("non-finite value in agent {agent} at node {node}")]
    NonFinite { agent: usize, node: usize },
}

/// Uniform grid `x_j = j·L/M`, `j = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    cells: usize,
}

impl SpatialGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self, PdeError> {
        if !(length.is_finite() && length > 0.0) || cells < 4 {
            return Err(PdeError::InvalidGrid { length, cells });
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n_nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Node coordinate; `node(M)` is exactly `L`.
    pub fn node(&self, j: usize) -> f64 {
        self.length * j as f64 / self.cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|j| self.node(j)).collect()
    }

    /// Index of the grid node nearest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        ((x / self.dx()).round().max(0.0) as usize).min(self.cells)
    }

    /// Largest `dt` accepted by [`step`] for diffusion coefficient `k`.
    pub fn max_stable_dt(&self, k: f64) -> f64 {
        STABILITY_SAFETY * self.dx() * self.dx() / (2.0 * k)
    }

    fn check_len(&self, len: usize) -> Result<(), PdeError> {
        if len != self.n_nodes() {
            return Err(PdeError::LengthMismatch {
                expected: self.n_nodes(),
                actual: len,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub k: f64,
}

impl DiffusionParams {
    pub fn new(k: f64) -> Result<Self, PdeError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(PdeError::InvalidDiffusion(k));
        }
        Ok(Self { k })
    }
}

/// `c_s·sin(mπx/L_ref) + c_c·cos(mπx/L_ref) + c_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialProfile {
    #[serde(default)]
    pub sin: f64,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "one")]
    pub freq: f64,
    #[serde(default = "one")]
    pub ref_length: f64,
}

fn one() -> f64 {
    1.0
}

impl InitialProfile {
    pub fn trig(sin: f64, cos: f64, offset: f64) -> Self {
        Self {
            sin,
            cos,
            offset,
            freq: 1.0,
            ref_length: 1.0,
        }
    }

    pub fn zero() -> Self {
        Self::trig(0.0, 0.0, 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let arg = self.freq * PI * x / self.ref_length;
        self.sin * arg.sin() + self.cos * arg.cos() + self.offset
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            sin: self.sin * factor,
            cos: self.cos * factor,
            offset: self.offset * factor,
            ..*self
        }
    }

    /// True when the profile vanishes at both `0` and `length`.
    pub fn is_dirichlet_compatible(&self, length: f64) -> bool {
        self.eval(0.0).abs() <= DIRICHLET_TOLERANCE
            && self.eval(length).abs() <= DIRICHLET_TOLERANCE
    }

    pub fn sample(&self, grid: &SpatialGrid) -> Vec<f64> {
        grid.nodes().into_iter().map(|x| self.eval(x)).collect()
    }
}

/// How the endpoint nodes are updated after the interior Euler step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    /// `y(0) = y(L) = 0`.
    Dirichlet,
    /// `y(0) = 0`, `y_x(L) = flux` through a second-order ghost node.
    NeumannRight,
}

/// Per-step forcing from a controller.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlInput {
    None,
    /// `u_i(x)` at every node, row per agent.
    Distributed(Vec<Vec<f64>>),
    /// Right-end Neumann value `y_{i,x}(L) = u_i`.
    BoundaryFlux(Vec<f64>),
}

impl ControlInput {
    pub fn boundary_rule(&self) -> BoundaryRule {
        match self {
            ControlInput::BoundaryFlux(_) => BoundaryRule::NeumannRight,
            _ => BoundaryRule::Dirichlet,
        }
    }
}

/// All agent fields at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    pub time: f64,
    pub fields: Vec<Vec<f64>>,
}

impl EnsembleState {
    pub fn new(time: f64, fields: Vec<Vec<f64>>) -> Self {
        Self { time, fields }
    }

    /// Samples the profiles on the grid, pinning `y(0)` and, for Dirichlet
    /// runs, `y(L)` to exactly zero.
    pub fn from_profiles(
        profiles: &[InitialProfile],
        grid: &SpatialGrid,
        rule: BoundaryRule,
    ) -> Self {
        let fields = profiles
            .iter()
            .map(|p| {
                let mut f = p.sample(grid);
                apply_boundary_pins(&mut f, rule);
                f
            })
            .collect();
        Self { time: 0.0, fields }
    }

    pub fn n_agents(&self) -> usize {
        self.fields.len()
    }

    pub fn field(&self, i: usize) -> &[f64] {
        &self.fields[i]
    }
}

fn apply_boundary_pins(field: &mut [f64], rule: BoundaryRule) {
    field[0] = 0.0;
    if rule == BoundaryRule::Dirichlet {
        let last = field.len() - 1;
        field[last] = 0.0;
    }
}

/// Central second difference at interior nodes; endpoints are returned as 0.
pub fn discrete_laplacian(field: &[f64], grid: &SpatialGrid) -> Result<Vec<f64>, PdeError> {
    grid.check_len(field.len())?;
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let mut out = vec![0.0; field.len()];
    for j in 1..field.len() - 1 {
        out[j] = (field[j - 1] - 2.0 * field[j] + field[j + 1]) * inv_dx2;
    }
    Ok(out)
}

/// Composite trapezoid rule over the grid.
pub fn trapezoid_integral(samples: &[f64], grid: &SpatialGrid) -> Result<f64, PdeError> {
    grid.check_len(samples.len())?;
    Ok(trapezoid(samples, grid.dx()))
}

#[inline]
pub(crate) fn trapezoid(samples: &[f64], dx: f64) -> f64 {
    let n = samples.len();
    let inner: f64 = samples[1..n - 1].iter().sum();
    dx * (inner + 0.5 * (samples[0] + samples[n - 1]))
}

/// Trapezoid integral of `f(x_j)` without materializing the samples.
#[inline]
pub(crate) fn trapezoid_by<F: Fn(usize) -> f64>(n_nodes: usize, dx: f64, f: F) -> f64 {
    let mut total = 0.5 * (f(0) + f(n_nodes - 1));
    for j in 1..n_nodes - 1 {
        total += f(j);
    }
    dx * total
}

/// One explicit Euler step `y ← y + dt·(k·Δ_h y + u + d)`.
///
/// `disturbance`, when given, holds `d_i(x_j, t)` evaluated at the pre-step
/// time. Endpoints are re-pinned afterwards; with a boundary flux the right
/// end is advanced using the ghost node `y_{M+1} = y_{M−1} + 2dx·u_i`.
pub fn step(
    state: &EnsembleState,
    grid: &SpatialGrid,
    control: &ControlInput,
    disturbance: Option<&[Vec<f64>]>,
    params: DiffusionParams,
    dt: f64,
) -> Result<EnsembleState, PdeError> {
    let limit = grid.max_stable_dt(params.k);
    if !(dt > 0.0 && dt <= limit) {
        return Err(PdeError::StabilityViolation { dt, limit });
    }
    let n_agents = state.n_agents();
    let n_nodes = grid.n_nodes();
    let dx = grid.dx();
    let inv_dx2 = 1.0 / (dx * dx);
    let rule = control.boundary_rule();

    let check_rows = |rows: &[Vec<f64>]| -> Result<(), PdeError> {
        if rows.len() != n_agents {
            return Err(PdeError::LengthMismatch {
                expected: n_agents,
                actual: rows.len(),
            });
        }
        rows.iter().try_for_each(|r| grid.check_len(r.len()))
    };
    check_rows(&state.fields)?;
    if let Some(d) = disturbance {
        check_rows(d)?;
    }
    match control {
        ControlInput::Distributed(u) => check_rows(u)?,
        ControlInput::BoundaryFlux(flux) if flux.len() != n_agents => {
            return Err(PdeError::LengthMismatch {
                expected: n_agents,
                actual: flux.len(),
            })
        }
        _ => {}
    }

    let mut fields = Vec::with_capacity(n_agents);
    for (i, y) in state.fields.iter().enumerate() {
        let mut next = y.clone();
        for j in 1..n_nodes - 1 {
            let mut rate = params.k * (y[j - 1] - 2.0 * y[j] + y[j + 1]) * inv_dx2;
            if let ControlInput::Distributed(u) = control {
                rate += u[i][j];
            }
            if let Some(d) = disturbance {
                rate += d[i][j];
            }
            next[j] = y[j] + dt * rate;
        }
        if let ControlInput::BoundaryFlux(flux) = control {
            let m = n_nodes - 1;
            let ghost = y[m - 1] + 2.0 * dx * flux[i];
            let mut rate = params.k * (y[m - 1] - 2.0 * y[m] + ghost) * inv_dx2;
            if let Some(d) = disturbance {
                rate += d[i][m];
            }
            next[m] = y[m] + dt * rate;
        }
        apply_boundary_pins(&mut next, rule);
        if let Some(node) = next.iter().position(|v| !v.is_finite()) {
            return Err(PdeError::NonFinite { agent: i, node });
        }
        fields.push(next);
    }

    Ok(EnsembleState {
        time: state.time + dt,
        fields,
    })
}
