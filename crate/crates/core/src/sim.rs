//! Running experiments: time stepping, bound selection and sweeps.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    ftc_bound_directed, ftc_bound_undirected, fxc_bound_directed, fxc_bound_undirected,
    lyapunov_energy, max_pairwise_disagreement, settling_time, weighted_lyapunov_energy,
    AnalysisError, BoundReport, SettlingReport,
};
use crate::control::{evaluate, ControllerKind};
use crate::pde::{step, EnsembleState, PdeError};
use crate::scenario::{Experiment, Scenario, ScenarioError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub time: f64,
    /// Lyapunov energy; weighted by ω for directed scenarios.
    pub energy: f64,
    pub disagreement: f64,
    /// `probes[i][p]` is agent `i` at probe `p`.
    pub probes: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub fields: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub scenario_hash: String,
    pub cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub name: String,
    pub controller: ControllerKind,
    pub probe_locations: Vec<f64>,
    pub records: Vec<TrajectoryRecord>,
    pub snapshots: Vec<Snapshot>,
    pub grid_nodes: Vec<f64>,
    pub bound: Option<BoundReport>,
    pub settling: SettlingReport,
    pub dbar_required: Option<f64>,
    pub dbar_configured: Option<f64>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl RunResult {
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .map(|r| (r.time, r.disagreement))
            .collect()
    }
}

/// A failed step, with the trajectory recorded up to the failure.
#[derive(Debug, Error)]
#[error("simulation failed at t = {time}: {source}")]
pub struct SimFailure {
    pub time: f64,
    #[source]
    pub source: PdeError,
    pub partial: Box<RunResult>,
}

/// Terminal-time bound for the experiment's graph and controller, if one of
/// the four bounded cases applies.
pub fn bound_for(exp: &Experiment) -> Result<Option<BoundReport>, AnalysisError> {
    let ctrl = &exp.scenario.controller;
    if !ctrl.kind.is_nonlinear() {
        return Ok(None);
    }
    let alpha = ctrl.alpha.expect("validated");
    let initial = exp.initial_state();
    let mut report = match &exp.omega {
        Some(omega) => {
            // Disturbed protocols carry no directed-graph bound.
            if ctrl.kind.uses_sign() {
                return Ok(None);
            }
            if ctrl.kind.is_fixed_time() {
                fxc_bound_directed(&exp.graph, omega, alpha, ctrl.beta.expect("validated"))?
            } else {
                let v0 = weighted_lyapunov_energy(&initial, &exp.grid, omega)?;
                ftc_bound_directed(&exp.graph, omega, alpha, v0)?
            }
        }
        None => {
            if ctrl.kind.is_fixed_time() {
                fxc_bound_undirected(&exp.graph, alpha, ctrl.beta.expect("validated"))?
            } else {
                let v0 = lyapunov_energy(&initial, &exp.grid);
                ftc_bound_undirected(&exp.graph, alpha, v0)?
            }
        }
    };
    report.dbar_required = exp.dbar_required;
    Ok(Some(report))
}

fn energy(exp: &Experiment, state: &EnsembleState) -> f64 {
    match &exp.omega {
        Some(w) => {
            weighted_lyapunov_energy(state, &exp.grid, w).expect("weights sized at validation")
        }
        None => lyapunov_energy(state, &exp.grid),
    }
}

fn record(exp: &Experiment, state: &EnsembleState) -> TrajectoryRecord {
    TrajectoryRecord {
        time: state.time,
        energy: energy(exp, state),
        disagreement: max_pairwise_disagreement(state),
        probes: state
            .fields
            .iter()
            .map(|f| exp.probe_nodes.iter().map(|&j| f[j]).collect())
            .collect(),
    }
}

fn finish(exp: &Experiment, records: Vec<TrajectoryRecord>, snapshots: Vec<Snapshot>) -> RunResult {
    let sc = &exp.scenario;
    let mut warnings = exp.warnings.clone();
    let bound = bound_for(exp).unwrap_or_else(|e| {
        warnings.push(format!("terminal-time bound unavailable: {e}"));
        None
    });
    let samples: Vec<(f64, f64)> = records.iter().map(|r| (r.time, r.disagreement)).collect();
    let settling = settling_time(
        &samples,
        sc.output.threshold,
        bound.as_ref().map(|b| b.t_star_bound),
    );
    RunResult {
        name: sc.name.clone(),
        controller: sc.controller.kind,
        probe_locations: exp.probe_nodes.iter().map(|&j| exp.grid.node(j)).collect(),
        records,
        snapshots,
        grid_nodes: exp.grid.nodes(),
        bound,
        settling,
        dbar_required: exp.dbar_required,
        dbar_configured: sc.controller.kind.uses_sign().then_some(sc.controller.dbar),
        warnings,
        provenance: Provenance {
            scenario_hash: sc.content_hash(),
            cells: exp.grid.cells(),
            dx: exp.grid.dx(),
            dt: sc.dynamics.dt,
            seed: sc.seed,
        },
    }
}

/// Integrates the experiment from `t = 0` to `t_end`, recording every
/// `stride_steps` steps and at the final step.
pub fn simulate(exp: &Experiment) -> Result<RunResult, SimFailure> {
    let sc = &exp.scenario;
    let dt = sc.dynamics.dt;
    let nodes = exp.grid.nodes();
    let mut state = exp.initial_state();
    let mut records = Vec::with_capacity(exp.n_steps / exp.stride_steps + 2);
    let mut snapshots = Vec::new();
    let mut disturbance: Option<Vec<Vec<f64>>> = exp
        .disturbances
        .as_ref()
        .map(|ds| vec![vec![0.0; nodes.len()]; ds.len()]);

    for s in 0..=exp.n_steps {
        state.time = s as f64 * dt;
        if s % exp.stride_steps == 0 || s == exp.n_steps {
            records.push(record(exp, &state));
            if sc.output.snapshots {
                snapshots.push(Snapshot {
                    time: state.time,
                    fields: state.fields.clone(),
                });
            }
        }
        if s == exp.n_steps {
            break;
        }

        let control = evaluate(&sc.controller, &state, &exp.graph, &exp.grid);
        if let (Some(buf), Some(models)) = (disturbance.as_mut(), exp.disturbances.as_ref()) {
            for (row, model) in buf.iter_mut().zip(models) {
                for (v, &x) in row.iter_mut().zip(&nodes) {
                    *v = model.eval(x, state.time);
                }
            }
        }
        match step(
            &state,
            &exp.grid,
            &control,
            disturbance.as_deref(),
            exp.diffusion,
            dt,
        ) {
            Ok(next) => state = next,
            Err(source) => {
                return Err(SimFailure {
                    time: state.time,
                    source,
                    partial: Box::new(finish(exp, records, snapshots)),
                })
            }
        }
    }

    Ok(finish(exp, records, snapshots))
}

/// Sweepable scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha,
    Beta,
    Dbar,
    Dt,
    Cells,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [Self::Alpha, Self::Beta, Self::Dbar, Self::Dt, Self::Cells];

    pub fn name(self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::Beta => "beta",
            Self::Dbar => "dbar",
            Self::Dt => "dt",
            Self::Cells => "cells",
        }
    }

    pub fn parse(key: &str) -> Result<Self, ScenarioError> {
        match key {
            "alpha" => Ok(Self::Alpha),
            "beta" => Ok(Self::Beta),
            "dbar" => Ok(Self::Dbar),
            "dt" => Ok(Self::Dt),
            "cells" | "M" | "m" => Ok(Self::Cells),
            other => Err(ScenarioError::UnknownParameter(other.to_string())),
        }
    }

    fn apply(self, scenario: &mut Scenario, value: f64) {
        match self {
            Self::Alpha => scenario.controller.alpha = Some(value),
            Self::Beta => scenario.controller.beta = Some(value),
            Self::Dbar => scenario.controller.dbar = value,
            Self::Dt => scenario.dynamics.dt = value,
            Self::Cells => scenario.grid.cells = value as usize,
        }
    }

    fn current(self, scenario: &Scenario) -> Option<f64> {
        match self {
            Self::Alpha => scenario.controller.alpha,
            Self::Beta => scenario.controller.beta,
            Self::Dbar => Some(scenario.controller.dbar),
            Self::Dt => Some(scenario.dynamics.dt),
            Self::Cells => Some(scenario.grid.cells as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// Parses `key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self, ScenarioError> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| ScenarioError::Parse(format!("expected key=v1,v2,... in `{spec}`")))?;
        let param = SweepParam::parse(key.trim())?;
        let values = values
            .split(',')
            .filter(|v| !v.trim().is_empty())
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| ScenarioError::Parse(format!("bad value `{v}` for {key}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { param, values })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// One value per sweepable parameter, in `SweepParam::ALL` order.
    pub params: Vec<Option<f64>>,
    pub bound: Option<f64>,
    pub t_settle: Option<f64>,
    pub residual: Option<f64>,
    pub settled: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub results: Vec<Option<RunResult>>,
}

/// Cartesian product of the axes in row-major order (last axis fastest).
pub fn sweep_points(axes: &[SweepAxis]) -> Vec<Vec<(SweepParam, f64)>> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Vec::new();
    }
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((axis.param, v));
                    q
                })
            })
            .collect();
    }
    points
}

/// Runs every grid point independently (in parallel); failures are recorded
/// per row and do not stop the sweep.
pub fn sweep(base: &Scenario, axes: &[SweepAxis]) -> SweepOutcome {
    let points = sweep_points(axes);
    let outcomes: Vec<(SweepRow, Option<RunResult>)> = points
        .par_iter()
        .map(|point| {
            let mut scenario = base.clone();
            for &(param, value) in point {
                param.apply(&mut scenario, value);
            }
            let params = SweepParam::ALL
                .iter()
                .map(|p| p.current(&scenario))
                .collect();
            let run = scenario
                .validate()
                .map_err(|e| e.to_string())
                .and_then(|exp| simulate(&exp).map_err(|e| e.to_string()));
            match run {
                Ok(result) => (
                    SweepRow {
                        params,
                        bound: result.bound.as_ref().map(|b| b.t_star_bound),
                        t_settle: result.settling.t_settle,
                        residual: result.settling.residual_at_bound,
                        settled: result.settling.settled,
                        error: None,
                    },
                    Some(result),
                ),
                Err(error) => (
                    SweepRow {
                        params,
                        bound: None,
                        t_settle: None,
                        residual: None,
                        settled: false,
                        error: Some(error),
                    },
                    None,
                ),
            }
        })
        .collect();
    let (rows, results) = outcomes.into_iter().unzip();
    SweepOutcome { rows, results }
}
