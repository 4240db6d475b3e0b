//! Scenario files: a TOML document describing one experiment.
//!
//! ```toml
//! name = "example1_ftc"
//!
//! [graph]
//! adjacency = [[0, 1, 1], [1, 0, 0], [1, 0, 0]]
//! directed = false          # true: use detail-balance weights
//! # omega = [1, 0.5, 0.25]  # optional, derived when absent
//!
//! [grid]
//! length = 2.0
//! cells = 200
//!
//! [dynamics]
//! diffusion = 1e-3
//! dt = 1e-4
//! t_end = 8.0
//!
//! [controller]
//! kind = "ftc_disturbed"
//! alpha = 0.5
//! dbar = 8.0
//!
//! [[agents]]
//! initial = { sin = 3.0 }
//! disturbance = { sin_amp = 1.0, sin_freq = 1.0, linear_x = 1.0 }
//!
//! [output]
//! probes = [0.5, 1.0, 1.5]
//! ```
//!
//! See `scenarios/` in the repository for one annotated file per built-in.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::dbar_required;
use crate::control::{ControllerKind, ControllerSpec, DisturbanceModel};
use crate::graph::{BalanceWeights, CommGraph};
use crate::pde::{BoundaryRule, DiffusionParams, EnsembleState, InitialProfile, SpatialGrid};

pub const DEFAULT_PROBES: [f64; 3] = [0.5, 1.0, 1.5];
pub const DEFAULT_STRIDE: f64 = 0.01;
pub const DEFAULT_THRESHOLD: f64 = 1e-2;

/// A single validation failure located by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid scenario:\n{}", format_issues(.0))]
    Invalid(Vec<FieldIssue>),

    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),

    #[error("unknown sweep parameter `{0}` (expected alpha, beta, dbar, dt or cells)")]
    UnknownParameter(String),
}

fn format_issues(issues: &[FieldIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ScenarioError {
    pub fn issues(&self) -> &[FieldIssue] {
        match self {
            ScenarioError::Invalid(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub adjacency: Vec<Vec<f64>>,
    #[serde(default)]
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub diffusion: f64,
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub initial: InitialProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_probes")]
    pub probes: Vec<f64>,
    #[serde(default = "default_stride")]
    pub stride: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub snapshots: bool,
}

fn default_probes() -> Vec<f64> {
    DEFAULT_PROBES.to_vec()
}

fn default_stride() -> f64 {
    DEFAULT_STRIDE
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            probes: default_probes(),
            stride: DEFAULT_STRIDE,
            threshold: DEFAULT_THRESHOLD,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Reserved for stochastic disturbances; only recorded in provenance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub graph: GraphSection,
    pub grid: GridSection,
    pub dynamics: DynamicsSection,
    pub controller: ControllerSpec,
    pub agents: Vec<AgentSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub cells: Option<usize>,
    pub threshold: Option<f64>,
    pub snapshots: bool,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(dt) = overrides.dt {
            self.dynamics.dt = dt;
        }
        if let Some(cells) = overrides.cells {
            self.grid.cells = cells;
        }
        if let Some(t) = overrides.threshold {
            self.output.threshold = t;
        }
        if overrides.snapshots {
            self.output.snapshots = true;
        }
        if overrides.seed.is_some() {
            self.seed = overrides.seed;
        }
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Multiplies every initial profile by `factor`.
    pub fn scale_initial(&mut self, factor: f64) {
        for agent in &mut self.agents {
            agent.initial = agent.initial.scaled(factor);
        }
    }

    pub fn validate(&self) -> Result<Experiment, ScenarioError> {
        Experiment::new(self.clone())
    }
}

/// Reads a scenario file without validating it.
pub fn read_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml_str(&text)
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let scenario = read_scenario(path)?;
    scenario.validate()?;
    Ok(scenario)
}

/// A validated scenario with its derived numerical objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario: Scenario,
    pub graph: CommGraph,
    pub grid: SpatialGrid,
    pub diffusion: DiffusionParams,
    /// Detail-balance weights for directed scenarios.
    pub omega: Option<BalanceWeights>,
    pub disturbances: Option<Vec<DisturbanceModel>>,
    /// Largest per-agent disturbance bound (0 without disturbances).
    pub d_max: f64,
    pub dbar_required: Option<f64>,
    pub probe_nodes: Vec<usize>,
    pub stride_steps: usize,
    pub n_steps: usize,
    pub warnings: Vec<String>,
}

struct Issues(Vec<FieldIssue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldIssue {
            path: path.into(),
            message: message.into(),
        });
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl Experiment {
    pub fn new(scenario: Scenario) -> Result<Self, ScenarioError> {
        let mut issues = Issues(Vec::new());
        let mut warnings = Vec::new();

        let graph = match CommGraph::from_rows(&scenario.graph.adjacency) {
            Ok(g) => Some(g),
            Err(e) => {
                issues.push("graph.adjacency", e.to_string());
                None
            }
        };

        let grid = match SpatialGrid::new(scenario.grid.length, scenario.grid.cells) {
            Ok(g) => Some(g),
            Err(e) => {
                issues.push("grid", e.to_string());
                None
            }
        };

        let dyn_ = &scenario.dynamics;
        let diffusion = match DiffusionParams::new(dyn_.diffusion) {
            Ok(d) => Some(d),
            Err(e) => {
                issues.push("dynamics.diffusion", e.to_string());
                None
            }
        };
        if !positive(dyn_.dt) {
            issues.push("dynamics.dt", format!("dt = {} must be positive", dyn_.dt));
        } else if let (Some(g), Some(d)) = (grid, diffusion) {
            let limit = g.max_stable_dt(d.k);
            if dyn_.dt > limit {
                issues.push(
                    "dynamics.dt",
                    format!("StabilityViolation: dt = {} exceeds limit {limit}", dyn_.dt),
                );
            }
        }
        if !positive(dyn_.t_end) {
            issues.push(
                "dynamics.t_end",
                format!("t_end = {} must be positive", dyn_.t_end),
            );
        }

        let ctrl = &scenario.controller;
        for (field, message) in ctrl.violations() {
            issues.push(format!("controller.{field}"), message);
        }

        let n_agents = graph.as_ref().map(CommGraph::n_agents);
        if let Some(n) = n_agents {
            if scenario.agents.len() != n {
                issues.push(
                    "agents",
                    format!(
                        "expected {n} agents to match the graph, got {}",
                        scenario.agents.len()
                    ),
                );
            }
        }
        for (i, agent) in scenario.agents.iter().enumerate() {
            if !agent.initial.is_dirichlet_compatible(scenario.grid.length) {
                issues.push(
                    format!("agents[{i}].initial"),
                    format!(
                        "profile must vanish at both ends (y(0) = {}, y(L) = {})",
                        agent.initial.eval(0.0),
                        agent.initial.eval(scenario.grid.length)
                    ),
                );
            }
        }
        let with_disturbance = scenario
            .agents
            .iter()
            .filter(|a| a.disturbance.is_some())
            .count();
        let disturbances = if with_disturbance == 0 {
            None
        } else if with_disturbance == scenario.agents.len() {
            Some(
                scenario
                    .agents
                    .iter()
                    .map(|a| a.disturbance.expect("checked"))
                    .collect::<Vec<_>>(),
            )
        } else {
            issues.push(
                "agents",
                "either every agent or no agent must declare a disturbance",
            );
            None
        };

        let out = &scenario.output;
        for (i, &p) in out.probes.iter().enumerate() {
            if !(p.is_finite() && p >= 0.0 && p <= scenario.grid.length) {
                issues.push(
                    format!("output.probes[{i}]"),
                    format!("probe {p} outside [0, L]"),
                );
            }
        }
        if !positive(out.threshold) {
            issues.push(
                "output.threshold",
                format!("threshold = {} must be positive", out.threshold),
            );
        }
        if !positive(out.stride) || (positive(dyn_.dt) && out.stride < dyn_.dt) {
            issues.push(
                "output.stride",
                format!("stride = {} must be positive and at least dt", out.stride),
            );
        }

        // Graph type against the controller's bound requirements.
        let mut omega = None;
        if let Some(g) = &graph {
            if scenario.graph.directed {
                if !g.is_strongly_connected() {
                    issues.push(
                        "graph.adjacency",
                        "NotStronglyConnected: directed graph must be strongly connected",
                    );
                } else {
                    let weights = match &scenario.graph.omega {
                        Some(w) => BalanceWeights::new(w.clone())
                            .and_then(|w| g.check_balance(&w).map(|_| w)),
                        None => g.detail_balance_weights(),
                    };
                    match weights {
                        Ok(w) => omega = Some(w),
                        Err(e) => issues.push("graph.omega", e.to_string()),
                    }
                }
                if ctrl.kind.uses_sign() {
                    warnings.push(format!(
                        "no terminal-time bound for {} on a directed graph",
                        ctrl.kind.name()
                    ));
                }
            } else {
                if scenario.graph.omega.is_some() {
                    issues.push(
                        "graph.omega",
                        "omega is only meaningful with directed = true",
                    );
                }
                if ctrl.kind.is_nonlinear() {
                    if !g.is_symmetric() {
                        issues.push(
                            "graph.adjacency",
                            "asymmetric graph with an undirected bound request (set directed = true)",
                        );
                    } else if !g.is_undirected_connected() {
                        issues.push(
                            "graph.adjacency",
                            "GraphNotConnected: undirected graph is not connected",
                        );
                    }
                }
            }
        }

        let d_max = match (&disturbances, grid) {
            (Some(ds), Some(g)) => ds.iter().map(|d| d.max_abs(&g)).fold(0.0, f64::max),
            _ => 0.0,
        };

        if disturbances.is_some() && ctrl.kind.is_nonlinear() && !ctrl.kind.uses_sign() {
            warnings.push(format!(
                "{} has no disturbance-rejection term but the scenario is disturbed",
                ctrl.kind.name()
            ));
        }

        let mut dbar_req = None;
        if let Some(g) = &graph {
            if ctrl.kind.uses_sign() && !scenario.graph.directed && g.is_undirected_connected() {
                if let Ok(req) = dbar_required(g, d_max, g.n_agents()) {
                    dbar_req = Some(req);
                    if ctrl.dbar < req {
                        warnings.push(format!(
                            "dbar = {} is below the sufficient value {req:.6}",
                            ctrl.dbar
                        ));
                    }
                }
            }
            if ctrl.kind.uses_sign() && ctrl.dbar > 0.0 && ctrl.sign_layer > 0.0 {
                // Explicit Euler on the linear zone of the saturated sign.
                let gain = dyn_.dt * ctrl.dbar * 2.0 * g.max_degree() / ctrl.sign_layer;
                if gain >= 2.0 {
                    warnings.push(format!(
                        "sign_layer = {} is narrow for dt = {} (step gain {gain:.2} ≥ 2); expect chattering",
                        ctrl.sign_layer, dyn_.dt
                    ));
                }
            }
            if let (Some(alpha), true) = (ctrl.alpha, ctrl.epsilon_floor > 0.0) {
                // Largest gain of the α-term just above the floor.
                let gain = dyn_.dt * ctrl.epsilon_floor.powf(alpha - 1.0) * 2.0 * g.max_degree();
                if ctrl.kind.is_nonlinear() && gain >= 2.0 {
                    warnings.push(format!(
                        "epsilon_floor = {} is small for dt = {} (step gain {gain:.2} ≥ 2); expect chattering near consensus",
                        ctrl.epsilon_floor, dyn_.dt
                    ));
                }
            }
        }

        if !issues.0.is_empty() {
            return Err(ScenarioError::Invalid(issues.0));
        }

        let grid = grid.expect("validated");
        let n_steps = (dyn_.t_end / dyn_.dt).round() as usize;
        let stride_steps = ((out.stride / dyn_.dt).round() as usize).max(1);
        let probe_nodes = out.probes.iter().map(|&p| grid.nearest_node(p)).collect();

        Ok(Self {
            graph: graph.expect("validated"),
            grid,
            diffusion: diffusion.expect("validated"),
            omega,
            disturbances,
            d_max,
            dbar_required: dbar_req,
            probe_nodes,
            stride_steps,
            n_steps,
            warnings,
            scenario,
        })
    }

    pub fn boundary_rule(&self) -> BoundaryRule {
        if self.scenario.controller.kind == ControllerKind::LinearBoundary {
            BoundaryRule::NeumannRight
        } else {
            BoundaryRule::Dirichlet
        }
    }

    pub fn initial_state(&self) -> EnsembleState {
        let profiles: Vec<InitialProfile> =
            self.scenario.agents.iter().map(|a| a.initial).collect();
        EnsembleState::from_profiles(&profiles, &self.grid, self.boundary_rule())
    }

    pub fn dt(&self) -> f64 {
        self.scenario.dynamics.dt
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 10] = [
    "example1_ftc",
    "example1_fxc",
    "example1_none",
    "example1_linear",
    "example1_boundary",
    "example2_ftc",
    "example2_fxc",
    "example2_none",
    "example2_linear",
    "example2_boundary",
];

fn example_profiles() -> [InitialProfile; 3] {
    [
        InitialProfile::trig(3.0, 0.0, 0.0),
        InitialProfile::trig(0.0, -2.0, 2.0),
        InitialProfile::trig(0.0, 2.0, -2.0),
    ]
}

fn example1_disturbances() -> [DisturbanceModel; 3] {
    [
        DisturbanceModel {
            sin_amp: 1.0,
            sin_freq: 1.0,
            linear_x: 1.0,
            ..Default::default()
        },
        DisturbanceModel {
            cos_amp: 1.0,
            cos_freq: 1.0,
            linear_x: 1.0,
            ..Default::default()
        },
        DisturbanceModel {
            product_amp: 1.0,
            product_freq: 1.0,
            ..Default::default()
        },
    ]
}

/// The hard-coded three-agent scenarios.
///
/// Example 1 uses an undirected star graph; disturbances are applied to the
/// sign-based controllers and to the uncontrolled run, while the linear
/// baselines run undisturbed. Example 2 uses a directed, detail-balanced
/// graph without disturbances.
pub fn builtin(name: &str) -> Result<Scenario, ScenarioError> {
    let (example, variant) = name
        .split_once('_')
        .ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_string()))?;
    let unknown = || ScenarioError::UnknownBuiltin(name.to_string());

    let (adjacency, directed, t_end, disturbed_kinds) = match example {
        "example1" => (
            vec![
                vec![0.0, 1.0, 1.0],
                vec![1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
            ],
            false,
            8.0,
            true,
        ),
        "example2" => (
            vec![
                vec![0.0, 1.0, 1.0],
                vec![2.0, 0.0, 1.0],
                vec![4.0, 2.0, 0.0],
            ],
            true,
            5.0,
            false,
        ),
        _ => return Err(unknown()),
    };

    let controller = match (variant, disturbed_kinds) {
        ("ftc", true) => ControllerSpec::new(ControllerKind::FtcDisturbed)
            .with_alpha(0.5)
            .with_dbar(8.0),
        ("fxc", true) => ControllerSpec::new(ControllerKind::FxcDisturbed)
            .with_alpha(0.5)
            .with_beta(1.1)
            .with_dbar(8.0),
        ("ftc", false) => ControllerSpec::new(ControllerKind::FtcNominal).with_alpha(0.5),
        ("fxc", false) => ControllerSpec::new(ControllerKind::FxcNominal)
            .with_alpha(0.5)
            .with_beta(1.1),
        ("none", _) => ControllerSpec::new(ControllerKind::None),
        ("linear", _) => ControllerSpec::new(ControllerKind::LinearDistributed),
        ("boundary", _) => ControllerSpec::new(ControllerKind::LinearBoundary),
        _ => return Err(unknown()),
    };
    let disturbed = disturbed_kinds && matches!(variant, "ftc" | "fxc" | "none");

    let agents = example_profiles()
        .into_iter()
        .zip(example1_disturbances())
        .map(|(initial, d)| AgentSection {
            initial,
            disturbance: disturbed.then_some(d),
        })
        .collect();

    Ok(Scenario {
        name: name.to_string(),
        seed: None,
        graph: GraphSection {
            adjacency,
            directed,
            omega: None,
        },
        grid: GridSection {
            length: 2.0,
            cells: 200,
        },
        dynamics: DynamicsSection {
            diffusion: 1e-3,
            dt: 1e-4,
            t_end,
        },
        controller,
        agents,
        output: OutputSection::default(),
    })
}
