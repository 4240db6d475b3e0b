//! Consensus protocols and bounded disturbances.
//!
//! The four nonlinear protocols share one shape:
//!
//! ```text
//! u_i(x) = − Σ_j a_ij · E_ij^(α−1) · ξ_ij(x)        (finite-time term)
//!          − Σ_j a_ij · E_ij^(β−1) · ξ_ij(x)        (fixed-time kinds only)
//!          − d̄ · Σ_j a_ij · sgn(ξ_ij(x))            (disturbed kinds only)
//! ```
//!
//! with `ξ_ij = y_i − y_j` and `E_ij = ∫₀ᴸ ξ_ij² dx`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::graph::CommGraph;
use crate::pde::{trapezoid_by, ControlInput, EnsembleState, SpatialGrid};

/// Pairs with energy below this are treated as converged. Large enough that
/// the capped gain `ε^(α−1)` stays inside the explicit step's stable range
/// at the default grid and time step.
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-6;
/// Default boundary-layer width for the regularized sign.
pub const DEFAULT_SIGN_LAYER: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    FtcDisturbed,
    FxcDisturbed,
    FtcNominal,
    FxcNominal,
    LinearDistributed,
    LinearBoundary,
    None,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 7] = [
        ControllerKind::FtcDisturbed,
        ControllerKind::FxcDisturbed,
        ControllerKind::FtcNominal,
        ControllerKind::FxcNominal,
        ControllerKind::LinearDistributed,
        ControllerKind::LinearBoundary,
        ControllerKind::None,
    ];

    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            Self::FtcDisturbed | Self::FxcDisturbed | Self::FtcNominal | Self::FxcNominal
        )
    }

    pub fn uses_beta(self) -> bool {
        matches!(self, Self::FxcDisturbed | Self::FxcNominal)
    }

    pub fn uses_sign(self) -> bool {
        matches!(self, Self::FtcDisturbed | Self::FxcDisturbed)
    }

    /// One of the four finite/fixed-time protocols that carry a terminal-time bound.
    pub fn is_nonlinear(self) -> bool {
        self.uses_alpha()
    }

    pub fn is_fixed_time(self) -> bool {
        self.uses_beta()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FtcDisturbed => "ftc_disturbed",
            Self::FxcDisturbed => "fxc_disturbed",
            Self::FtcNominal => "ftc_nominal",
            Self::FxcNominal => "fxc_nominal",
            Self::LinearDistributed => "linear_distributed",
            Self::LinearBoundary => "linear_boundary",
            Self::None => "none",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown controller kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub dbar: f64,
    #[serde(default = "default_floor")]
    pub epsilon_floor: f64,
    #[serde(default = "default_layer")]
    pub sign_layer: f64,
}

fn default_floor() -> f64 {
    DEFAULT_EPSILON_FLOOR
}

fn default_layer() -> f64 {
    DEFAULT_SIGN_LAYER
}

impl ControllerSpec {
    pub fn new(kind: ControllerKind) -> Self {
        Self {
            kind,
            alpha: None,
            beta: None,
            dbar: 0.0,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            sign_layer: DEFAULT_SIGN_LAYER,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_dbar(mut self, dbar: f64) -> Self {
        self.dbar = dbar;
        self
    }

    pub fn with_sign_layer(mut self, layer: f64) -> Self {
        self.sign_layer = layer;
        self
    }

    /// `(field, message)` for every parameter out of range for this kind.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if self.kind.uses_alpha() {
            match self.alpha {
                Some(a) if a > 0.0 && a < 1.0 => {}
                Some(a) => out.push(("alpha", format!("BadAlpha: alpha = {a} must lie in (0, 1)"))),
                None => out.push((
                    "alpha",
                    "BadAlpha: alpha is required for this controller".into(),
                )),
            }
        }
        if self.kind.uses_beta() {
            match self.beta {
                Some(b) if b > 1.0 && b.is_finite() => {}
                Some(b) => out.push(("beta", format!("BadBeta: beta = {b} must exceed 1"))),
                None => out.push((
                    "beta",
                    "BadBeta: beta is required for this controller".into(),
                )),
            }
        }
        if !(self.dbar.is_finite() && self.dbar >= 0.0) {
            out.push(("dbar", format!("dbar = {} must be non-negative", self.dbar)));
        }
        if !(self.epsilon_floor.is_finite() && self.epsilon_floor >= 0.0) {
            out.push((
                "epsilon_floor",
                format!(
                    "epsilon_floor = {} must be non-negative",
                    self.epsilon_floor
                ),
            ));
        }
        if !(self.sign_layer.is_finite() && self.sign_layer >= 0.0) {
            out.push((
                "sign_layer",
                format!("sign_layer = {} must be non-negative", self.sign_layer),
            ));
        }
        out
    }
}

/// Symmetric table of `E_ij = ∫ (y_i − y_j)² dx`, computed once per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEnergies {
    n: usize,
    values: Vec<f64>,
}

impl PairEnergies {
    pub fn compute(state: &EnsembleState, grid: &SpatialGrid) -> Self {
        let n = state.n_agents();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let e = pairwise_energy(state, grid, i, j);
                values[i * n + j] = e;
                values[j * n + i] = e;
            }
        }
        Self { n, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// `∫₀ᴸ (y_i − y_j)² dx` by the trapezoid rule.
pub fn pairwise_energy(state: &EnsembleState, grid: &SpatialGrid, i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    let (yi, yj) = (state.field(i), state.field(j));
    trapezoid_by(grid.n_nodes(), grid.dx(), |k| {
        let d = yi[k] - yj[k];
        d * d
    })
}

/// Exact sign for `layer = 0`, otherwise `clamp(v/layer, −1, 1)`.
#[inline]
pub fn sgn_regularized(v: f64, layer: f64) -> f64 {
    if layer > 0.0 {
        (v / layer).clamp(-1.0, 1.0)
    } else if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Terms {
    alpha: Option<f64>,
    beta: Option<f64>,
    dbar: f64,
    floor: f64,
    layer: f64,
}

fn nonlinear_protocol(
    state: &EnsembleState,
    graph: &CommGraph,
    energies: &PairEnergies,
    terms: Terms,
) -> Vec<Vec<f64>> {
    let n = state.n_agents();
    let nodes = state.fields.first().map_or(0, Vec::len);
    let mut u = vec![vec![0.0; nodes]; n];
    for (i, ui) in u.iter_mut().enumerate() {
        let yi = state.field(i);
        for j in 0..n {
            let a = graph.weight(i, j);
            if j == i || a == 0.0 {
                continue;
            }
            let e = energies.get(i, j);
            let mut gain = 0.0;
            if let Some(alpha) = terms.alpha {
                if e > 0.0 && e >= terms.floor {
                    gain += e.powf(alpha - 1.0);
                }
            }
            if let Some(beta) = terms.beta {
                gain += e.powf(beta - 1.0);
            }
            let yj = state.field(j);
            let sign_gain = terms.dbar * a;
            for k in 0..nodes {
                let xi = yi[k] - yj[k];
                let mut v = -a * gain * xi;
                if sign_gain != 0.0 {
                    v -= sign_gain * sgn_regularized(xi, terms.layer);
                }
                ui[k] += v;
            }
        }
    }
    u
}

// Callers validate the spec first; see `ControllerSpec::violations`.
fn terms(spec: &ControllerSpec, fixed_time: bool, disturbed: bool) -> Terms {
    Terms {
        alpha: Some(spec.alpha.expect("controller spec without alpha")),
        beta: fixed_time.then(|| spec.beta.expect("fixed-time controller spec without beta")),
        dbar: if disturbed { spec.dbar } else { 0.0 },
        floor: spec.epsilon_floor,
        layer: spec.sign_layer,
    }
}

/// Finite-time protocol with sign-based disturbance rejection.
pub fn ftc_disturbed(
    state: &EnsembleState,
    graph: &CommGraph,
    grid: &SpatialGrid,
    spec: &ControllerSpec,
) -> Vec<Vec<f64>> {
    let e = PairEnergies::compute(state, grid);
    nonlinear_protocol(state, graph, &e, terms(spec, false, true))
}

/// Fixed-time protocol with sign-based disturbance rejection.
pub fn fxc_disturbed(
    state: &EnsembleState,
    graph: &CommGraph,
    grid: &SpatialGrid,
    spec: &ControllerSpec,
) -> Vec<Vec<f64>> {
    let e = PairEnergies::compute(state, grid);
    nonlinear_protocol(state, graph, &e, terms(spec, true, true))
}

pub fn ftc_nominal(
    state: &EnsembleState,
    graph: &CommGraph,
    grid: &SpatialGrid,
    spec: &ControllerSpec,
) -> Vec<Vec<f64>> {
    let e = PairEnergies::compute(state, grid);
    nonlinear_protocol(state, graph, &e, terms(spec, false, false))
}

pub fn fxc_nominal(
    state: &EnsembleState,
    graph: &CommGraph,
    grid: &SpatialGrid,
    spec: &ControllerSpec,
) -> Vec<Vec<f64>> {
    let e = PairEnergies::compute(state, grid);
    nonlinear_protocol(state, graph, &e, terms(spec, true, false))
}

/// Pointwise linear consensus `u_i = −Σ_j a_ij ξ_ij`.
pub fn linear_distributed(state: &EnsembleState, graph: &CommGraph) -> Vec<Vec<f64>> {
    let n = state.n_agents();
    (0..n)
        .map(|i| {
            let yi = state.field(i);
            let mut ui = vec![0.0; yi.len()];
            for j in (0..n).filter(|&j| j != i) {
                let a = graph.weight(i, j);
                if a == 0.0 {
                    continue;
                }
                for (u, (a_i, a_j)) in ui.iter_mut().zip(yi.iter().zip(state.field(j))) {
                    *u -= a * (a_i - a_j);
                }
            }
            ui
        })
        .collect()
}

/// Right-end Neumann values `u_i = −Σ_j a_ij ξ_ij(L)`.
pub fn boundary_linear(state: &EnsembleState, graph: &CommGraph) -> Vec<f64> {
    let n = state.n_agents();
    let end = |i: usize| *state.field(i).last().expect("empty field");
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| -graph.weight(i, j) * (end(i) - end(j)))
                .sum()
        })
        .collect()
}

/// Dispatches on the controller kind.
pub fn evaluate(
    spec: &ControllerSpec,
    state: &EnsembleState,
    graph: &CommGraph,
    grid: &SpatialGrid,
) -> ControlInput {
    match spec.kind {
        ControllerKind::FtcDisturbed => {
            ControlInput::Distributed(ftc_disturbed(state, graph, grid, spec))
        }
        ControllerKind::FxcDisturbed => {
            ControlInput::Distributed(fxc_disturbed(state, graph, grid, spec))
        }
        ControllerKind::FtcNominal => {
            ControlInput::Distributed(ftc_nominal(state, graph, grid, spec))
        }
        ControllerKind::FxcNominal => {
            ControlInput::Distributed(fxc_nominal(state, graph, grid, spec))
        }
        ControllerKind::LinearDistributed => {
            ControlInput::Distributed(linear_distributed(state, graph))
        }
        ControllerKind::LinearBoundary => ControlInput::BoundaryFlux(boundary_linear(state, graph)),
        ControllerKind::None => ControlInput::None,
    }
}

/// `c₁·sin(π·c₂·t + c₃·x) + c₄·cos(π·c₅·t) + c₆·x + c₇·sin(π·c₈·t·x) + c₉`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisturbanceModel {
    pub sin_amp: f64,
    pub sin_freq: f64,
    pub sin_x: f64,
    pub cos_amp: f64,
    pub cos_freq: f64,
    pub linear_x: f64,
    pub product_amp: f64,
    pub product_freq: f64,
    pub offset: f64,
}

impl DisturbanceModel {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let mut d = self.offset + self.linear_x * x;
        if self.sin_amp != 0.0 {
            d += self.sin_amp * (PI * self.sin_freq * t + self.sin_x * x).sin();
        }
        if self.cos_amp != 0.0 {
            d += self.cos_amp * (PI * self.cos_freq * t).cos();
        }
        if self.product_amp != 0.0 {
            d += self.product_amp * (PI * self.product_freq * t * x).sin();
        }
        d
    }

    /// Conservative `sup |d|` over `[0, L] × [0, ∞)`.
    pub fn max_abs(&self, grid: &SpatialGrid) -> f64 {
        self.sin_amp.abs()
            + self.cos_amp.abs()
            + self.product_amp.abs()
            + self.linear_x.abs() * grid.length()
            + self.offset.abs()
    }

    pub fn sample(&self, grid: &SpatialGrid, t: f64) -> Vec<f64> {
        grid.nodes().into_iter().map(|x| self.eval(x, t)).collect()
    }
}

pub fn disturbance_eval(model: &DisturbanceModel, x: f64, t: f64) -> f64 {
    model.eval(x, t)
}

/// Bound on `|d|` valid for every `t`; the horizon only documents intent since
/// the family is uniformly bounded in time.
pub fn disturbance_max(model: &DisturbanceModel, grid: &SpatialGrid, _t_horizon: f64) -> f64 {
    model.max_abs(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::InitialProfile;
    use approx::assert_relative_eq;

    fn k2() -> CommGraph {
        CommGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    /// y_1 − y_2 ≡ 1 at interior nodes of [0, 1]; E_12 = 1 − dx.
    fn unit_gap(cells: usize) -> (SpatialGrid, EnsembleState) {
        let g = SpatialGrid::new(1.0, cells).unwrap();
        let mut y1 = vec![1.0; cells + 1];
        y1[0] = 0.0;
        y1[cells] = 0.0;
        (g, EnsembleState::new(0.0, vec![y1, vec![0.0; cells + 1]]))
    }

    fn spec(kind: ControllerKind) -> ControllerSpec {
        ControllerSpec::new(kind)
            .with_alpha(0.5)
            .with_beta(1.1)
            .with_dbar(8.0)
            .with_sign_layer(0.0)
    }

    #[test]
    fn pairwise_energy_examples() {
        let (g, s) = unit_gap(1000);
        assert_eq!(pairwise_energy(&s, &g, 0, 0), 0.0);
        assert_relative_eq!(pairwise_energy(&s, &g, 0, 1), 1.0, epsilon = 2e-3);

        let g = SpatialGrid::new(2.0, 400).unwrap();
        let y1 = InitialProfile::trig(3.0, 0.0, 0.0).sample(&g);
        let y2 = InitialProfile::trig(0.0, -2.0, 2.0).sample(&g);
        let s = EnsembleState::new(0.0, vec![y1, y2]);
        assert!((pairwise_energy(&s, &g, 0, 1) - 21.0).abs() < 1e-4);
    }

    #[test]
    fn sign_regularization() {
        assert_eq!(sgn_regularized(0.0, 1e-3), 0.0);
        assert_eq!(sgn_regularized(0.0, 0.0), 0.0);
        assert_eq!(sgn_regularized(5.0, 1e-3), 1.0);
        assert_eq!(sgn_regularized(-5.0, 0.0), -1.0);
        assert_relative_eq!(sgn_regularized(5e-4, 1e-3), 0.5);
    }

    #[test]
    fn two_agent_unit_gap() {
        // E_12 = 1 exactly would need a discontinuous profile; use the
        // discrete energy and the closed form E^(α−1) directly.
        let (g, s) = unit_gap(1000);
        let e = pairwise_energy(&s, &g, 0, 1);
        let graph = k2();
        let node = 500;
        let ftc = ftc_disturbed(&s, &graph, &g, &spec(ControllerKind::FtcDisturbed));
        assert_relative_eq!(ftc[0][node], -e.powf(-0.5) - 8.0, epsilon = 1e-12);
        assert!((ftc[0][node] + 9.0).abs() < 2e-3);
        let fxc = fxc_disturbed(&s, &graph, &g, &spec(ControllerKind::FxcDisturbed));
        assert!((fxc[0][node] + 10.0).abs() < 2e-3);
        let ftc_n = ftc_nominal(&s, &graph, &g, &spec(ControllerKind::FtcNominal));
        assert!((ftc_n[0][node] + 1.0).abs() < 2e-3);
        let fxc_n = fxc_nominal(&s, &graph, &g, &spec(ControllerKind::FxcNominal));
        assert!((fxc_n[0][node] + 2.0).abs() < 2e-3);
        // Agent 2 gets the mirrored force.
        assert_eq!(fxc[1][node], -fxc[0][node]);
    }

    #[test]
    fn floor_suppresses_converged_pairs() {
        let g = SpatialGrid::new(1.0, 10).unwrap();
        // Constant gap c with E = c²·(1 − dx) ≈ 1e-13 < 1e-12.
        let c = (1e-13f64 / 0.9).sqrt();
        let mut y1 = vec![c; 11];
        y1[0] = 0.0;
        y1[10] = 0.0;
        let s = EnsembleState::new(0.0, vec![y1, vec![0.0; 11]]);
        assert!(pairwise_energy(&s, &g, 0, 1) < 1e-12);
        let mut sp = spec(ControllerKind::FtcNominal);
        sp.epsilon_floor = 1e-12;
        let u = ftc_nominal(&s, &k2(), &g, &sp);
        assert!(u.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn beta_term_vanishes_with_energy() {
        let g = SpatialGrid::new(1.0, 10).unwrap();
        let mut prev = f64::INFINITY;
        for scale in [1e-1, 1e-3, 1e-6, 0.0] {
            let mut y1 = vec![scale; 11];
            y1[0] = 0.0;
            y1[10] = 0.0;
            let s = EnsembleState::new(0.0, vec![y1, vec![0.0; 11]]);
            let e = PairEnergies::compute(&s, &g);
            let only_beta = Terms {
                alpha: None,
                beta: Some(1.1),
                dbar: 0.0,
                floor: 0.0,
                layer: 0.0,
            };
            let u = nonlinear_protocol(&s, &k2(), &e, only_beta);
            let mag = u[0][5].abs();
            assert!(mag < prev);
            prev = mag;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn identical_agents_get_zero_control() {
        let g = SpatialGrid::new(2.0, 40).unwrap();
        let y = InitialProfile::trig(3.0, 0.0, 0.0).sample(&g);
        let s = EnsembleState::new(0.0, vec![y.clone(), y.clone(), y]);
        let graph = CommGraph::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![2.0, 0.0, 1.0],
            vec![4.0, 2.0, 0.0],
        ])
        .unwrap();
        for kind in ControllerKind::ALL {
            match evaluate(&spec(kind), &s, &graph, &g) {
                ControlInput::Distributed(u) => assert!(u.iter().flatten().all(|v| *v == 0.0)),
                ControlInput::BoundaryFlux(f) => assert!(f.iter().all(|v| *v == 0.0)),
                ControlInput::None => {}
            }
        }
    }

    #[test]
    fn linear_examples() {
        let (_, s) = unit_gap(10);
        let u = linear_distributed(&s, &k2());
        assert_eq!(u[0][5], -1.0);
        assert_eq!(u[1][5], 1.0);

        // Example 1 graph at x = 0.5: ξ_12 = 3 − 2 = 1, ξ_13 = 3 + 2 = 5.
        let g = SpatialGrid::new(2.0, 200).unwrap();
        let graph = CommGraph::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let fields = [
            InitialProfile::trig(3.0, 0.0, 0.0),
            InitialProfile::trig(0.0, -2.0, 2.0),
            InitialProfile::trig(0.0, 2.0, -2.0),
        ]
        .iter()
        .map(|p| p.sample(&g))
        .collect();
        let s = EnsembleState::new(0.0, fields);
        let u = linear_distributed(&s, &graph);
        assert!((u[0][50] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_flux_examples() {
        let s = EnsembleState::new(0.0, vec![vec![0.0, 1.0, 2.5], vec![0.0, 1.0, 2.0]]);
        assert_eq!(boundary_linear(&s, &k2()), vec![-0.5, 0.5]);
        let same = EnsembleState::new(0.0, vec![vec![0.0, 1.0, 0.0]; 2]);
        assert_eq!(boundary_linear(&same, &k2()), vec![0.0, 0.0]);
    }

    #[test]
    fn disturbance_examples() {
        let d1 = DisturbanceModel {
            sin_amp: 1.0,
            sin_freq: 1.0,
            linear_x: 1.0,
            ..Default::default()
        };
        assert_relative_eq!(disturbance_eval(&d1, 2.0, 0.5), 3.0, epsilon = 1e-15);
        assert_eq!(disturbance_eval(&DisturbanceModel::zero(), 1.3, 4.0), 0.0);
        let d3 = DisturbanceModel {
            product_amp: 1.0,
            product_freq: 1.0,
            ..Default::default()
        };
        assert!(disturbance_eval(&d3, 1.0, 1.0).abs() < 1e-15);

        let g = SpatialGrid::new(2.0, 200).unwrap();
        assert_eq!(disturbance_max(&d1, &g, 10.0), 3.0);
        assert_eq!(disturbance_max(&d3, &g, 10.0), 1.0);
        assert_eq!(disturbance_max(&DisturbanceModel::zero(), &g, 10.0), 0.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ControllerKind::ALL {
            assert_eq!(kind.name().parse::<ControllerKind>().unwrap(), kind);
        }
        assert!("bogus".parse::<ControllerKind>().is_err());
    }

    #[test]
    fn spec_violations_name_fields() {
        let bad = ControllerSpec::new(ControllerKind::FxcNominal).with_alpha(1.5);
        let v = bad.violations();
        assert!(v
            .iter()
            .any(|(f, m)| *f == "alpha" && m.contains("BadAlpha")));
        assert!(v.iter().any(|(f, _)| *f == "beta"));
        assert!(ControllerSpec::new(ControllerKind::None)
            .violations()
            .is_empty());
    }
}
