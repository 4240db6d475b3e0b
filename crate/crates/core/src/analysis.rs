//! Lyapunov energies, terminal-time bounds and empirical settling time.
//!
//! | case            | bound                                                    |
//! |-----------------|----------------------------------------------------------|
//! | undirected FTC  | `V(0)^(1−α) / (C₁(1−α))`, `C₁ = (2λ₂(𝓛(B)))^α`           |
//! | undirected FXC  | `1/(C₁(1−α)) + 1/((N^(1−β))²·C₂·(β−1))`, `C₂ = (2λ₂(𝓛(P)))^β` |
//! | directed FTC    | `V_ω(0)^(1−α) / (C₃(1−α))`, `C₃ = (2λ_ω(𝓛(D))/max ω)^α`  |
//! | directed FXC    | `1/(C₃(1−α)) + 1/((N^(1−β))²·C₄(β−1))`, `C₄ = (2λ_ω(𝓛(Q))/max ω)^β` |
//!
//! where `B = (a_ij^(1/α))`, `P = (a_ij^(1/β))`, `D = ((ω_i a_ij)^(1/α))` and
//! `Q = ((ω_i a_ij)^(1/β))`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{lambda2, lambda_omega, BalanceWeights, CommGraph, GraphError};
use crate::pde::{trapezoid_by, EnsembleState, SpatialGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("graph is not undirected and connected")]
    GraphNotConnected,

    #[error("BadAlpha: alpha = {0} must lie in (0, 1)")]
    BadAlpha(f64),

    #[error("BadBeta: beta = {0} must exceed 1")]
    BadBeta(f64),

    #[error("initial energy must be finite and non-negative, got {0}")]
    BadEnergy(f64),

    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundCase {
    UndirectedFtc,
    UndirectedFxc,
    DirectedFtc,
    DirectedFxc,
}

impl BoundCase {
    pub fn name(self) -> &'static str {
        match self {
            Self::UndirectedFtc => "UNDIRECTED_FTC",
            Self::UndirectedFxc => "UNDIRECTED_FXC",
            Self::DirectedFtc => "DIRECTED_FTC",
            Self::DirectedFxc => "DIRECTED_FXC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub case: BoundCase,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    /// Initial (possibly weighted) energy; absent for fixed-time cases.
    pub v0: Option<f64>,
    pub t_star_bound: f64,
    pub dbar_required: Option<f64>,
}

impl BoundReport {
    fn new(case: BoundCase, t_star_bound: f64) -> Self {
        Self {
            case,
            c1: None,
            c2: None,
            c3: None,
            c4: None,
            v0: None,
            t_star_bound,
            dbar_required: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlingReport {
    pub threshold: f64,
    pub settled: bool,
    pub t_settle: Option<f64>,
    /// Disagreement at the first sample at or after the bound time.
    pub residual_at_bound: Option<f64>,
}

fn check_alpha(alpha: f64) -> Result<(), AnalysisError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::BadAlpha(alpha))
    }
}

fn check_beta(beta: f64) -> Result<(), AnalysisError> {
    if beta > 1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::BadBeta(beta))
    }
}

fn check_energy(v0: f64) -> Result<(), AnalysisError> {
    if v0.is_finite() && v0 >= 0.0 {
        Ok(())
    } else {
        Err(AnalysisError::BadEnergy(v0))
    }
}

fn require_undirected(graph: &CommGraph) -> Result<(), AnalysisError> {
    if graph.is_undirected_connected() {
        Ok(())
    } else {
        Err(AnalysisError::GraphNotConnected)
    }
}

fn require_balanced(graph: &CommGraph, omega: &BalanceWeights) -> Result<(), AnalysisError> {
    if !graph.is_strongly_connected() {
        return Err(GraphError::NotStronglyConnected.into());
    }
    graph.check_balance(omega)?;
    Ok(())
}

/// `V = ∫ Σ_i (y_i − y*)² dx` with `y*` the agent mean at each node.
pub fn lyapunov_energy(state: &EnsembleState, grid: &SpatialGrid) -> f64 {
    let n = state.n_agents() as f64;
    trapezoid_by(grid.n_nodes(), grid.dx(), |k| {
        let mean = state.fields.iter().map(|f| f[k]).sum::<f64>() / n;
        state
            .fields
            .iter()
            .map(|f| (f[k] - mean) * (f[k] - mean))
            .sum()
    })
}

/// `V_ω = ∫ Σ_i ω_i (y_i − ŷ)² dx` with `ŷ = Σ ω_i y_i / Σ ω_i`.
pub fn weighted_lyapunov_energy(
    state: &EnsembleState,
    grid: &SpatialGrid,
    omega: &BalanceWeights,
) -> Result<f64, AnalysisError> {
    if omega.len() != state.n_agents() {
        return Err(GraphError::InvalidWeights(format!(
            "expected {} weights, got {}",
            state.n_agents(),
            omega.len()
        ))
        .into());
    }
    let w = omega.as_slice();
    let total = omega.sum();
    Ok(trapezoid_by(grid.n_nodes(), grid.dx(), |k| {
        let centroid = state
            .fields
            .iter()
            .zip(w)
            .map(|(f, wi)| wi * f[k])
            .sum::<f64>()
            / total;
        state
            .fields
            .iter()
            .zip(w)
            .map(|(f, wi)| wi * (f[k] - centroid) * (f[k] - centroid))
            .sum()
    }))
}

/// Energy through the pairwise form `(1/2N) Σ_ij ∫ (y_i − y_j)² dx`.
pub fn energy_from_pairs(state: &EnsembleState, grid: &SpatialGrid) -> f64 {
    let n = state.n_agents();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += crate::control::pairwise_energy(state, grid, i, j);
        }
    }
    total / (2.0 * n as f64)
}

fn undirected_c1(graph: &CommGraph, alpha: f64) -> Result<f64, AnalysisError> {
    let b = graph.elementwise_power(1.0 / alpha)?;
    Ok((2.0 * lambda2(b.laplacian())?).powf(alpha))
}

fn undirected_c2(graph: &CommGraph, beta: f64) -> Result<f64, AnalysisError> {
    let p = graph.elementwise_power(1.0 / beta)?;
    Ok((2.0 * lambda2(p.laplacian())?).powf(beta))
}

fn directed_constant(
    graph: &CommGraph,
    omega: &BalanceWeights,
    exponent: f64,
) -> Result<f64, AnalysisError> {
    let scaled = graph.scale_rows(omega)?.elementwise_power(1.0 / exponent)?;
    let lw = lambda_omega(scaled.laplacian(), omega)?;
    Ok((2.0 / omega.max() * lw).powf(exponent))
}

fn fixed_time_tail(n_agents: usize, c: f64, beta: f64) -> f64 {
    let shrink = (n_agents as f64).powf(1.0 - beta);
    1.0 / (shrink * shrink * c * (beta - 1.0))
}

/// Finite-time bound on an undirected connected graph.
pub fn ftc_bound_undirected(
    graph: &CommGraph,
    alpha: f64,
    v0: f64,
) -> Result<BoundReport, AnalysisError> {
    require_undirected(graph)?;
    check_alpha(alpha)?;
    check_energy(v0)?;
    let c1 = undirected_c1(graph, alpha)?;
    let mut report = BoundReport::new(
        BoundCase::UndirectedFtc,
        v0.powf(1.0 - alpha) / (c1 * (1.0 - alpha)),
    );
    report.c1 = Some(c1);
    report.v0 = Some(v0);
    Ok(report)
}

/// Fixed-time bound on an undirected connected graph; no initial-state input.
pub fn fxc_bound_undirected(
    graph: &CommGraph,
    alpha: f64,
    beta: f64,
) -> Result<BoundReport, AnalysisError> {
    require_undirected(graph)?;
    check_alpha(alpha)?;
    check_beta(beta)?;
    let c1 = undirected_c1(graph, alpha)?;
    let c2 = undirected_c2(graph, beta)?;
    let t_max = 1.0 / (c1 * (1.0 - alpha)) + fixed_time_tail(graph.n_agents(), c2, beta);
    let mut report = BoundReport::new(BoundCase::UndirectedFxc, t_max);
    report.c1 = Some(c1);
    report.c2 = Some(c2);
    Ok(report)
}

/// Finite-time bound on a strongly connected, detail-balanced digraph.
pub fn ftc_bound_directed(
    graph: &CommGraph,
    omega: &BalanceWeights,
    alpha: f64,
    v0_weighted: f64,
) -> Result<BoundReport, AnalysisError> {
    require_balanced(graph, omega)?;
    check_alpha(alpha)?;
    check_energy(v0_weighted)?;
    let c3 = directed_constant(graph, omega, alpha)?;
    let mut report = BoundReport::new(
        BoundCase::DirectedFtc,
        v0_weighted.powf(1.0 - alpha) / (c3 * (1.0 - alpha)),
    );
    report.c3 = Some(c3);
    report.v0 = Some(v0_weighted);
    Ok(report)
}

/// Fixed-time bound on a strongly connected, detail-balanced digraph.
pub fn fxc_bound_directed(
    graph: &CommGraph,
    omega: &BalanceWeights,
    alpha: f64,
    beta: f64,
) -> Result<BoundReport, AnalysisError> {
    require_balanced(graph, omega)?;
    check_alpha(alpha)?;
    check_beta(beta)?;
    let c3 = directed_constant(graph, omega, alpha)?;
    let c4 = directed_constant(graph, omega, beta)?;
    let t_max = 1.0 / (c3 * (1.0 - alpha)) + fixed_time_tail(graph.n_agents(), c4, beta);
    let mut report = BoundReport::new(BoundCase::DirectedFxc, t_max);
    report.c3 = Some(c3);
    report.c4 = Some(c4);
    Ok(report)
}

/// Smallest sign-term gain the sufficient condition accepts:
/// `2·d_max·√N / (√2·√λ₂(𝓛(E)))` with `E = (a_ij²)`.
pub fn dbar_required(graph: &CommGraph, d_max: f64, n_agents: usize) -> Result<f64, AnalysisError> {
    require_undirected(graph)?;
    if d_max == 0.0 {
        return Ok(0.0);
    }
    let e = graph.elementwise_power(2.0)?;
    let l2 = lambda2(e.laplacian())?;
    Ok(2.0 * d_max * (n_agents as f64).sqrt() / (2f64.sqrt() * l2.sqrt()))
}

/// `max_{i<j} max_x |y_i(x) − y_j(x)|` over grid nodes.
pub fn max_pairwise_disagreement(state: &EnsembleState) -> f64 {
    let n = state.n_agents();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for (a, b) in state.field(i).iter().zip(state.field(j)) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

/// Earliest sample time after which the disagreement stays below
/// `threshold` through the last sample.
///
/// `samples` are `(time, disagreement)` pairs in increasing time order.
pub fn settling_time(
    samples: &[(f64, f64)],
    threshold: f64,
    bound_time: Option<f64>,
) -> SettlingReport {
    let t_settle = match samples
        .iter()
        .rposition(|(_, d)| d.is_nan() || *d >= threshold)
    {
        None => samples.first().map(|(t, _)| *t),
        Some(last) => samples.get(last + 1).map(|(t, _)| *t),
    };
    let residual_at_bound =
        bound_time.and_then(|tb| samples.iter().find(|(t, _)| *t >= tb).map(|(_, d)| *d));
    SettlingReport {
        threshold,
        settled: t_settle.is_some(),
        t_settle,
        residual_at_bound,
    }
}

/// `((Σx)^α, Σx^α, n^(1−α)(Σx)^α)`; non-decreasing for `0 < α < 1`, `x ≥ 0`.
pub fn alpha_power_chain(xs: &[f64], alpha: f64) -> (f64, f64, f64) {
    let sum: f64 = xs.iter().sum();
    let lower = sum.powf(alpha);
    let middle = xs.iter().map(|x| x.powf(alpha)).sum();
    let upper = (xs.len() as f64).powf(1.0 - alpha) * lower;
    (lower, middle, upper)
}

/// `(Σx^β, (Σx)^β, n^(β−1)Σx^β)`; non-decreasing for `β > 1`, `x ≥ 0`.
pub fn beta_power_chain(xs: &[f64], beta: f64) -> (f64, f64, f64) {
    let lower: f64 = xs.iter().map(|x| x.powf(beta)).sum();
    let middle = xs.iter().sum::<f64>().powf(beta);
    let upper = (xs.len() as f64).powf(beta - 1.0) * lower;
    (lower, middle, upper)
}

/// `(∫φ², (4L²/π²)·∫φ_s²)` with `φ_s` the forward difference; the first is
/// bounded by the second for profiles vanishing at an endpoint.
pub fn wirtinger_sides(field: &[f64], grid: &SpatialGrid) -> (f64, f64) {
    let dx = grid.dx();
    let lhs = trapezoid_by(field.len(), dx, |k| field[k] * field[k]);
    let grad: f64 = field
        .windows(2)
        .map(|w| {
            let s = (w[1] - w[0]) / dx;
            s * s
        })
        .sum::<f64>()
        * dx;
    let l = grid.length();
    (lhs, 4.0 * l * l / (std::f64::consts::PI.powi(2)) * grad)
}
