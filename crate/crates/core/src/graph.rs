//! Communication graphs and the spectral quantities that drive the
//! terminal-time bounds.
//!
//! A graph is a dense, non-negative adjacency matrix `a_ij` where `a_ij > 0`
//! means agent `i` receives information from agent `j`. The Laplacian has
//! `l_ii = Σ_j a_ij` and `l_ij = -a_ij`.
//!
//! Two constrained spectral minima are exposed:
//!
//! ```text
//! λ₂(L)  = min { xᵀLx / xᵀx : x ≠ 0, ⟨x, 1⟩ = 0 }
//! λ_ω(L) = min { xᵀLx / xᵀx : x ≠ 0, ⟨x, ω⟩ = 0 }
//! ```
//!
//! Both are only defined here for symmetric `L`; an asymmetric argument is an
//! error rather than being silently symmetrized.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

/// Relative tolerance for `ω_i a_ij = ω_j a_ji`.
pub const BALANCE_TOLERANCE: f64 = 1e-9;
/// Scale-relative tolerance for Laplacian symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("adjacency must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("graph needs at least 2 agents, got {0}")]
    TooFewAgents(usize),

    #[error("adjacency entry ({i},{j}) = {value} must be finite and non-negative")]
    InvalidWeight { i: usize, j: usize, value: f64 },

    #[error("adjacency diagonal entry ({0},{0}) must be zero")]
    NonZeroDiagonal(usize),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("graph is not detail-balanced: {0}")]
    NotDetailBalanced(String),

    #[error("invalid balance weights: {0}")]
    InvalidWeights(String),

    #[error("exponent must be positive and finite, got {0}")]
    BadExponent(f64),
}

/// Weighted communication graph with its Laplacian and connectivity flags
/// computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    adjacency: DMatrix<f64>,
    laplacian: LaplacianMatrix,
    undirected_connected: bool,
    strongly_connected: bool,
}

impl CommGraph {
    pub fn new(adjacency: DMatrix<f64>) -> Result<Self, GraphError> {
        let (rows, cols) = adjacency.shape();
        if rows != cols {
            return Err(GraphError::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(GraphError::TooFewAgents(rows));
        }
        for i in 0..rows {
            for j in 0..cols {
                let value = adjacency[(i, j)];
                if !value.is_finite() || value < 0.0 {
                    return Err(GraphError::InvalidWeight { i, j, value });
                }
            }
            if adjacency[(i, i)] != 0.0 {
                return Err(GraphError::NonZeroDiagonal(i));
            }
        }

        let laplacian = LaplacianMatrix::from_adjacency(&adjacency);
        let forward = reaches_all(&adjacency, false);
        let strongly_connected = forward && reaches_all(&adjacency, true);
        let undirected_connected = forward && max_asymmetry(&adjacency) == 0.0;

        Ok(Self {
            adjacency,
            laplacian,
            undirected_connected,
            strongly_connected,
        })
    }

    /// Builds a graph from row-major nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GraphError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(GraphError::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n_agents(&self) -> usize {
        self.adjacency.nrows()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.adjacency
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn laplacian(&self) -> &LaplacianMatrix {
        &self.laplacian
    }

    /// Exactly symmetric adjacency and every node reachable from node 0.
    pub fn is_undirected_connected(&self) -> bool {
        self.undirected_connected
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.strongly_connected
    }

    pub fn is_symmetric(&self) -> bool {
        max_asymmetry(&self.adjacency) == 0.0
    }

    /// Largest weighted in-degree `max_i Σ_j a_ij`.
    pub fn max_degree(&self) -> f64 {
        self.adjacency
            .row_iter()
            .map(|r| r.sum())
            .fold(0.0, f64::max)
    }

    /// Entry-wise power `a_ij^p` on the support, zero elsewhere.
    pub fn elementwise_power(&self, exponent: f64) -> Result<CommGraph, GraphError> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(GraphError::BadExponent(exponent));
        }
        let powered = self
            .adjacency
            .map(|a| if a > 0.0 { a.powf(exponent) } else { 0.0 });
        CommGraph::new(powered)
    }

    /// Row-scaled adjacency `(ω_i a_ij)`. Symmetric when `ω` balances the graph.
    pub fn scale_rows(&self, omega: &BalanceWeights) -> Result<CommGraph, GraphError> {
        let n = self.n_agents();
        if omega.len() != n {
            return Err(GraphError::InvalidWeights(format!(
                "expected {n} weights, got {}",
                omega.len()
            )));
        }
        let w = omega.as_slice();
        CommGraph::new(DMatrix::from_fn(n, n, |i, j| w[i] * self.adjacency[(i, j)]))
    }

    /// Derives detail-balance weights normalized to `ω_1 = 1`.
    ///
    /// Weights are propagated along a breadth-first spanning tree rooted at
    /// node 0 (children visited in index order) over the edges present in both
    /// directions, then every edge is checked for `ω_i a_ij = ω_j a_ji`.
    pub fn detail_balance_weights(&self) -> Result<BalanceWeights, GraphError> {
        if !self.strongly_connected {
            return Err(GraphError::NotStronglyConnected);
        }
        let n = self.n_agents();
        let a = &self.adjacency;
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] > 0.0 && a[(j, i)] == 0.0 {
                    return Err(GraphError::NotDetailBalanced(format!(
                        "edge ({}, {}) has no reverse edge",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }

        let mut omega = vec![0.0; n];
        let mut visited = vec![false; n];
        omega[0] = 1.0;
        visited[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !visited[j] && a[(i, j)].min(a[(j, i)]) > 0.0 {
                    omega[j] = omega[i] * a[(i, j)] / a[(j, i)];
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if let Some(j) = visited.iter().position(|v| !v) {
            return Err(GraphError::NotDetailBalanced(format!(
                "node {} unreachable through bidirectional edges",
                j + 1
            )));
        }

        let weights = BalanceWeights::new(omega)?;
        self.check_balance(&weights)?;
        Ok(weights)
    }

    /// Verifies `ω_i a_ij = ω_j a_ji` on every pair within [`BALANCE_TOLERANCE`].
    pub fn check_balance(&self, omega: &BalanceWeights) -> Result<(), GraphError> {
        let n = self.n_agents();
        if omega.len() != n {
            return Err(GraphError::InvalidWeights(format!(
                "expected {n} weights, got {}",
                omega.len()
            )));
        }
        let w = omega.as_slice();
        for i in 0..n {
            for j in (i + 1)..n {
                let forward = w[i] * self.adjacency[(i, j)];
                let backward = w[j] * self.adjacency[(j, i)];
                let scale = forward.abs().max(backward.abs());
                if (forward - backward).abs() > BALANCE_TOLERANCE * scale {
                    return Err(GraphError::NotDetailBalanced(format!(
                        "ω_{i1}·a_{i1}{j1} = {forward} but ω_{j1}·a_{j1}{i1} = {backward}",
                        i1 = i + 1,
                        j1 = j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// `½ Σ_ij a_ij (ζ_j − ζ_i)²`, the disagreement form of `ζᵀLζ`.
    pub fn disagreement_sum(&self, zeta: &[f64]) -> f64 {
        let n = self.n_agents();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = zeta[j] - zeta[i];
                total += self.adjacency[(i, j)] * d * d;
            }
        }
        0.5 * total
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Breadth-first reachability from node 0 along `a_ij > 0` (or the reversed
/// edges when `reversed`).
fn reaches_all(a: &DMatrix<f64>, reversed: bool) -> bool {
    let n = a.nrows();
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            let w = if reversed { a[(j, i)] } else { a[(i, j)] };
            if w > 0.0 && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Graph Laplacian `L = diag(A·1) − A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: DMatrix<f64>,
}

impl LaplacianMatrix {
    fn from_adjacency(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if j != i {
                    entries[(i, j)] = -a[(i, j)];
                    diag -= entries[(i, j)];
                }
            }
            entries[(i, i)] = diag;
        }
        Self { entries }
    }

    /// Wraps an arbitrary square matrix, e.g. for testing the eigen routines.
    pub fn from_matrix(entries: DMatrix<f64>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn quadratic_form(&self, zeta: &[f64]) -> f64 {
        let z = DVector::from_column_slice(zeta);
        z.dot(&(&self.entries * &z))
    }

    /// Rayleigh quotient `xᵀLx / xᵀx`.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        self.quadratic_form(x) / norm2
    }

    pub fn ensure_symmetric(&self) -> Result<(), GraphError> {
        let scale = self.entries.amax();
        let asymmetry = max_asymmetry(&self.entries);
        if asymmetry > SYMMETRY_TOLERANCE * scale {
            return Err(GraphError::NotSymmetric { asymmetry });
        }
        Ok(())
    }

    fn symmetrized(&self) -> DMatrix<f64> {
        // Only used after ensure_symmetric; removes sub-tolerance round-off.
        (&self.entries + self.entries.transpose()) * 0.5
    }
}

/// Positive detail-balance weights, normalized so `ω_1 = 1` when derived.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceWeights {
    omega: Vec<f64>,
}

impl BalanceWeights {
    pub fn new(omega: Vec<f64>) -> Result<Self, GraphError> {
        if let Some((i, w)) = omega
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(GraphError::InvalidWeights(format!(
                "ω_{} = {w} must be positive",
                i + 1
            )));
        }
        Ok(Self { omega })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            omega: vec![1.0; n],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.omega.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.omega.iter().sum()
    }
}

fn smallest_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Algebraic connectivity: second-smallest eigenvalue of a symmetric Laplacian.
pub fn lambda2(lap: &LaplacianMatrix) -> Result<f64, GraphError> {
    lap.ensure_symmetric()?;
    let values = smallest_eigenvalues(lap.symmetrized());
    Ok(values[1].max(0.0))
}

/// Orthonormal basis (as columns) of the complement of `v`, taken from the
/// Householder reflector that maps `v` onto a multiple of `e_1`.
pub fn complement_basis(v: &[f64]) -> DMatrix<f64> {
    let n = v.len();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut u: Vec<f64> = v.iter().map(|x| x / norm).collect();
    // Sign choice avoids cancellation in u_1.
    u[0] += if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let u = DVector::from_vec(u);
    let reflector = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / u.norm_squared());
    reflector.columns(1, n - 1).into_owned()
}

/// Minimum Rayleigh quotient of a symmetric Laplacian over `⟨x, ω⟩ = 0`,
/// from the eigenproblem restricted to the complement of `ω`.
pub fn lambda_omega(lap: &LaplacianMatrix, omega: &BalanceWeights) -> Result<f64, GraphError> {
    lap.ensure_symmetric()?;
    if omega.len() != lap.dim() {
        return Err(GraphError::InvalidWeights(format!(
            "expected {} weights, got {}",
            lap.dim(),
            omega.len()
        )));
    }
    // BalanceWeights::new already rejects non-positive entries; re-check for
    // values built through other paths.
    BalanceWeights::new(omega.as_slice().to_vec())?;
    let basis = complement_basis(omega.as_slice());
    let restricted = basis.transpose() * lap.symmetrized() * &basis;
    let restricted = (&restricted + restricted.transpose()) * 0.5;
    Ok(smallest_eigenvalues(restricted)[0].max(0.0))
}
