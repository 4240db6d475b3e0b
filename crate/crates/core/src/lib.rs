//! Consensus of multi-agent systems whose agents are scalar parabolic PDEs on
//! a common interval, driven by finite-time and fixed-time distributed
//! protocols.
//!
//! The crate is organised bottom-up: [`graph`] holds communication topology
//! and its spectral quantities, [`pde`] the spatial grid and the explicit
//! integrator, [`control`] the protocols, [`analysis`] energies, settling-time
//! bounds and measured settling, [`scenario`] the TOML experiment format and
//! built-ins, [`sim`] the run loop and sweeps, and [`output`] the CSV and
//! summary writers.
//!
//! ```
//! use pde_consensus::{builtin, simulate};
//!
//! let mut scenario = builtin("example1_ftc").unwrap();
//! scenario.dynamics.t_end = 0.05;
//! let result = simulate(&scenario.validate().unwrap()).unwrap();
//! assert!((result.bound.unwrap().t_star_bound - 7.746).abs() < 1e-3);
//! ```

pub mod analysis;
pub mod control;
pub mod graph;
pub mod output;
pub mod pde;
pub mod scenario;
pub mod sim;

pub use analysis::{BoundCase, BoundReport, SettlingReport};
pub use control::{ControllerKind, ControllerSpec, DisturbanceModel};
pub use graph::{lambda2, lambda_omega, BalanceWeights, CommGraph, GraphError, LaplacianMatrix};
pub use pde::{EnsembleState, InitialProfile, SpatialGrid};
pub use scenario::{
    builtin, load_scenario, read_scenario, Experiment, Overrides, Scenario, ScenarioError,
    BUILTIN_NAMES,
};
pub use sim::{bound_for, simulate, sweep, RunResult, SimFailure, SweepAxis, SweepParam};
