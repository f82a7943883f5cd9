//! Distributed cooperative multi-armed bandit algorithms over communication
//! graphs.
//!
//! A group of `M` agents repeatedly pulls arms of a shared `N`-armed Gaussian
//! bandit. Agents never exchange raw rewards; instead each agent runs two
//! running-consensus recursions that track the per-unit-agent selection counts
//! and reward sums for every arm, mixed through a doubly stochastic matrix
//! `P = I - (kappa/d_max) L` built from the communication graph Laplacian.
//!
//! On top of the estimator sit three cooperative decision rules:
//!
//! - `coop-UCB`: a UCB-style index whose exploration bonus is inflated by the
//!   agent's explore-exploit centrality `epsilon_c^k` (requires global graph
//!   knowledge),
//! - `coop-UCB2`: the same index with the centrality replaced by a
//!   sublogarithmic schedule `f(t)` (requires only the agent count `M`),
//! - `coop-UCL`: a Bayesian upper-credible-limit rule driven by the
//!   cooperative posterior, supporting informative Gaussian priors.
//!
//! The [`graph`] module computes the spectral quantities that govern
//! performance: the network-wide count deviation bound `epsilon_n` and the
//! per-node centrality `epsilon_c^k`. The [`simulation`] module provides the
//! Gaussian environment, the episode runner, a seeded parallel Monte Carlo
//! harness, and evaluators for the group regret bound formulas.

pub mod error;
pub mod estimation;
pub mod graph;
pub mod numerics;
pub mod policies;
pub mod report;
pub mod simulation;

pub use error::{Error, Result};
pub use estimation::{CentralizedReference, NetworkEstimationState};
pub use graph::{ConsensusModel, Graph, GraphMetrics};
pub use numerics::{eig_sym, gaussian_sample, inv_norm_cdf, Mat, RandomStream, SymmetricSpectrum};
pub use policies::{BayesianPosterior, BayesianPrior, PolicyConfig, PolicyKind, Schedule};
pub use simulation::{
    fusion_center_lower_bound, monte_carlo, run_episode, theorem1_bound, theorem2_bound,
    AggregateResult, BanditEnvironment, EnvSpec, MonteCarloSpec, RegretTrace,
};
