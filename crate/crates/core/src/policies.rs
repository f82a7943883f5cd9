//! Arm-selection rules on top of the cooperative estimator.
//!
//! All three rules pick the arm with the largest index `Q_i^k(t)`:
//!
//! - coop-UCB: `Q = mean + sigma_s * sqrt(2 gamma ((n + eps_c^k)/(M n)) ln(t)/n)`,
//!   where `n` is the agent's per-unit-agent count estimate for the arm and
//!   `eps_c^k` the agent's explore-exploit centrality (global graph
//!   knowledge required).
//! - coop-UCB2: the same bonus with `eps_c^k` replaced by a sublogarithmic
//!   schedule `f(t)`; only the agent count `M` is needed.
//! - coop-UCL: `Q = posterior mean + posterior sd * sqrt((n + f(t))/n) *
//!   PhiInv(1 - 1/t^gamma)`, the upper credible limit of the cooperative
//!   Gaussian posterior. The credible level is never materialized; the
//!   defining identity is substituted directly.
//!
//! Running coop-UCB2 on a one-node graph is the single-agent baseline.
//! Unexplored arms short-circuit to `+inf` so they are selected before any
//! finite index: exact forced exploration without magic constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{NetworkEstimationState, UNEXPLORED_TOLERANCE};
use crate::numerics::{eig_sym, inv_norm_cdf, Mat};

/// Which decision rule an episode runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    CoopUcb,
    CoopUcb2,
    CoopUcl,
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PolicyKind::CoopUcb => "coop-ucb",
            PolicyKind::CoopUcb2 => "coop-ucb2",
            PolicyKind::CoopUcl => "coop-ucl",
        };
        write!(f, "{name}")
    }
}

/// Sublogarithmic exploration schedule `f(t)`: nondecreasing, `f(1) = 0`,
/// and `f(t)/ln(t) -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `f(t) = sqrt(ln t)`, the reference choice.
    #[default]
    SqrtLog,
    /// `f(t) = 0`, which collapses coop-UCL to the plain credible-limit rule.
    Zero,
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::SqrtLog => t.ln().max(0.0).sqrt(),
            Schedule::Zero => 0.0,
        }
    }

    /// Inverse on `[0, inf)`. For the zero schedule only `y = 0` has a
    /// finite preimage.
    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Schedule::SqrtLog => (y * y).exp(),
            Schedule::Zero => {
                if y <= 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Schedule::SqrtLog => write!(f, "sqrt-log"),
            Schedule::Zero => write!(f, "zero"),
        }
    }
}

/// Round after which the schedule `f(t)` dominates a node's centrality
/// penalty: the preimage of `epsilon_c^k` under `f`.
pub fn t_dagger(epsilon_c_k: f64, schedule: Schedule) -> f64 {
    schedule.inverse(epsilon_c_k)
}

/// Parameters shared by every policy evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Exploration exponent, strictly greater than 1.
    pub gamma: f64,
    #[serde(default)]
    pub schedule: Schedule,
    /// Known reward standard deviation.
    pub sigma_s: f64,
    /// Number of agents in the network.
    pub agents: usize,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, gamma: f64, sigma_s: f64, agents: usize) -> Result<Self> {
        let config = Self {
            kind,
            gamma,
            schedule: Schedule::SqrtLog,
            sigma_s,
            agents,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must exceed 1, got {}",
                self.gamma
            )));
        }
        if !(self.sigma_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_s must be positive, got {}",
                self.sigma_s
            )));
        }
        if self.agents == 0 {
            return Err(Error::InvalidParameter("agent count must be >= 1".into()));
        }
        Ok(())
    }
}

/// coop-UCB exploration bonus for one (agent, arm) pair at round `t`.
/// Unexplored arms return `+inf`.
pub fn coop_ucb_bonus(
    state: &NetworkEstimationState,
    agent: usize,
    arm: usize,
    t: f64,
    config: &PolicyConfig,
    epsilon_c_k: f64,
) -> f64 {
    let n = state.count_estimate(agent, arm);
    if n <= UNEXPLORED_TOLERANCE {
        return f64::INFINITY;
    }
    let m = config.agents as f64;
    config.sigma_s * (2.0 * config.gamma * ((n + epsilon_c_k) / (m * n)) * t.ln() / n).sqrt()
}

/// coop-UCB2 exploration bonus: centrality replaced by the schedule, so only
/// the agent count enters.
pub fn coop_ucb2_bonus(
    state: &NetworkEstimationState,
    agent: usize,
    arm: usize,
    t: f64,
    config: &PolicyConfig,
) -> f64 {
    let n = state.count_estimate(agent, arm);
    if n <= UNEXPLORED_TOLERANCE {
        return f64::INFINITY;
    }
    let m = config.agents as f64;
    let f_t = config.schedule.value(t);
    config.sigma_s * (2.0 * config.gamma * ((n + f_t) / (m * n)) * t.ln() / n).sqrt()
}

/// Index of the largest q-value; ties break toward the smallest arm index
/// so runs are reproducible.
pub fn select_arm(q_values: &[f64]) -> Result<usize> {
    if q_values.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut best = 0;
    for (i, &q) in q_values.iter().enumerate().skip(1) {
        if q > q_values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Multivariate Gaussian prior over the arm means, stored as the precision
/// `Lambda_0 = Sigma_0^{-1}`. The uninformative prior has zero precision.
#[derive(Debug, Clone)]
pub struct BayesianPrior {
    nu0: Vec<f64>,
    lambda0: Mat,
}

impl BayesianPrior {
    /// Zero prior precision: the posterior mean collapses to the empirical
    /// estimate.
    pub fn uninformative(arms: usize) -> Self {
        Self {
            nu0: vec![0.0; arms],
            lambda0: Mat::zeros(arms, arms),
        }
    }

    /// Prior with mean `nu0` and covariance `sigma0` (symmetric positive
    /// definite).
    pub fn from_covariance(nu0: Vec<f64>, sigma0: &Mat) -> Result<Self> {
        if sigma0.rows() != nu0.len() || !sigma0.is_square() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0} covariance", nu0.len()),
                actual: format!("{}x{}", sigma0.rows(), sigma0.cols()),
            });
        }
        let lambda0 = sigma0.spd_inverse().map_err(|_| {
            Error::InvalidParameter("prior covariance is not positive definite".into())
        })?;
        Self::from_precision(nu0, lambda0)
    }

    /// Prior specified directly by its precision matrix; must be symmetric
    /// positive semidefinite within 1e-10.
    pub fn from_precision(nu0: Vec<f64>, lambda0: Mat) -> Result<Self> {
        if lambda0.rows() != nu0.len() || !lambda0.is_square() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0} precision", nu0.len()),
                actual: format!("{}x{}", lambda0.rows(), lambda0.cols()),
            });
        }
        let (_, _, asym) = lambda0.max_asymmetry();
        if asym > 1e-10 {
            return Err(Error::InvalidParameter(
                "prior precision must be symmetric".into(),
            ));
        }
        if lambda0.max_abs() > 0.0 {
            let spectrum = eig_sym(&lambda0)?;
            let min = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
            if min < -1e-10 * lambda0.max_abs().max(1.0) {
                return Err(Error::InvalidParameter(
                    "prior precision must be positive semidefinite".into(),
                ));
            }
        }
        Ok(Self { nu0, lambda0 })
    }

    /// Independent identical prior on every arm: mean `mean`, variance
    /// `variance` (e.g. mean 75, variance 625 in the reference experiments).
    pub fn scaled_identity(arms: usize, mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "prior variance must be positive, got {variance}"
            )));
        }
        let lambda0 = Mat::from_fn(arms, arms, |r, c| if r == c { 1.0 / variance } else { 0.0 });
        Ok(Self {
            nu0: vec![mean; arms],
            lambda0,
        })
    }

    pub fn arms(&self) -> usize {
        self.nu0.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.nu0
    }

    pub fn precision(&self) -> &Mat {
        &self.lambda0
    }

    pub fn is_uninformative(&self) -> bool {
        self.lambda0.max_abs() == 0.0
    }
}

/// Gaussian posterior over arm means: mean vector, precision, covariance,
/// and per-arm standard deviations.
#[derive(Debug, Clone)]
pub struct BayesianPosterior {
    pub nu: Vec<f64>,
    pub lambda: Mat,
    pub sigma: Mat,
    /// `sqrt(Sigma_ii)` per arm.
    pub sigma_diag: Vec<f64>,
}

/// Shared conjugate update: observation precisions enter as a diagonal added
/// to the prior precision.
///
/// `means[i]` is ignored whenever `precisions[i]` is zero (infinite-variance
/// observations carry no information), so unexplored arms may pass any
/// placeholder.
fn posterior_from_precisions(
    means: &[f64],
    precisions: &[f64],
    prior: &BayesianPrior,
) -> Result<BayesianPosterior> {
    let arms = prior.arms();
    if means.len() != arms || precisions.len() != arms {
        return Err(Error::DimensionMismatch {
            expected: format!("{arms} means and precisions"),
            actual: format!("{} and {}", means.len(), precisions.len()),
        });
    }
    let mut lambda = prior.lambda0.clone();
    for i in 0..arms {
        if !(precisions[i] >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "negative observation precision for arm {i}"
            )));
        }
        lambda[(i, i)] += precisions[i];
    }
    let sigma = lambda.spd_inverse()?;
    let mut information = prior.lambda0.matvec(&prior.nu0);
    for i in 0..arms {
        if precisions[i] > 0.0 {
            information[i] += precisions[i] * means[i];
        }
    }
    let nu = sigma.matvec(&information);
    let sigma_diag = (0..arms).map(|i| sigma[(i, i)].max(0.0).sqrt()).collect();
    Ok(BayesianPosterior {
        nu,
        lambda,
        sigma,
        sigma_diag,
    })
}

/// Single-agent batch posterior from empirical means and pull counts.
/// Arms with zero count contribute zero precision. Fails with
/// "no information" when the combined precision is singular (for instance
/// every arm unexplored under the uninformative prior).
pub fn ucl_posterior_batch(
    means: &[f64],
    counts: &[f64],
    prior: &BayesianPrior,
    sigma_s: f64,
) -> Result<BayesianPosterior> {
    if !(sigma_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_s must be positive, got {sigma_s}"
        )));
    }
    let precisions: Vec<f64> = counts
        .iter()
        .map(|&n| {
            if n > UNEXPLORED_TOLERANCE {
                n / (sigma_s * sigma_s)
            } else {
                0.0
            }
        })
        .collect();
    posterior_from_precisions(means, &precisions, prior)
}

/// Cooperative approximate posterior for one agent: the batch update with
/// the agent's consensus estimates, observation precisions
/// `M * count_estimate / sigma_s^2`.
pub fn coop_ucl_posterior(
    state: &NetworkEstimationState,
    agent: usize,
    prior: &BayesianPrior,
    sigma_s: f64,
) -> Result<BayesianPosterior> {
    if !(sigma_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_s must be positive, got {sigma_s}"
        )));
    }
    let arms = state.arms();
    if prior.arms() != arms {
        return Err(Error::DimensionMismatch {
            expected: format!("prior over {arms} arms"),
            actual: format!("{}", prior.arms()),
        });
    }
    let m = state.agents() as f64;
    let mut means = vec![0.0; arms];
    let mut precisions = vec![0.0; arms];
    for i in 0..arms {
        if let Some(mean) = state.empirical_mean(agent, i) {
            means[i] = mean;
            precisions[i] = m * state.count_estimate(agent, i) / (sigma_s * sigma_s);
        }
    }
    posterior_from_precisions(&means, &precisions, prior)
}

/// coop-UCL decision index for one (agent, arm) pair at round `t >= 2`:
/// the posterior mean plus the posterior deviation stretched by
/// `sqrt((n + f(t))/n)` at the `1 - 1/t^gamma` normal quantile.
pub fn coop_ucl_q(
    posterior: &BayesianPosterior,
    state: &NetworkEstimationState,
    agent: usize,
    arm: usize,
    t: f64,
    config: &PolicyConfig,
) -> f64 {
    assert!(t >= 2.0, "credible-limit rule fires from round 2 onward");
    let n = state.count_estimate(agent, arm);
    if n <= UNEXPLORED_TOLERANCE {
        return f64::INFINITY;
    }
    let alpha = t.powf(-config.gamma);
    // PhiInv(1 - alpha) = -PhiInv(alpha); the complement form keeps full
    // precision when alpha underflows the spacing at 1.
    let quantile = -inv_norm_cdf(alpha).expect("alpha in (0, 0.5) for t >= 2, gamma > 1");
    let stretch = ((n + config.schedule.value(t)) / n).sqrt();
    posterior.nu[arm] + posterior.sigma_diag[arm] * stretch * quantile
}
