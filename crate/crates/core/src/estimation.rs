//! Running-consensus cooperative estimation of selection counts and reward
//! sums.
//!
//! Each agent tracks, for every arm, an estimate of the per-unit-agent
//! selection count and reward sum. One round of the recursion mixes the
//! previous estimates plus the round's new observations through the
//! consensus matrix:
//!
//! ```text
//! counts(t+1)  = P * (counts(t)  + selections(t))
//! rewards(t+1) = P * (rewards(t) + reward_matrix(t))
//! ```
//!
//! Because `P` is doubly stochastic, the column mass is conserved: summing
//! any arm's estimates over agents always yields the true total pull count
//! for that arm. The per-agent deviation from the centralized average is
//! bounded by the graph's `epsilon_n`.

use crate::error::{Error, Result};
use crate::numerics::Mat;

/// Estimates below this count are treated as "arm never observed".
pub const UNEXPLORED_TOLERANCE: f64 = 1e-12;

/// Per-agent running-consensus estimates. `agents x arms` matrices; row `k`
/// belongs to agent `k`. A state belongs to exactly one simulation episode.
#[derive(Debug, Clone)]
pub struct NetworkEstimationState {
    round: u64,
    counts: Mat,
    rewards: Mat,
}

impl NetworkEstimationState {
    /// Fresh state at round 0 with empty history.
    pub fn new(agents: usize, arms: usize) -> Self {
        Self {
            round: 0,
            counts: Mat::zeros(agents, arms),
            rewards: Mat::zeros(agents, arms),
        }
    }

    pub fn agents(&self) -> usize {
        self.counts.rows()
    }

    pub fn arms(&self) -> usize {
        self.counts.cols()
    }

    /// Number of consensus rounds applied so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Agent `k`'s per-unit-agent count estimate for `arm`.
    pub fn count_estimate(&self, agent: usize, arm: usize) -> f64 {
        self.counts[(agent, arm)]
    }

    /// Agent `k`'s per-unit-agent reward-sum estimate for `arm`.
    pub fn reward_estimate(&self, agent: usize, arm: usize) -> f64 {
        self.rewards[(agent, arm)]
    }

    /// Estimated empirical mean reward of `arm` as seen by `agent`:
    /// reward estimate over count estimate. `None` while the arm is
    /// unexplored from this agent's perspective; callers treat that as
    /// forced exploration.
    pub fn empirical_mean(&self, agent: usize, arm: usize) -> Option<f64> {
        let count = self.counts[(agent, arm)];
        if count <= UNEXPLORED_TOLERANCE {
            None
        } else {
            Some(self.rewards[(agent, arm)] / count)
        }
    }

    /// Apply one consensus round.
    ///
    /// `selections` is the 0/1 agents x arms indicator of this round's pulls
    /// (exactly one per row); `reward_matrix` carries each pull's reward in
    /// the matching cell and zero elsewhere.
    pub fn consensus_step(&mut self, selections: &Mat, reward_matrix: &Mat, p: &Mat) -> Result<()> {
        let (m, n) = (self.agents(), self.arms());
        for (name, mat, rows, cols) in [
            ("selections", selections, m, n),
            ("reward matrix", reward_matrix, m, n),
            ("consensus matrix", p, m, m),
        ] {
            if mat.rows() != rows || mat.cols() != cols {
                return Err(Error::DimensionMismatch {
                    expected: format!("{name} of {rows}x{cols}"),
                    actual: format!("{}x{}", mat.rows(), mat.cols()),
                });
            }
        }
        #[cfg(debug_assertions)]
        validate_round_inputs(selections, reward_matrix);

        // Mass conservation: P is doubly stochastic to machine precision, so
        // each arm's estimate column keeps summing to its true pull total.
        // Asserted per step in debug runs with tolerance scaled by the round
        // count; no renormalization is applied.
        #[cfg(debug_assertions)]
        let pre_mass: Vec<f64> = (0..n)
            .map(|arm| {
                (0..m)
                    .map(|k| self.counts[(k, arm)] + selections[(k, arm)])
                    .sum()
            })
            .collect();

        self.counts = p.mul(&self.counts.add(selections));
        self.rewards = p.mul(&self.rewards.add(reward_matrix));
        self.round += 1;

        #[cfg(debug_assertions)]
        {
            let tolerance = 1e-9 * (self.round as f64).max(1.0);
            for arm in 0..n {
                let mass: f64 = (0..m).map(|k| self.counts[(k, arm)]).sum();
                debug_assert!(
                    (mass - pre_mass[arm]).abs() <= tolerance,
                    "column mass drifted for arm {arm}: {mass} vs {}",
                    pre_mass[arm]
                );
            }
        }
        Ok(())
    }
}

#[cfg(debug_assertions)]
fn validate_round_inputs(selections: &Mat, reward_matrix: &Mat) {
    for k in 0..selections.rows() {
        let mut pulls = 0usize;
        for i in 0..selections.cols() {
            let s = selections[(k, i)];
            debug_assert!(s == 0.0 || s == 1.0, "selection entries must be 0 or 1");
            if s == 1.0 {
                pulls += 1;
            } else {
                debug_assert!(
                    reward_matrix[(k, i)] == 0.0,
                    "reward present without a matching pull"
                );
            }
        }
        debug_assert!(pulls == 1, "agent {k} must pull exactly one arm per round");
    }
}

/// Centralized reference quantities: per-unit-agent pull counts and reward
/// sums as a fusion center would tally them.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedReference {
    pub counts: Vec<f64>,
    pub rewards: Vec<f64>,
}

impl CentralizedReference {
    /// Recompute from a full selection/reward history.
    pub fn from_history(selections: &[Mat], rewards: &[Mat]) -> Result<Self> {
        if selections.len() != rewards.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} reward rounds", selections.len()),
                actual: format!("{}", rewards.len()),
            });
        }
        let (agents, arms) = match selections.first() {
            Some(first) => (first.rows(), first.cols()),
            None => {
                return Ok(Self {
                    counts: Vec::new(),
                    rewards: Vec::new(),
                })
            }
        };
        let mut counts = vec![0.0; arms];
        let mut reward_sums = vec![0.0; arms];
        for (xi, r) in selections.iter().zip(rewards) {
            for i in 0..arms {
                for k in 0..agents {
                    counts[i] += xi[(k, i)];
                    reward_sums[i] += r[(k, i)];
                }
            }
        }
        let m = agents as f64;
        for value in counts.iter_mut().chain(reward_sums.iter_mut()) {
            *value /= m;
        }
        Ok(Self {
            counts,
            rewards: reward_sums,
        })
    }
}

/// Build the one-hot selection matrix and the matching reward matrix for a
/// round from per-agent choices.
pub fn round_matrices(arms: usize, choices: &[usize], rewards: &[f64]) -> (Mat, Mat) {
    assert_eq!(choices.len(), rewards.len());
    let agents = choices.len();
    let mut xi = Mat::zeros(agents, arms);
    let mut r = Mat::zeros(agents, arms);
    for (k, (&arm, &reward)) in choices.iter().zip(rewards).enumerate() {
        xi[(k, arm)] = 1.0;
        r[(k, arm)] = reward;
    }
    (xi, r)
}
