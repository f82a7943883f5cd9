//! Gaussian bandit environment, episode runner, Monte Carlo aggregation, and
//! evaluators for the group regret bound formulas.
//!
//! An episode runs `T` simultaneous-move rounds: every agent selects an arm
//! from its own estimates, rewards are drawn, and one consensus step is
//! applied, so rewards from round `t` enter the estimates available at
//! `t + 1`. Rounds `1..=N` are the forced initialization sweep (every agent
//! samples each arm once) and are counted in regret.
//!
//! Monte Carlo runs are embarrassingly parallel. Run `r` draws all of its
//! randomness from seed `base + r`; runs are accumulated in fixed batches and
//! the batches reduced in index order, so results are independent of thread
//! scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{round_matrices, NetworkEstimationState};
use crate::graph::ConsensusModel;
use crate::numerics::{gaussian_sample, RandomStream};
use crate::policies::{
    coop_ucb2_bonus, coop_ucb_bonus, coop_ucl_posterior, coop_ucl_q, select_arm, t_dagger,
    BayesianPrior, PolicyConfig, PolicyKind, Schedule,
};

/// Substream carrying the per-run environment draw, shared by every episode
/// variant run against the same base seed.
pub const ENV_SUBSTREAM: u64 = 0;

/// Default substream for episode randomness (selections' rewards).
pub const EPISODE_SUBSTREAM: u64 = 1;

/// Runs per parallel work item; fixed so the reduction order never depends
/// on thread scheduling.
const RUN_BATCH: usize = 16;

/// Stationary Gaussian bandit: arm `i` pays `Normal(means[i], sigma_s^2)`.
#[derive(Debug, Clone)]
pub struct BanditEnvironment {
    means: Vec<f64>,
    sigma_s: f64,
    best_arm: usize,
    gaps: Vec<f64>,
}

impl BanditEnvironment {
    pub fn new(means: Vec<f64>, sigma_s: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidParameter("environment needs arms".into()));
        }
        if !means.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidParameter("arm means must be finite".into()));
        }
        if !(sigma_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_s must be positive, got {sigma_s}"
            )));
        }
        let mut best_arm = 0;
        for (i, &m) in means.iter().enumerate().skip(1) {
            if m > means[best_arm] {
                best_arm = i;
            }
        }
        let best = means[best_arm];
        let gaps = means.iter().map(|&m| best - m).collect();
        Ok(Self {
            means,
            sigma_s,
            best_arm,
            gaps,
        })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    /// Expected regret of pulling `arm` once.
    pub fn gap(&self, arm: usize) -> f64 {
        self.gaps[arm]
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }
}

/// Draw an environment whose means are i.i.d. `Normal(mean_of_means,
/// sd_of_means^2)`.
pub fn draw_environment(
    stream: &mut RandomStream,
    arms: usize,
    mean_of_means: f64,
    sd_of_means: f64,
    sigma_s: f64,
) -> Result<BanditEnvironment> {
    if !(sd_of_means >= 0.0) {
        return Err(Error::NegativeStandardDeviation { value: sd_of_means });
    }
    let means = (0..arms)
        .map(|_| gaussian_sample(stream, mean_of_means, sd_of_means))
        .collect::<Result<Vec<f64>>>()?;
    BanditEnvironment::new(means, sigma_s)
}

/// Everything recorded about one episode.
#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub horizon: usize,
    pub agents: usize,
    pub arms: usize,
    /// `selections[agent][t-1]` is the 0-indexed arm pulled at round `t`.
    pub selections: Vec<Vec<usize>>,
    /// Observed rewards, same layout as `selections`.
    pub rewards: Vec<Vec<f64>>,
    /// Running per-agent cumulative regret.
    pub cumulative_regret: Vec<Vec<f64>>,
    /// Per-agent pull counts by arm at the horizon.
    pub pull_counts: Vec<Vec<u64>>,
}

impl RegretTrace {
    /// Group cumulative regret (summed over agents) at each round.
    pub fn group_cumulative_regret(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.horizon];
        for agent_curve in &self.cumulative_regret {
            for (acc, value) in out.iter_mut().zip(agent_curve) {
                *acc += value;
            }
        }
        out
    }

    pub fn group_regret_at_horizon(&self) -> f64 {
        self.cumulative_regret
            .iter()
            .map(|curve| curve.last().copied().unwrap_or(0.0))
            .sum()
    }

    /// Total pulls of arms other than the environment's best, all agents.
    pub fn group_suboptimal_pulls(&self, best_arm: usize) -> u64 {
        self.pull_counts
            .iter()
            .map(|counts| {
                counts
                    .iter()
                    .enumerate()
                    .filter(|&(arm, _)| arm != best_arm)
                    .map(|(_, &n)| n)
                    .sum::<u64>()
            })
            .sum()
    }
}

/// Run one episode of a cooperative policy on a fixed environment.
///
/// `horizon >= arms` leaves room for the initialization sweep. For coop-UCL
/// a missing prior means the uninformative one.
pub fn run_episode(
    env: &BanditEnvironment,
    model: &ConsensusModel,
    policy: &PolicyConfig,
    prior: Option<&BayesianPrior>,
    horizon: usize,
    stream: &mut RandomStream,
) -> Result<RegretTrace> {
    policy.validate()?;
    let agents = model.agents();
    let arms = env.arms();
    if policy.agents != agents {
        return Err(Error::DimensionMismatch {
            expected: format!("policy sized for {agents} agents"),
            actual: format!("{}", policy.agents),
        });
    }
    if horizon < arms {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} shorter than the {arms}-round initialization sweep"
        )));
    }
    if let Some(p) = prior {
        if p.arms() != arms {
            return Err(Error::DimensionMismatch {
                expected: format!("prior over {arms} arms"),
                actual: format!("{}", p.arms()),
            });
        }
    }
    let default_prior;
    let prior = match (policy.kind, prior) {
        (PolicyKind::CoopUcl, Some(p)) => Some(p),
        (PolicyKind::CoopUcl, None) => {
            default_prior = BayesianPrior::uninformative(arms);
            Some(&default_prior)
        }
        _ => None,
    };

    let mut state = NetworkEstimationState::new(agents, arms);
    let mut selections = vec![Vec::with_capacity(horizon); agents];
    let mut rewards_log = vec![Vec::with_capacity(horizon); agents];
    let mut cumulative = vec![Vec::with_capacity(horizon); agents];
    let mut running = vec![0.0; agents];
    let mut pull_counts = vec![vec![0u64; arms]; agents];

    for t in 1..=horizon {
        let t_f = t as f64;
        let choices: Vec<usize> = if t <= arms {
            // Initialization sweep: every agent samples each arm once, with
            // consensus running throughout.
            vec![(t - 1) % arms; agents]
        } else {
            (0..agents)
                .map(|k| agent_choice(&state, k, t_f, policy, prior, model))
                .collect::<Result<Vec<usize>>>()?
        };

        let mut round_rewards = Vec::with_capacity(agents);
        for (k, &arm) in choices.iter().enumerate() {
            let reward = gaussian_sample(stream, env.means()[arm], env.sigma_s())?;
            round_rewards.push(reward);
            selections[k].push(arm);
            rewards_log[k].push(reward);
            running[k] += env.gap(arm);
            cumulative[k].push(running[k]);
            pull_counts[k][arm] += 1;
        }

        let (xi, r) = round_matrices(arms, &choices, &round_rewards);
        state.consensus_step(&xi, &r, model.p())?;
    }

    Ok(RegretTrace {
        horizon,
        agents,
        arms,
        selections,
        rewards: rewards_log,
        cumulative_regret: cumulative,
        pull_counts,
    })
}

fn agent_choice(
    state: &NetworkEstimationState,
    agent: usize,
    t: f64,
    policy: &PolicyConfig,
    prior: Option<&BayesianPrior>,
    model: &ConsensusModel,
) -> Result<usize> {
    let arms = state.arms();
    let q_values: Vec<f64> = match policy.kind {
        PolicyKind::CoopUcb => {
            let epsilon_c_k = model.epsilon_c()[agent];
            (0..arms)
                .map(|arm| match state.empirical_mean(agent, arm) {
                    None => f64::INFINITY,
                    Some(mean) => mean + coop_ucb_bonus(state, agent, arm, t, policy, epsilon_c_k),
                })
                .collect()
        }
        PolicyKind::CoopUcb2 => (0..arms)
            .map(|arm| match state.empirical_mean(agent, arm) {
                None => f64::INFINITY,
                Some(mean) => mean + coop_ucb2_bonus(state, agent, arm, t, policy),
            })
            .collect(),
        PolicyKind::CoopUcl => {
            let prior = prior.expect("coop-UCL always carries a prior");
            let posterior = coop_ucl_posterior(state, agent, prior, policy.sigma_s)?;
            (0..arms)
                .map(|arm| coop_ucl_q(&posterior, state, agent, arm, t, policy))
                .collect()
        }
    };
    select_arm(&q_values)
}

/// Environment source for a Monte Carlo batch: one fixed instance, or a
/// fresh draw per run (from the run's environment substream).
#[derive(Debug, Clone)]
pub enum EnvSpec {
    Fixed(BanditEnvironment),
    Redraw {
        arms: usize,
        mean_of_means: f64,
        sd_of_means: f64,
        sigma_s: f64,
    },
}

impl EnvSpec {
    pub fn sigma_s(&self) -> f64 {
        match self {
            EnvSpec::Fixed(env) => env.sigma_s(),
            EnvSpec::Redraw { sigma_s, .. } => *sigma_s,
        }
    }

    pub fn arms(&self) -> usize {
        match self {
            EnvSpec::Fixed(env) => env.arms(),
            EnvSpec::Redraw { arms, .. } => *arms,
        }
    }

    fn realize(&self, seed: u64) -> Result<BanditEnvironment> {
        match self {
            EnvSpec::Fixed(env) => Ok(env.clone()),
            EnvSpec::Redraw {
                arms,
                mean_of_means,
                sd_of_means,
                sigma_s,
            } => {
                let mut stream = RandomStream::with_substream(seed, ENV_SUBSTREAM);
                draw_environment(&mut stream, *arms, *mean_of_means, *sd_of_means, *sigma_s)
            }
        }
    }
}

/// One Monte Carlo experiment: a policy on a consensus model over an
/// environment source, repeated `runs` times with seeds `base_seed + r`.
#[derive(Debug, Clone)]
pub struct MonteCarloSpec {
    pub env: EnvSpec,
    pub model: ConsensusModel,
    pub policy: PolicyConfig,
    pub prior: Option<BayesianPrior>,
    pub horizon: usize,
    pub runs: usize,
    pub base_seed: u64,
    /// Substream for episode randomness; distinct values decorrelate reward
    /// draws between variants sharing a base seed (the environment draw is
    /// always shared).
    pub episode_substream: u64,
    /// Retain the full traces of the first `keep_traces` runs.
    pub keep_traces: usize,
}

impl MonteCarloSpec {
    pub fn new(
        env: EnvSpec,
        model: ConsensusModel,
        policy: PolicyConfig,
        prior: Option<BayesianPrior>,
        horizon: usize,
        runs: usize,
        base_seed: u64,
    ) -> Self {
        Self {
            env,
            model,
            policy,
            prior,
            horizon,
            runs,
            base_seed,
            episode_substream: EPISODE_SUBSTREAM,
            keep_traces: 0,
        }
    }
}

/// Averages over a Monte Carlo batch.
#[derive(Debug, Clone)]
pub struct AggregateResult {
    pub agents: usize,
    pub arms: usize,
    pub horizon: usize,
    pub runs: usize,
    pub base_seed: u64,
    /// Mean cumulative regret per agent per round.
    pub mean_cumulative_regret: Vec<Vec<f64>>,
    /// Group mean cumulative regret per round (sum of the agent curves).
    pub group_mean_regret: Vec<f64>,
    /// Mean pulls per arm, totalled over agents.
    pub mean_arm_pulls: Vec<f64>,
    /// Mean and standard error of the group's suboptimal pull total.
    pub mean_suboptimal_pulls: f64,
    pub suboptimal_pulls_std_error: f64,
    /// `(run_index, trace)` for the first `keep_traces` runs.
    pub traces: Vec<(usize, RegretTrace)>,
}

impl AggregateResult {
    pub fn group_regret_at_horizon(&self) -> f64 {
        self.group_mean_regret.last().copied().unwrap_or(0.0)
    }

    /// Mean final regret per agent.
    pub fn agent_final_regret(&self) -> Vec<f64> {
        self.mean_cumulative_regret
            .iter()
            .map(|curve| curve.last().copied().unwrap_or(0.0))
            .collect()
    }
}

struct Accumulator {
    runs: usize,
    sum_cumulative: Vec<Vec<f64>>,
    sum_pulls: Vec<f64>,
    sum_suboptimal: f64,
    sum_suboptimal_sq: f64,
    traces: Vec<(usize, RegretTrace)>,
}

impl Accumulator {
    fn new(agents: usize, arms: usize, horizon: usize) -> Self {
        Self {
            runs: 0,
            sum_cumulative: vec![vec![0.0; horizon]; agents],
            sum_pulls: vec![0.0; arms],
            sum_suboptimal: 0.0,
            sum_suboptimal_sq: 0.0,
            traces: Vec::new(),
        }
    }

    fn record(&mut self, run: usize, trace: &RegretTrace, best_arm: usize, keep: bool) {
        self.runs += 1;
        for (acc, curve) in self.sum_cumulative.iter_mut().zip(&trace.cumulative_regret) {
            for (a, v) in acc.iter_mut().zip(curve) {
                *a += v;
            }
        }
        for counts in &trace.pull_counts {
            for (arm, &n) in counts.iter().enumerate() {
                self.sum_pulls[arm] += n as f64;
            }
        }
        let suboptimal = trace.group_suboptimal_pulls(best_arm) as f64;
        self.sum_suboptimal += suboptimal;
        self.sum_suboptimal_sq += suboptimal * suboptimal;
        if keep {
            self.traces.push((run, trace.clone()));
        }
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        self.runs += other.runs;
        for (a, b) in self.sum_cumulative.iter_mut().zip(other.sum_cumulative) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.sum_pulls.iter_mut().zip(other.sum_pulls) {
            *x += y;
        }
        self.sum_suboptimal += other.sum_suboptimal;
        self.sum_suboptimal_sq += other.sum_suboptimal_sq;
        self.traces.extend(other.traces);
        self
    }
}

/// Run the batch. Parallel execution is deterministic: run `r` uses seed
/// `base + r`, runs are grouped into fixed batches, and batch results are
/// reduced in index order.
pub fn monte_carlo(spec: &MonteCarloSpec) -> Result<AggregateResult> {
    if spec.runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    spec.policy.validate()?;
    let agents = spec.model.agents();
    let arms = spec.env.arms();

    let batches: Vec<(usize, usize)> = (0..spec.runs)
        .step_by(RUN_BATCH)
        .map(|start| (start, (start + RUN_BATCH).min(spec.runs)))
        .collect();

    let partials: Vec<Result<Accumulator>> = batches
        .par_iter()
        .map(|&(start, end)| {
            let mut acc = Accumulator::new(agents, arms, spec.horizon);
            for run in start..end {
                let seed = spec.base_seed.wrapping_add(run as u64);
                let env = spec.env.realize(seed)?;
                let mut stream = RandomStream::with_substream(seed, spec.episode_substream);
                let trace = run_episode(
                    &env,
                    &spec.model,
                    &spec.policy,
                    spec.prior.as_ref(),
                    spec.horizon,
                    &mut stream,
                )?;
                acc.record(run, &trace, env.best_arm(), run < spec.keep_traces);
            }
            Ok(acc)
        })
        .collect();

    let mut total = Accumulator::new(agents, arms, spec.horizon);
    for partial in partials {
        total = total.merge(partial?);
    }

    let runs_f = spec.runs as f64;
    let mean_cumulative_regret: Vec<Vec<f64>> = total
        .sum_cumulative
        .iter()
        .map(|curve| curve.iter().map(|v| v / runs_f).collect())
        .collect();
    let mut group_mean_regret = vec![0.0; spec.horizon];
    for curve in &mean_cumulative_regret {
        for (acc, v) in group_mean_regret.iter_mut().zip(curve) {
            *acc += v;
        }
    }
    let mean_suboptimal = total.sum_suboptimal / runs_f;
    let variance = (total.sum_suboptimal_sq / runs_f - mean_suboptimal * mean_suboptimal).max(0.0);
    let std_error = if spec.runs > 1 {
        (variance / (runs_f - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut traces = total.traces;
    traces.sort_by_key(|(run, _)| *run);

    Ok(AggregateResult {
        agents,
        arms,
        horizon: spec.horizon,
        runs: spec.runs,
        base_seed: spec.base_seed,
        mean_cumulative_regret,
        group_mean_regret,
        mean_arm_pulls: total.sum_pulls.iter().map(|v| v / runs_f).collect(),
        mean_suboptimal_pulls: mean_suboptimal,
        suboptimal_pulls_std_error: std_error,
        traces,
    })
}

/// Per-arm asymptotic lower bound on expected suboptimal pulls for a fusion
/// center observing every agent's rewards: `(2 sigma_s^2 / gap^2) ln T`,
/// with the vanishing term dropped. Arms with zero gap are undefined and
/// reported as `None`.
pub fn fusion_center_lower_bound(
    env: &BanditEnvironment,
    horizon: f64,
) -> Result<Vec<Option<f64>>> {
    if !(horizon >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be at least 1, got {horizon}"
        )));
    }
    Ok(env
        .gaps()
        .iter()
        .map(|&gap| {
            if gap > 0.0 {
                Some(2.0 * env.sigma_s() * env.sigma_s() / (gap * gap) * horizon.ln())
            } else {
                None
            }
        })
        .collect())
}

/// Shared logarithmic term of both regret bounds:
/// `(4 gamma sigma_s^2 / gap^2) (1 + sqrt(1 + gap^2 M f(T) / (2 gamma
/// sigma_s^2 ln T))) ln T`.
fn leading_log_term(
    gap: f64,
    sigma_s: f64,
    agents: f64,
    gamma: f64,
    schedule: Schedule,
    horizon: f64,
) -> f64 {
    let log_t = horizon.ln();
    let base = 4.0 * gamma * sigma_s * sigma_s / (gap * gap);
    let inflation =
        gap * gap * agents * schedule.value(horizon) / (2.0 * gamma * sigma_s * sigma_s * log_t);
    base * (1.0 + (1.0 + inflation).sqrt()) * log_t
}

/// Per-agent bracket of the bound tails. The closed form is singular at
/// `epsilon_c = 0`; its analytic limit there is `2 + 1/(gamma - 1)`.
fn bound_bracket(epsilon_c: f64, gamma: f64, schedule: Schedule) -> f64 {
    if epsilon_c <= 1e-12 {
        return 2.0 + 1.0 / (gamma - 1.0);
    }
    let t_dag = t_dagger(epsilon_c, schedule);
    ((1.0 + epsilon_c) / epsilon_c) * t_dag.powf(epsilon_c / (1.0 + epsilon_c))
        + t_dag.powf(1.0 - gamma) / (gamma - 1.0)
        - 1.0 / epsilon_c
        + 1.0 / t_dag
}

fn validate_bound_inputs(
    env: &BanditEnvironment,
    gamma: f64,
    horizon: f64,
    arm: usize,
) -> Result<f64> {
    if !(horizon > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bounds need horizon > 1 (ln T positive), got {horizon}"
        )));
    }
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must exceed 1, got {gamma}"
        )));
    }
    let gap = env.gap(arm);
    if !(gap > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "arm {arm} has zero gap; the bound is undefined for the best arm"
        )));
    }
    Ok(gap)
}

/// Upper bound on the expected number of pulls of suboptimal `arm` by all
/// agents under coop-UCB2 up to `horizon`.
pub fn theorem1_bound(
    env: &BanditEnvironment,
    model: &ConsensusModel,
    gamma: f64,
    schedule: Schedule,
    horizon: f64,
    arm: usize,
) -> Result<f64> {
    let gap = validate_bound_inputs(env, gamma, horizon, arm)?;
    let agents = model.agents() as f64;
    let leading = leading_log_term(gap, env.sigma_s(), agents, gamma, schedule, horizon);
    let tails: f64 = model
        .epsilon_c()
        .iter()
        .map(|&e| bound_bracket(e, gamma, schedule))
        .sum();
    Ok(leading + agents * model.epsilon_n() + tails)
}

/// Upper bound on the expected number of pulls of suboptimal `arm` by all
/// agents under coop-UCL (uninformative priors) up to `horizon`.
pub fn theorem2_bound(
    env: &BanditEnvironment,
    model: &ConsensusModel,
    gamma: f64,
    schedule: Schedule,
    horizon: f64,
    arm: usize,
) -> Result<f64> {
    let gap = validate_bound_inputs(env, gamma, horizon, arm)?;
    let agents = model.agents() as f64;
    let leading = leading_log_term(gap, env.sigma_s(), agents, gamma, schedule, horizon);
    let tails: f64 = model
        .epsilon_c()
        .iter()
        .map(|&e| bound_bracket(e, gamma, schedule))
        .sum();
    let t_dagger_max = model
        .epsilon_c()
        .iter()
        .map(|&e| t_dagger(e, schedule))
        .fold(0.0f64, f64::max);
    let eta = (agents * model.epsilon_n() + leading).ceil();
    Ok(2.0 * tails + eta.max(t_dagger_max))
}

/// Spearman rank correlation with average ranks for ties; NaN-free inputs
/// expected. Returns 0 when either side is constant.
pub fn spearman_rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean) * (a - mean);
        var_y += (b - mean) * (b - mean);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    cov / (var_x.sqrt() * var_y.sqrt())
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}
