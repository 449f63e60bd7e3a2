use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dqn::{mask_bits, select_action_dqn, DqnAgent, EpsilonSchedule};
use super::replay::{ReplayBuffer, Transition};
use super::sac::{SacAgent, SacParams};
use super::LearningRates;
use crate::envs::{sample_scenario, DaPlan, DayAheadEnv, RealTimeEnv, Scenario, ScenarioGenerator};
use crate::error::{Error, Result};
use crate::grid::{FlowMatrices, GridCase};
use crate::qmodels::{Policy, QFunction};

/// Updates start once the buffer holds this many batches.
pub const WARMUP_BATCHES: usize = 10;

/// Scenario indices at or above this offset are held out from training.
pub const EVAL_SCENARIO_OFFSET: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DqnConfig {
    pub episodes: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    /// Hard target sync period in environment steps.
    pub target_sync: u64,
    pub lr: LearningRates,
    #[serde(default)]
    pub adam_theta: bool,
    pub seed: u64,
    #[serde(default)]
    pub reward_scale: Option<f64>,
    /// Profile days cycled through by episode; all days when absent.
    #[serde(default)]
    pub days: Option<Vec<usize>>,
    #[serde(default = "one")]
    pub updates_per_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SacConfig {
    pub episodes: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub sac: SacParams,
    pub scenario: ScenarioGenerator,
    pub seed: u64,
    #[serde(default)]
    pub reward_scale: Option<f64>,
    #[serde(default = "one")]
    pub updates_per_step: usize,
}

fn one() -> usize {
    1
}

/// One learning-curve row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub episode: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub violation: Option<f64>,
    pub epsilon: f64,
    /// Mean pre-update loss over the episode's updates.
    pub loss: Option<f64>,
}

/// Commitment transition of one recorded step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub t: usize,
    pub e_prev: Vec<bool>,
    pub e: Vec<bool>,
    pub startup: Vec<bool>,
    pub shutdown: Vec<bool>,
}

impl StepRecord {
    /// `e_t − e_{t−1} = s^su − s^sd` with exclusive flags.
    pub fn is_consistent(&self) -> bool {
        (0..self.e.len()).all(|g| {
            let lhs = self.e[g] as i8 - self.e_prev[g] as i8;
            let rhs = self.startup[g] as i8 - self.shutdown[g] as i8;
            lhs == rhs && !(self.startup[g] && self.shutdown[g])
        })
    }
}

#[derive(Debug, Clone)]
pub struct DaTrainOutput<Q> {
    pub curve: Vec<CurveRow>,
    pub steps: Vec<StepRecord>,
    pub agent: DqnAgent<Q>,
}

#[derive(Debug, Clone)]
pub struct RtTrainOutput<P> {
    pub curve: Vec<CurveRow>,
    pub steps: Vec<StepRecord>,
    pub agent: SacAgent<P>,
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn check_sizes(batch: usize, capacity: usize) -> Result<()> {
    if batch == 0 || capacity < batch {
        return Err(Error::Contract(
            "batch size must be positive and fit in the buffer".into(),
        ));
    }
    Ok(())
}

/// Q-DQN day-ahead training: ε-greedy episodes over forecast days, one
/// update per step after warm-up, hard target syncs.
pub fn train_day_ahead<Q: QFunction + Clone>(
    case: &GridCase,
    mut agent: DqnAgent<Q>,
    cfg: &DqnConfig,
) -> Result<DaTrainOutput<Q>> {
    check_sizes(cfg.batch_size, cfg.buffer_capacity)?;
    if agent.space.units() != case.units.len() {
        return Err(Error::Contract(
            "action space does not match the case".into(),
        ));
    }
    let days: Vec<usize> = cfg
        .days
        .clone()
        .unwrap_or_else(|| (0..case.days()).collect());
    if days.is_empty() || days.iter().any(|&d| d >= case.days()) {
        return Err(Error::Contract("invalid training days".into()));
    }
    let mut env = DayAheadEnv::new(case, cfg.reward_scale);
    if agent.online.in_dim() != env.feature_dim() {
        return Err(Error::Contract(
            "Q-function input does not match the day-ahead features".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let warmup = WARMUP_BATCHES * cfg.batch_size;
    let units = case.units.len();
    let mut step: u64 = 0;
    let mut curve = Vec::with_capacity(cfg.episodes);
    let mut records = Vec::new();
    for episode in 0..cfg.episodes {
        let mut state = env.reset(days[episode % days.len()])?.clone();
        let mut ret = 0.0;
        let mut losses = Vec::new();
        let mut eps;
        loop {
            let s = env.features(&state);
            eps = cfg.epsilon.value(step);
            let q = agent.online.q_values(&s)?;
            let mask = select_action_dqn(&agent.space, &q, eps, &mut rng);
            let e = mask_bits(mask, units);
            let out = env.step(&e)?;
            records.push(StepRecord {
                episode,
                t: state.t,
                e_prev: state.e_prev.clone(),
                e,
                startup: out.dispatch.startup.clone(),
                shutdown: out.dispatch.shutdown.clone(),
            });
            ret += out.reward;
            buffer.push(Transition {
                state: s,
                action: mask,
                reward: out.reward,
                next_state: env.features(&out.next),
                done: out.done,
            });
            step += 1;
            if buffer.len() >= warmup.max(cfg.batch_size) {
                for _ in 0..cfg.updates_per_step {
                    let batch = buffer.sample(&mut rng, cfg.batch_size)?;
                    losses.push(agent.update(&batch)?);
                }
            }
            if cfg.target_sync > 0 && step.is_multiple_of(cfg.target_sync) {
                agent.sync_target();
            }
            state = out.next;
            if out.done {
                break;
            }
        }
        curve.push(CurveRow {
            episode,
            ret,
            violation: None,
            epsilon: eps,
            loss: mean(&losses),
        });
    }
    Ok(DaTrainOutput {
        curve,
        steps: records,
        agent,
    })
}

/// Greedy commitment of a trained Q-function.
pub fn greedy_commitment<Q: QFunction>(agent: &DqnAgent<Q>, features: &[f64]) -> Result<Vec<bool>> {
    let q = agent.online.q_values(features)?;
    Ok(mask_bits(agent.space.greedy(&q), agent.space.units()))
}

/// Commitment transitions of a frozen plan, as step records.
pub fn plan_records(case: &GridCase, plan: &DaPlan, episode: usize) -> Vec<StepRecord> {
    let mut prev: Vec<bool> = case.units.iter().map(|u| u.initial_status).collect();
    let mut out = Vec::with_capacity(plan.commitment.len());
    for (t, e) in plan.commitment.iter().enumerate() {
        out.push(StepRecord {
            episode,
            t,
            e_prev: prev.clone(),
            e: e.clone(),
            startup: plan.startup[t].clone(),
            shutdown: plan.shutdown[t].clone(),
        });
        prev.clone_from(e);
    }
    out
}

/// Q-SAC real-time training over sampled scenarios of the plan's day.
/// Episode `k` uses scenario `k`. Until the buffer holds the warm-up
/// batches, actions are drawn uniformly from the VPP box.
pub fn train_real_time<P: Policy + Clone>(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
    mut agent: SacAgent<P>,
    cfg: &SacConfig,
) -> Result<RtTrainOutput<P>> {
    check_sizes(cfg.batch_size, cfg.buffer_capacity)?;
    let scale = cfg
        .reward_scale
        .unwrap_or_else(|| crate::envs::default_reward_scale(case));
    let mut env = RealTimeEnv::new(case, matrices, plan, scale)?;
    if agent.actor.in_dim() != env.feature_dim() || agent.action_dim() != env.action_dim() {
        return Err(Error::Contract(
            "actor does not match the real-time environment".into(),
        ));
    }
    let (low, high) = env.action_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let warmup = WARMUP_BATCHES * cfg.batch_size;
    let mut curve = Vec::with_capacity(cfg.episodes);
    let mut records = Vec::new();
    for episode in 0..cfg.episodes {
        let scenario = sample_scenario(&cfg.scenario, case, plan.day, episode as u64)?;
        let mut state = env.reset(scenario)?.clone();
        let (mut ret, mut violation) = (0.0, 0.0);
        let mut losses = Vec::new();
        loop {
            let s = env.features(&state);
            let action = if buffer.len() < warmup {
                low.iter()
                    .zip(&high)
                    .map(|(l, h)| rng.random_range(*l..=*h))
                    .collect()
            } else {
                agent.explore(&s, &mut rng)?
            };
            let out = env.step(&action)?;
            ret += out.reward;
            violation += out.outcome.violation;
            buffer.push(Transition {
                state: s,
                action: out.outcome.action.clone(),
                reward: out.reward,
                next_state: env.features(&out.next),
                done: out.done,
            });
            if buffer.len() >= warmup.max(cfg.batch_size) {
                for _ in 0..cfg.updates_per_step {
                    let batch = buffer.sample(&mut rng, cfg.batch_size)?;
                    let (l1, l2) = agent.critic_update(&batch, &mut rng)?;
                    agent.actor_update(&batch, &mut rng)?;
                    agent.polyak();
                    losses.push(0.5 * (l1 + l2));
                }
            }
            state = out.next;
            if out.done {
                break;
            }
        }
        records.extend(plan_records(case, plan, episode));
        curve.push(CurveRow {
            episode,
            ret,
            violation: Some(violation),
            epsilon: 0.0,
            loss: mean(&losses),
        });
    }
    Ok(RtTrainOutput {
        curve,
        steps: records,
        agent,
    })
}

/// Averages of a deterministic real-time policy over scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RtEval {
    pub mean_return: f64,
    pub mean_violation: f64,
    /// Mean per-episode `Σ|p_vpp|` in MW.
    pub mean_adjustment: f64,
    pub mean_cost: f64,
}

/// Rolls `policy` (features → action) through every scenario.
pub fn evaluate_rt(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
    reward_scale: f64,
    scenarios: &[Scenario],
    mut policy: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<RtEval> {
    if scenarios.is_empty() {
        return Err(Error::Contract("no evaluation scenarios".into()));
    }
    let mut env = RealTimeEnv::new(case, matrices, plan, reward_scale)?;
    let mut acc = RtEval::default();
    for sc in scenarios {
        let mut state = env.reset(sc.clone())?.clone();
        loop {
            let a = policy(&env.features(&state))?;
            let out = env.step(&a)?;
            acc.mean_return += out.reward;
            acc.mean_violation += out.outcome.violation;
            acc.mean_adjustment += out.outcome.action.iter().map(|p| p.abs()).sum::<f64>();
            acc.mean_cost += out.outcome.cost;
            state = out.next;
            if out.done {
                break;
            }
        }
    }
    let n = scenarios.len() as f64;
    Ok(RtEval {
        mean_return: acc.mean_return / n,
        mean_violation: acc.mean_violation / n,
        mean_adjustment: acc.mean_adjustment / n,
        mean_cost: acc.mean_cost / n,
    })
}

/// Held-out scenarios `EVAL_SCENARIO_OFFSET + i`.
pub fn eval_scenarios(
    gen: &ScenarioGenerator,
    case: &GridCase,
    day: usize,
    count: usize,
) -> Result<Vec<Scenario>> {
    (0..count as u64)
        .map(|i| sample_scenario(gen, case, day, EVAL_SCENARIO_OFFSET + i))
        .collect()
}
