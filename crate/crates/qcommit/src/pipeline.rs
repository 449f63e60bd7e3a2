//! Training and evaluation runs shared by the commands and the tests.

use qcommit_core::envs::{
    default_reward_scale, rollout_plan, DaPlan, DayAheadEnv, RealTimeEnv, Scenario,
};
use qcommit_core::grid::{FlowMatrices, GridCase};
use qcommit_core::oracle::Mlp;
use qcommit_core::rl::{
    eval_scenarios, greedy_commitment, train_day_ahead, train_real_time, ActionSpace, CurveRow,
    DqnAgent, SacAgent, StepRecord,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{ActorModel, QModel};
use crate::config::{DaRunConfig, RtRunConfig};
use crate::error::{CliError, CliResult};

/// Per-period averages of one evaluated operating day.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalRow {
    pub period: usize,
    /// Fuel, shedding, curtailment and VPP cost in $.
    pub operational_cost: f64,
    pub startup_cost: f64,
    /// `V^D + B^D / base_mva`, in p.u.
    pub violation: f64,
    /// `Σ|p_vpp|` in MW.
    pub adjustment_mw: f64,
}

/// Column sums of the evaluation rows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub total_cost: f64,
    pub operational_cost: f64,
    pub startup_cost: f64,
    pub violation: f64,
    pub adjustment_output_mw: f64,
}

impl Metrics {
    pub fn from_rows(rows: &[EvalRow]) -> Self {
        let mut m = Metrics::default();
        for r in rows {
            m.operational_cost += r.operational_cost;
            m.startup_cost += r.startup_cost;
            m.violation += r.violation;
            m.adjustment_output_mw += r.adjustment_mw;
        }
        m.total_cost = m.operational_cost + m.startup_cost;
        m
    }
}

/// Operates `plan` through each scenario with a real-time policy and
/// averages every period over the scenarios. Also returns every step's
/// `Σ|p_vpp|`.
pub fn evaluate_day(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
    scenarios: &[Scenario],
    mut policy: impl FnMut(&[f64]) -> qcommit_core::Result<Vec<f64>>,
) -> CliResult<(Vec<EvalRow>, Vec<f64>)> {
    if scenarios.is_empty() {
        return Err(CliError::Contract("no evaluation scenarios".into()));
    }
    let periods = plan.commitment.len();
    let mut rows: Vec<EvalRow> = (0..periods)
        .map(|t| EvalRow {
            period: t,
            ..EvalRow::default()
        })
        .collect();
    let mut adjustments = Vec::with_capacity(periods * scenarios.len());
    let mut env = RealTimeEnv::new(case, matrices, plan, 1.0)?;
    for sc in scenarios {
        let mut state = env.reset(sc.clone())?.clone();
        loop {
            let t = state.t;
            let action = if case.vpps.is_empty() {
                Vec::new()
            } else {
                policy(&env.features(&state))?
            };
            let out = env.step(&action)?;
            let o = &out.outcome;
            let adj: f64 = o.action.iter().map(|p| p.abs()).sum();
            let row = &mut rows[t];
            row.operational_cost +=
                plan.costs[t].fuel + case.costs.c_ls * (o.shed + o.curtail) + o.vpp_cost;
            row.startup_cost += plan.costs[t].startup;
            row.violation += o.violation;
            row.adjustment_mw += adj;
            adjustments.push(adj);
            state = out.next;
            if out.done {
                break;
            }
        }
    }
    let n = scenarios.len() as f64;
    for r in &mut rows {
        r.operational_cost /= n;
        r.startup_cost /= n;
        r.violation /= n;
        r.adjustment_mw /= n;
    }
    Ok((rows, adjustments))
}

pub struct DaRun {
    pub curve: Vec<CurveRow>,
    pub steps: Vec<StepRecord>,
    pub agent: DqnAgent<QModel>,
    pub reward_scale: f64,
}

pub fn init_dqn(case: &GridCase, cfg: &DaRunConfig) -> CliResult<DqnAgent<QModel>> {
    let env = DayAheadEnv::new(case, cfg.train.reward_scale);
    let space = ActionSpace::for_units(case.units.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let q = QModel::random(
        cfg.agent,
        &cfg.model,
        env.feature_dim(),
        space.num_outputs(),
        &mut rng,
    )?;
    Ok(DqnAgent::new(
        q,
        space,
        cfg.train.gamma,
        cfg.train.lr,
        cfg.train.adam_theta,
    )?)
}

pub fn train_da(case: &GridCase, cfg: &DaRunConfig) -> CliResult<DaRun> {
    let agent = init_dqn(case, cfg)?;
    let out = train_day_ahead(case, agent, &cfg.train)?;
    let reward_scale = cfg
        .train
        .reward_scale
        .unwrap_or_else(|| default_reward_scale(case));
    Ok(DaRun {
        curve: out.curve,
        steps: out.steps,
        agent: out.agent,
        reward_scale,
    })
}

/// Greedy (ε = 0) rollout of a day-ahead agent on the forecast of `day`.
pub fn greedy_plan(
    case: &GridCase,
    agent: &DqnAgent<QModel>,
    day: usize,
    reward_scale: f64,
) -> CliResult<(DaPlan, f64)> {
    let env = DayAheadEnv::new(case, Some(reward_scale));
    if agent.space.units() != case.units.len()
        || qcommit_core::qmodels::QFunction::in_dim(&agent.online) != env.feature_dim()
    {
        return Err(CliError::Contract(
            "day-ahead agent does not match the case".into(),
        ));
    }
    Ok(rollout_plan(case, day, reward_scale, |s| {
        greedy_commitment(agent, &env.features(s))
    })?)
}

pub struct RtRun {
    pub curve: Vec<CurveRow>,
    pub steps: Vec<StepRecord>,
    pub agent: SacAgent<ActorModel>,
    pub reward_scale: f64,
}

pub fn init_sac(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
    cfg: &RtRunConfig,
) -> CliResult<SacAgent<ActorModel>> {
    if case.vpps.is_empty() {
        return Err(CliError::Contract(
            "real-time training needs at least one VPP".into(),
        ));
    }
    let scale = cfg
        .train
        .reward_scale
        .unwrap_or_else(|| default_reward_scale(case));
    let env = RealTimeEnv::new(case, matrices, plan, scale)?;
    let (low, high) = env.action_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let actor = ActorModel::random(
        cfg.agent,
        &cfg.model,
        env.feature_dim(),
        low.clone(),
        high.clone(),
        cfg.log_std_init,
        &mut rng,
    )?;
    let mut dims = vec![env.feature_dim() + env.action_dim()];
    dims.extend_from_slice(&cfg.critic_hidden);
    dims.push(1);
    let critics = [Mlp::random(&dims, &mut rng)?, Mlp::random(&dims, &mut rng)?];
    Ok(SacAgent::new(actor, critics, low, high, cfg.train.sac)?)
}

pub fn train_rt(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
    cfg: &RtRunConfig,
) -> CliResult<RtRun> {
    let agent = init_sac(case, matrices, plan, cfg)?;
    let out = train_real_time(case, matrices, plan, agent, &cfg.train)?;
    let reward_scale = cfg
        .train
        .reward_scale
        .unwrap_or_else(|| default_reward_scale(case));
    Ok(RtRun {
        curve: out.curve,
        steps: out.steps,
        agent: out.agent,
        reward_scale,
    })
}

/// Held-out evaluation of a trained real-time agent on its plan's day.
pub fn evaluate_rt_agent(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
    agent: &SacAgent<ActorModel>,
    cfg: &RtRunConfig,
) -> CliResult<Vec<EvalRow>> {
    let scenarios = eval_scenarios(&cfg.train.scenario, case, plan.day, cfg.eval_scenarios)?;
    Ok(evaluate_day(case, matrices, plan, &scenarios, |s| agent.act(s))?.0)
}

/// Forecast-day evaluation of a day-ahead plan (no real-time correction).
pub fn evaluate_plan(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
) -> CliResult<Vec<EvalRow>> {
    let forecast = Scenario::forecast(case, plan.day)?;
    let zero = vec![0.0; case.vpps.len()];
    Ok(evaluate_day(case, matrices, plan, &[forecast], |_| Ok(zero.clone()))?.0)
}
