use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::profile_refs;
use crate::error::{Error, Result};
use crate::grid::{
    merit_order_dispatch, reactive, stage_costs, DispatchResult, GridCase, StageCosts,
};

/// `C_ls · peak total load`: the cost of shedding the whole peak for one period.
pub fn default_reward_scale(case: &GridCase) -> f64 {
    let s = case.costs.c_ls * case.peak_load();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayAheadState {
    pub day: usize,
    pub t: usize,
    pub periods: usize,
    /// Forecast load per load element.
    pub load: Vec<f64>,
    /// Forecast output per renewable.
    pub renewable: Vec<f64>,
    pub e_prev: Vec<bool>,
    pub prev_p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaStep {
    pub next: DayAheadState,
    pub reward: f64,
    pub done: bool,
    pub dispatch: DispatchResult,
    pub costs: StageCosts,
}

/// Initial state of `day`: the case's initial commitment with its
/// unconstrained merit dispatch against the first period's forecast.
pub fn da_reset(case: &GridCase, day: usize) -> Result<DayAheadState> {
    if day >= case.days() {
        return Err(Error::Contract(format!(
            "day {day} outside the {} profile days",
            case.days()
        )));
    }
    let load = case.load_forecast(day, 0)?;
    let renewable = case.renewable_forecast(day, 0)?;
    let e0: Vec<bool> = case.units.iter().map(|u| u.initial_status).collect();
    let off = vec![false; e0.len()];
    let zeros = vec![0.0; e0.len()];
    let prev_p = merit_order_dispatch(case, &e0, &off, &zeros, &load, &renewable)?.p_gen;
    Ok(DayAheadState {
        day,
        t: 0,
        periods: case.periods(),
        load,
        renewable,
        e_prev: e0,
        prev_p,
    })
}

/// Applies a commitment, dispatches it on the forecast and scores the period.
pub fn da_step(
    case: &GridCase,
    state: &DayAheadState,
    action: &[bool],
    reward_scale: f64,
) -> Result<DaStep> {
    if state.t >= state.periods {
        return Err(Error::Contract("step on a terminal day-ahead state".into()));
    }
    if action.len() != case.units.len() {
        return Err(Error::Size(format!(
            "expected {} unit decisions, got {}",
            case.units.len(),
            action.len()
        )));
    }
    let dispatch = merit_order_dispatch(
        case,
        action,
        &state.e_prev,
        &state.prev_p,
        &state.load,
        &state.renewable,
    )?;
    let costs = stage_costs(case, &dispatch, &state.e_prev, action);
    let t = state.t + 1;
    let done = t == state.periods;
    let (load, renewable) = if done {
        (state.load.clone(), state.renewable.clone())
    } else {
        (
            case.load_forecast(state.day, t)?,
            case.renewable_forecast(state.day, t)?,
        )
    };
    let next = DayAheadState {
        day: state.day,
        t,
        periods: state.periods,
        load,
        renewable,
        e_prev: action.to_vec(),
        prev_p: dispatch.p_gen.clone(),
    };
    Ok(DaStep {
        next,
        reward: -costs.total() / reward_scale,
        done,
        dispatch,
        costs,
    })
}

impl DayAheadState {
    pub fn is_terminal(&self) -> bool {
        self.t >= self.periods
    }
}

/// Day-ahead MDP with precomputed feature scaling.
#[derive(Debug, Clone)]
pub struct DayAheadEnv<'a> {
    case: &'a GridCase,
    reward_scale: f64,
    load_ref: Vec<f64>,
    ren_ref: Vec<f64>,
    state: Option<DayAheadState>,
}

impl<'a> DayAheadEnv<'a> {
    pub fn new(case: &'a GridCase, reward_scale: Option<f64>) -> Self {
        Self {
            case,
            reward_scale: reward_scale.unwrap_or_else(|| default_reward_scale(case)),
            load_ref: profile_refs(case.loads.iter().map(|l| &l.forecast_profile)),
            ren_ref: profile_refs(case.renewables.iter().map(|r| &r.forecast_profile)),
            state: None,
        }
    }

    pub fn case(&self) -> &'a GridCase {
        self.case
    }

    pub fn reward_scale(&self) -> f64 {
        self.reward_scale
    }

    /// `2·loads + 2·renewables + 2·units + 1`.
    pub fn feature_dim(&self) -> usize {
        2 * self.case.loads.len() + 2 * self.case.renewables.len() + 2 * self.case.units.len() + 1
    }

    pub fn reset(&mut self, day: usize) -> Result<&DayAheadState> {
        self.state = Some(da_reset(self.case, day)?);
        Ok(self.state.as_ref().expect("just set"))
    }

    pub fn state(&self) -> Option<&DayAheadState> {
        self.state.as_ref()
    }

    pub fn step(&mut self, action: &[bool]) -> Result<DaStep> {
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| Error::Contract("step before reset".into()))?;
        let out = da_step(self.case, state, action, self.reward_scale)?;
        self.state = Some(out.next.clone());
        Ok(out)
    }

    /// Scaled observation: load P and Q, renewable P and Q, previous
    /// commitment, previous output over capacity, and `t / T`.
    pub fn features(&self, s: &DayAheadState) -> Vec<f64> {
        let case = self.case;
        let mut f = Vec::with_capacity(self.feature_dim());
        for ((l, p), r) in case.loads.iter().zip(&s.load).zip(&self.load_ref) {
            f.push(p / r);
            f.push(reactive(*p, l.power_factor) / r);
        }
        for ((g, p), r) in case.renewables.iter().zip(&s.renewable).zip(&self.ren_ref) {
            f.push(p / r);
            f.push(reactive(*p, g.power_factor) / r);
        }
        f.extend(s.e_prev.iter().map(|&e| if e { 1.0 } else { 0.0 }));
        for (u, p) in case.units.iter().zip(&s.prev_p) {
            f.push(if u.p_max > 0.0 { p / u.p_max } else { 0.0 });
        }
        f.push(s.t as f64 / s.periods as f64);
        f
    }
}

/// A frozen day-ahead solution: per-period commitment and dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct DaPlan {
    pub day: usize,
    pub commitment: Vec<Vec<bool>>,
    pub p_gen: Vec<Vec<f64>>,
    pub p_curtail: Vec<Vec<f64>>,
    pub startup: Vec<Vec<bool>>,
    pub shutdown: Vec<Vec<bool>>,
    pub costs: Vec<StageCosts>,
}

impl DaPlan {
    pub fn total_cost(&self) -> f64 {
        self.costs.iter().map(StageCosts::total).sum()
    }
}

/// Rolls a deterministic policy through one day and returns the resulting
/// plan and the cumulative scaled reward.
pub fn rollout_plan(
    case: &GridCase,
    day: usize,
    reward_scale: f64,
    mut policy: impl FnMut(&DayAheadState) -> Result<Vec<bool>>,
) -> Result<(DaPlan, f64)> {
    let mut state = da_reset(case, day)?;
    let mut plan = DaPlan {
        day,
        commitment: vec![],
        p_gen: vec![],
        p_curtail: vec![],
        startup: vec![],
        shutdown: vec![],
        costs: vec![],
    };
    let mut ret = 0.0;
    while !state.is_terminal() {
        let e = policy(&state)?;
        let step = da_step(case, &state, &e, reward_scale)?;
        ret += step.reward;
        plan.commitment.push(e);
        plan.p_gen.push(step.dispatch.p_gen);
        plan.p_curtail.push(step.dispatch.p_curtail);
        plan.startup.push(step.dispatch.startup);
        plan.shutdown.push(step.dispatch.shutdown);
        plan.costs.push(step.costs);
        state = step.next;
    }
    Ok((plan, ret))
}
