use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{profile_refs, DaPlan, Scenario};
use crate::error::{Error, Result};
use crate::grid::{bus_injections, evaluate_network, reactive, FlowMatrices, GridCase};

/// Forecast errors are a few percent of the profile peak; this gain brings
/// them to the scale of the other features.
pub const DEVIATION_GAIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RealTimeState {
    pub t: usize,
    pub periods: usize,
    pub load: Vec<f64>,
    pub renewable: Vec<f64>,
    pub forecast_load: Vec<f64>,
    pub forecast_renewable: Vec<f64>,
    pub e: Vec<bool>,
    pub p_gen: Vec<f64>,
}

impl RealTimeState {
    pub fn is_terminal(&self) -> bool {
        self.t >= self.periods
    }
}

/// Scoring of one real-time period.
#[derive(Debug, Clone, PartialEq)]
pub struct RtOutcome {
    /// The action after clipping to the VPP limits.
    pub action: Vec<f64>,
    pub reward: f64,
    pub voltage_violation: f64,
    pub branch_violation: f64,
    /// `V^D + B^D / base_mva`, in p.u.
    pub violation: f64,
    /// Deficit closed by shedding at the slack.
    pub shed: f64,
    /// Surplus closed by curtailment at the slack.
    pub curtail: f64,
    pub vpp_cost: f64,
    /// Unscaled cost in $.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtStep {
    pub next: RealTimeState,
    pub reward: f64,
    pub done: bool,
    pub outcome: RtOutcome,
}

/// Scores a VPP action in period `t` against the frozen plan and a realized
/// scenario. Thermal output stays at the plan; any residual imbalance is
/// closed at the slack and priced at `c_ls`.
pub fn rt_evaluate(
    case: &GridCase,
    matrices: &FlowMatrices,
    plan: &DaPlan,
    scenario: &Scenario,
    t: usize,
    action: &[f64],
    reward_scale: f64,
) -> Result<RtOutcome> {
    if action.len() != case.vpps.len() {
        return Err(Error::Size(format!(
            "expected {} VPP set-points, got {}",
            case.vpps.len(),
            action.len()
        )));
    }
    if t >= plan.p_gen.len() || t >= scenario.loads.len() {
        return Err(Error::Contract(format!("period {t} outside the plan")));
    }
    let clipped: Vec<f64> = action
        .iter()
        .zip(&case.vpps)
        .map(|(a, v)| {
            if a.is_nan() {
                0.0
            } else {
                a.clamp(-v.p_max, v.p_max)
            }
        })
        .collect();
    let loads = &scenario.loads[t];
    let available: Vec<f64> = scenario.renewables[t]
        .iter()
        .zip(&plan.p_curtail[t])
        .map(|(r, c)| (r - c).max(0.0))
        .collect();
    let p_gen = &plan.p_gen[t];
    let imbalance =
        p_gen.iter().sum::<f64>() + available.iter().sum::<f64>() + clipped.iter().sum::<f64>()
            - loads.iter().sum::<f64>();
    let (shed, curtail) = if imbalance < 0.0 {
        (-imbalance, 0.0)
    } else {
        (0.0, imbalance)
    };

    let mut shed_bus = vec![0.0; case.num_buses()];
    shed_bus[0] = shed;
    let (mut p, q) = bus_injections(case, p_gen, loads, &available, &[], &clipped, &shed_bus);
    p[0] -= curtail;
    let eval = evaluate_network(case, matrices, &p, &q)?;

    let vpp_cost: f64 = clipped
        .iter()
        .zip(&case.vpps)
        .map(|(a, v)| v.cost * a.abs())
        .sum();
    let c = &case.costs;
    let cost = c.lambda_v * eval.voltage_violation
        + c.lambda_b * eval.branch_violation
        + c.c_ls * (shed + curtail)
        + vpp_cost;
    Ok(RtOutcome {
        action: clipped,
        reward: -cost / reward_scale,
        voltage_violation: eval.voltage_violation,
        branch_violation: eval.branch_violation,
        violation: eval.voltage_violation + eval.branch_violation / case.meta.base_mva,
        shed,
        curtail,
        vpp_cost,
        cost,
    })
}

/// Real-time MDP over one scenario day with a frozen day-ahead plan.
#[derive(Debug, Clone)]
pub struct RealTimeEnv<'a> {
    case: &'a GridCase,
    matrices: &'a FlowMatrices,
    plan: &'a DaPlan,
    reward_scale: f64,
    load_ref: Vec<f64>,
    ren_ref: Vec<f64>,
    scenario: Option<Scenario>,
    state: Option<RealTimeState>,
}

impl<'a> RealTimeEnv<'a> {
    pub fn new(
        case: &'a GridCase,
        matrices: &'a FlowMatrices,
        plan: &'a DaPlan,
        reward_scale: f64,
    ) -> Result<Self> {
        let ok = plan.commitment.len() == case.periods()
            && plan.commitment.iter().all(|e| e.len() == case.units.len())
            && plan.p_gen.iter().all(|p| p.len() == case.units.len());
        if !ok {
            return Err(Error::Contract(
                "day-ahead plan does not match the case".into(),
            ));
        }
        Ok(Self {
            case,
            matrices,
            plan,
            reward_scale,
            load_ref: profile_refs(case.loads.iter().map(|l| &l.forecast_profile)),
            ren_ref: profile_refs(case.renewables.iter().map(|r| &r.forecast_profile)),
            scenario: None,
            state: None,
        })
    }

    pub fn case(&self) -> &'a GridCase {
        self.case
    }

    pub fn plan(&self) -> &'a DaPlan {
        self.plan
    }

    pub fn reward_scale(&self) -> f64 {
        self.reward_scale
    }

    pub fn action_dim(&self) -> usize {
        self.case.vpps.len()
    }

    /// Per-VPP `(low, high)` limits.
    pub fn action_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.case.vpps.iter().map(|v| -v.p_max).collect(),
            self.case.vpps.iter().map(|v| v.p_max).collect(),
        )
    }

    /// `3·loads + 3·renewables + 2·units + 1`.
    pub fn feature_dim(&self) -> usize {
        3 * self.case.loads.len() + 3 * self.case.renewables.len() + 2 * self.case.units.len() + 1
    }

    pub fn scenario(&self) -> Option<&Scenario> {
        self.scenario.as_ref()
    }

    pub fn state(&self) -> Option<&RealTimeState> {
        self.state.as_ref()
    }

    fn make_state(&self, scenario: &Scenario, t: usize) -> Result<RealTimeState> {
        let tt = t.min(self.case.periods() - 1);
        Ok(RealTimeState {
            t,
            periods: self.case.periods(),
            load: scenario.loads[tt].clone(),
            renewable: scenario.renewables[tt].clone(),
            forecast_load: self.case.load_forecast(self.plan.day, tt)?,
            forecast_renewable: self.case.renewable_forecast(self.plan.day, tt)?,
            e: self.plan.commitment[tt].clone(),
            p_gen: self.plan.p_gen[tt].clone(),
        })
    }

    pub fn reset(&mut self, scenario: Scenario) -> Result<&RealTimeState> {
        if scenario.loads.len() != self.case.periods() {
            return Err(Error::Contract(
                "scenario length differs from the horizon".into(),
            ));
        }
        let state = self.make_state(&scenario, 0)?;
        self.scenario = Some(scenario);
        self.state = Some(state);
        Ok(self.state.as_ref().expect("just set"))
    }

    /// Scores `action` in the current period without advancing.
    pub fn evaluate(&self, action: &[f64]) -> Result<RtOutcome> {
        let (scenario, state) = match (&self.scenario, &self.state) {
            (Some(s), Some(st)) if !st.is_terminal() => (s, st),
            _ => return Err(Error::Contract("no live real-time state".into())),
        };
        rt_evaluate(
            self.case,
            self.matrices,
            self.plan,
            scenario,
            state.t,
            action,
            self.reward_scale,
        )
    }

    pub fn step(&mut self, action: &[f64]) -> Result<RtStep> {
        let outcome = self.evaluate(action)?;
        let scenario = self.scenario.as_ref().expect("checked by evaluate");
        let t = self.state.as_ref().expect("checked by evaluate").t + 1;
        let next = self.make_state(scenario, t)?;
        self.state = Some(next.clone());
        Ok(RtStep {
            next,
            reward: outcome.reward,
            done: t == self.case.periods(),
            outcome,
        })
    }

    /// Scaled observation: realized load P and Q, realized renewable P and
    /// Q, amplified forecast errors of load and renewable P, commitment,
    /// planned output over capacity, and `t / T`.
    pub fn features(&self, s: &RealTimeState) -> Vec<f64> {
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
        for ((p, fc), r) in s.load.iter().zip(&s.forecast_load).zip(&self.load_ref) {
            f.push(DEVIATION_GAIN * (p - fc) / r);
        }
        for ((p, fc), r) in s
            .renewable
            .iter()
            .zip(&s.forecast_renewable)
            .zip(&self.ren_ref)
        {
            f.push(DEVIATION_GAIN * (p - fc) / r);
        }
        f.extend(s.e.iter().map(|&e| if e { 1.0 } else { 0.0 }));
        for (u, p) in case.units.iter().zip(&s.p_gen) {
            f.push(if u.p_max > 0.0 { p / u.p_max } else { 0.0 });
        }
        f.push(s.t as f64 / s.periods as f64);
        f
    }
}
