use alloc::vec::Vec;

use crate::envs::{rollout_plan, DaPlan};
use crate::error::Result;
use crate::grid::{unit_bounds, GridCase};

/// Capacity margin the heuristic keeps above forecast net load.
pub const RESERVE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct PriorityResult {
    pub schedule: Vec<Vec<bool>>,
    /// Cumulative scaled reward.
    pub value: f64,
    pub plan: DaPlan,
}

/// Unit order by full-load average cost with startup amortized over the
/// horizon. Ties by index.
pub fn priority_order(case: &GridCase) -> Vec<usize> {
    let t = case.periods() as f64;
    let avg = |g: usize| {
        let u = &case.units[g];
        if u.p_max > 0.0 {
            (u.cost * u.p_max + u.startup_cost / t) / u.p_max
        } else {
            f64::INFINITY
        }
    };
    let mut order: Vec<usize> = (0..case.units.len()).collect();
    order.sort_by(|&a, &b| avg(a).total_cmp(&avg(b)).then(a.cmp(&b)));
    order
}

/// Priority-list commitment: per period, commit units in priority order
/// until capacity covers forecast net load plus the reserve margin, then
/// dispatch and score with the day-ahead environment. A unit that stays on
/// counts only the output its ramp limit lets it reach this period.
pub fn priority_list(case: &GridCase, day: usize, reward_scale: f64) -> Result<PriorityResult> {
    let order = priority_order(case);
    let (plan, value) = rollout_plan(case, day, reward_scale, |s| {
        let net = s.load.iter().sum::<f64>() - s.renewable.iter().sum::<f64>();
        let need = net * (1.0 + RESERVE_MARGIN);
        let reach = unit_bounds(
            case,
            &alloc::vec![true; case.units.len()],
            &s.e_prev,
            &s.prev_p,
        )?;
        let mut e = alloc::vec![false; case.units.len()];
        let mut cap = 0.0;
        for &g in &order {
            if cap >= need {
                break;
            }
            e[g] = true;
            cap += reach[g].1;
        }
        Ok(e)
    })?;
    Ok(PriorityResult {
        schedule: plan.commitment.clone(),
        value,
        plan,
    })
}
