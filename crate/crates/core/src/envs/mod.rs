//! Day-ahead commitment and real-time VPP correction environments, plus the
//! scenario generator for real-time uncertainty.

mod day_ahead;
mod real_time;
mod scenario;

pub use day_ahead::{
    da_reset, da_step, default_reward_scale, rollout_plan, DaPlan, DaStep, DayAheadEnv,
    DayAheadState,
};
pub use real_time::{rt_evaluate, RealTimeEnv, RealTimeState, RtOutcome, RtStep};
pub use scenario::{
    sample_scenario, truncated_normal_std, Scenario, ScenarioGenerator, TRUNCATION,
};

use alloc::vec::Vec;

/// Per-element scaling references: the largest value of each profile, or
/// 1 for all-zero profiles.
pub(crate) fn profile_refs<'a>(profiles: impl Iterator<Item = &'a Vec<f64>>) -> Vec<f64> {
    profiles
        .map(|p| {
            let m = p.iter().copied().fold(0.0, f64::max);
            if m > 0.0 {
                m
            } else {
                1.0
            }
        })
        .collect()
}
