use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::OracleResult;
use crate::envs::RealTimeEnv;
use crate::error::{Error, Result};

pub const MAX_VPPS: usize = 3;
pub const MAX_GRID_POINTS: u64 = 1_000_000;

/// Exhaustive single-step search over VPP set-points `k · resolution`,
/// `|k · resolution| ≤ P_max`, for the environment's current period.
pub fn grid_search_vpp(env: &RealTimeEnv<'_>, resolution: f64) -> Result<OracleResult<Vec<f64>>> {
    if !(resolution > 0.0) {
        return Err(Error::Contract("resolution must be positive".into()));
    }
    let vpps = &env.case().vpps;
    if vpps.len() > MAX_VPPS {
        return Err(Error::SizeGuard(format!(
            "{} VPPs exceed the limit of {MAX_VPPS}",
            vpps.len()
        )));
    }
    let steps: Vec<i64> = vpps
        .iter()
        .map(|v| (v.p_max / resolution + 1e-9).floor() as i64)
        .collect();
    let points = steps
        .iter()
        .try_fold(1u64, |acc, k| acc.checked_mul(2 * *k as u64 + 1));
    match points {
        Some(p) if p <= MAX_GRID_POINTS => {}
        _ => {
            return Err(Error::SizeGuard(format!(
                "grid exceeds {MAX_GRID_POINTS} points"
            )))
        }
    }
    let mut idx: Vec<i64> = steps.iter().map(|k| -k).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_action = vec![0.0; vpps.len()];
    let mut count = 0u64;
    loop {
        let action: Vec<f64> = idx.iter().map(|&k| k as f64 * resolution).collect();
        let reward = env.evaluate(&action)?.reward;
        count += 1;
        if reward > best {
            best = reward;
            best_action = action;
        }
        let mut d = 0;
        loop {
            if d == idx.len() {
                return Ok(OracleResult {
                    best_value: best,
                    best_actions: vec![best_action],
                    evaluated_count: count,
                });
            }
            idx[d] += 1;
            if idx[d] <= steps[d] {
                break;
            }
            idx[d] = -steps[d];
            d += 1;
        }
    }
}
