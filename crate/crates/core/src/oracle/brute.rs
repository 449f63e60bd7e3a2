use alloc::format;
use alloc::vec::Vec;

use crate::envs::{da_reset, da_step, DayAheadState};
use crate::error::{Error, Result};
use crate::grid::GridCase;

/// Largest number of commitment sequences enumerated exhaustively.
pub const MAX_SEQUENCES: u64 = 1 << 16;

/// Best value found by an exhaustive search and the actions attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<A> {
    pub best_value: f64,
    pub best_actions: Vec<A>,
    pub evaluated_count: u64,
}

/// Commitment vector of action index `mask` (bit `g` is unit `g`).
pub fn mask_to_commitment(mask: u64, units: usize) -> Vec<bool> {
    (0..units).map(|g| mask >> g & 1 == 1).collect()
}

struct Search<'a> {
    case: &'a GridCase,
    scale: f64,
    units: usize,
    best: f64,
    best_seq: Vec<Vec<bool>>,
    prefix: Vec<Vec<bool>>,
    count: u64,
}

impl Search<'_> {
    fn visit(&mut self, state: &DayAheadState, value: f64) -> Result<()> {
        if state.is_terminal() {
            self.count += 1;
            if value > self.best {
                self.best = value;
                self.best_seq.clone_from(&self.prefix);
            }
            return Ok(());
        }
        for mask in 0..1u64 << self.units {
            let e = mask_to_commitment(mask, self.units);
            let step = da_step(self.case, state, &e, self.scale)?;
            self.prefix.push(e);
            self.visit(&step.next, value + step.reward)?;
            self.prefix.pop();
        }
        Ok(())
    }
}

/// Exhaustive day-ahead optimum under the environment's dispatch rule.
/// Ties resolve to the lexicographically smallest sequence of action
/// indices.
pub fn brute_force_uc(
    case: &GridCase,
    day: usize,
    reward_scale: f64,
) -> Result<OracleResult<Vec<bool>>> {
    let bits = case.units.len() * case.periods();
    if bits > 16 {
        return Err(Error::SizeGuard(format!(
            "2^({} units x {} periods) sequences exceed {MAX_SEQUENCES}",
            case.units.len(),
            case.periods()
        )));
    }
    let start = da_reset(case, day)?;
    let mut search = Search {
        case,
        scale: reward_scale,
        units: case.units.len(),
        best: f64::NEG_INFINITY,
        best_seq: Vec::new(),
        prefix: Vec::new(),
        count: 0,
    };
    search.visit(&start, 0.0)?;
    Ok(OracleResult {
        best_value: search.best,
        best_actions: search.best_seq,
        evaluated_count: search.count,
    })
}
