use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LearningRates, Optimizer, Transition};
use crate::error::{Error, Result};
use crate::qmodels::QFunction;

/// Units up to which commitment vectors are enumerated as single actions.
pub const MAX_ENUMERATED_UNITS: usize = 6;

/// How commitment vectors map to Q-function outputs. Actions are always
/// carried as bit masks (bit `g` commits unit `g`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "units")]
pub enum ActionSpace {
    /// One output per commitment vector: `2^G` outputs, output index = mask.
    Enumerated(usize),
    /// Two outputs per unit, `[off, on]` at `2g, 2g + 1`, sharing the trunk.
    Factorized(usize),
}

impl ActionSpace {
    /// Enumerated for at most six units, factorized otherwise.
    pub fn for_units(units: usize) -> Self {
        if units <= MAX_ENUMERATED_UNITS {
            ActionSpace::Enumerated(units)
        } else {
            ActionSpace::Factorized(units)
        }
    }

    pub fn units(&self) -> usize {
        match *self {
            ActionSpace::Enumerated(g) | ActionSpace::Factorized(g) => g,
        }
    }

    pub fn num_outputs(&self) -> usize {
        match *self {
            ActionSpace::Enumerated(g) => 1 << g,
            ActionSpace::Factorized(g) => 2 * g,
        }
    }

    pub fn num_masks(&self) -> u64 {
        1u64 << self.units()
    }

    /// Greedy mask, ties to the lowest index.
    pub fn greedy(&self, q: &[f64]) -> u64 {
        match *self {
            ActionSpace::Enumerated(_) => argmax(q) as u64,
            ActionSpace::Factorized(g) => {
                (0..g).fold(0u64, |m, u| m | ((q[2 * u + 1] > q[2 * u]) as u64) << u)
            }
        }
    }

    /// `(output index, Q)` terms a mask selects.
    fn selected(&self, mask: u64) -> Vec<usize> {
        match *self {
            ActionSpace::Enumerated(_) => vec![mask as usize],
            ActionSpace::Factorized(g) => {
                (0..g).map(|u| 2 * u + (mask >> u & 1) as usize).collect()
            }
        }
    }
}

pub fn mask_bits(mask: u64, units: usize) -> Vec<bool> {
    (0..units).map(|g| mask >> g & 1 == 1).collect()
}

pub fn bits_mask(e: &[bool]) -> u64 {
    e.iter()
        .enumerate()
        .fold(0, |m, (g, &on)| m | (on as u64) << g)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Linear decay from `start` to `end` over `decay_steps` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if step >= self.decay_steps || self.decay_steps == 0 {
            return self.end;
        }
        self.start + (self.end - self.start) * step as f64 / self.decay_steps as f64
    }
}

/// ε-greedy choice over masks: uniform with probability ε, else greedy.
pub fn select_action_dqn<R: Rng + ?Sized>(
    space: &ActionSpace,
    q: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> u64 {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..space.num_masks())
    } else {
        space.greedy(q)
    }
}

/// Double-DQN agent over any [`QFunction`].
#[derive(Debug, Clone)]
pub struct DqnAgent<Q> {
    pub online: Q,
    pub target: Q,
    pub space: ActionSpace,
    pub gamma: f64,
    pub optimizer: Optimizer,
}

impl<Q: QFunction + Clone> DqnAgent<Q> {
    pub fn new(
        online: Q,
        space: ActionSpace,
        gamma: f64,
        lr: LearningRates,
        adam_theta: bool,
    ) -> Result<Self> {
        if online.num_outputs() != space.num_outputs() {
            return Err(Error::Size(format!(
                "Q-function has {} outputs, action space needs {}",
                online.num_outputs(),
                space.num_outputs()
            )));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Contract(format!("gamma {gamma} outside (0, 1]")));
        }
        let optimizer = Optimizer::new(&online, lr, adam_theta);
        Ok(Self {
            target: online.clone(),
            online,
            space,
            gamma,
            optimizer,
        })
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    /// Mean squared TD error of the batch and its parameter gradient.
    /// Factorized spaces average over units as well as items.
    pub fn loss_and_grad(&self, batch: &[&Transition<u64>]) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::Contract("empty batch".into()));
        }
        let heads = match self.space {
            ActionSpace::Enumerated(_) => 1,
            ActionSpace::Factorized(g) => g,
        };
        let n = (batch.len() * heads) as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.online.num_params()];
        for tr in batch {
            let q = self.online.q_values(&tr.state)?;
            let bootstrap = if tr.done {
                None
            } else {
                let q_next = self.online.q_values(&tr.next_state)?;
                let q_target = self.target.q_values(&tr.next_state)?;
                Some((q_next, q_target))
            };
            let mut dq = vec![0.0; q.len()];
            for (head, &idx) in self.space.selected(tr.action).iter().enumerate() {
                let future = match &bootstrap {
                    None => 0.0,
                    Some((q_next, q_target)) => match self.space {
                        ActionSpace::Enumerated(_) => q_target[argmax(q_next)],
                        ActionSpace::Factorized(_) => {
                            let pair = 2 * head;
                            q_target[pair + argmax(&q_next[pair..pair + 2])]
                        }
                    },
                };
                let y = tr.reward + self.gamma * future;
                let err = q[idx] - y;
                loss += err * err / n;
                dq[idx] += 2.0 * err / n;
            }
            if dq.iter().any(|d| *d != 0.0) {
                for (g, d) in grad.iter_mut().zip(self.online.backward(&tr.state, &dq)?) {
                    *g += d;
                }
            }
        }
        Ok((loss, grad))
    }

    /// One optimizer step on the TD loss; returns the pre-update loss.
    pub fn update(&mut self, batch: &[&Transition<u64>]) -> Result<f64> {
        let (loss, grad) = self.loss_and_grad(batch)?;
        self.optimizer.apply(&mut self.online, &grad);
        Ok(loss)
    }
}

/// See [`DqnAgent::update`].
pub fn dqn_update<Q: QFunction + Clone>(
    agent: &mut DqnAgent<Q>,
    batch: &[&Transition<u64>],
) -> Result<f64> {
    agent.update(batch)
}
