use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{LearningRates, Optimizer, Transition};
use crate::error::{Error, Result};
use crate::oracle::Mlp;
use crate::params::{groups_of, Model, ParamGroup};
use crate::qmodels::Policy;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;

/// Soft actor-critic with twin classical critics on `(state, action)`.
/// Critics see actions rescaled to `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct SacAgent<P> {
    pub actor: P,
    pub critics: [Mlp; 2],
    pub targets: [Mlp; 2],
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    /// Bootstrap each critic from its own target instead of the shared minimum.
    pub per_critic_target: bool,
    pub actor_opt: Optimizer,
    pub critic_opts: [Optimizer; 2],
    low: Vec<f64>,
    high: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SacParams {
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub per_critic_target: bool,
    pub actor_lr: LearningRates,
    pub critic_lr: f64,
    pub adam_theta: bool,
}

fn draw_noise<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

impl<P: Policy + Clone> SacAgent<P> {
    pub fn new(
        actor: P,
        critics: [Mlp; 2],
        low: Vec<f64>,
        high: Vec<f64>,
        params: SacParams,
    ) -> Result<Self> {
        let dim = actor.action_dim();
        if low.len() != dim || high.len() != dim {
            return Err(Error::Size("action bounds do not match the actor".into()));
        }
        for c in &critics {
            if c.in_dim() != actor.in_dim() + dim || c.out_dim() != 1 {
                return Err(Error::Size(format!(
                    "critic must map {} inputs to 1 output",
                    actor.in_dim() + dim
                )));
            }
        }
        if !(params.gamma >= 0.0 && params.gamma <= 1.0) || !(params.tau > 0.0 && params.tau <= 1.0)
        {
            return Err(Error::Contract(
                "gamma must lie in [0, 1] and tau in (0, 1]".into(),
            ));
        }
        let actor_opt = Optimizer::new(&actor, params.actor_lr, params.adam_theta);
        let critic_lr = LearningRates::uniform(params.critic_lr);
        let critic_opts = [
            Optimizer::new(&critics[0], critic_lr, true),
            Optimizer::new(&critics[1], critic_lr, true),
        ];
        Ok(Self {
            actor,
            targets: critics.clone(),
            critics,
            alpha: params.alpha,
            gamma: params.gamma,
            tau: params.tau,
            per_critic_target: params.per_critic_target,
            actor_opt,
            critic_opts,
            low,
            high,
        })
    }

    pub fn action_dim(&self) -> usize {
        self.low.len()
    }

    /// `[state, action rescaled to [-1, 1]]`.
    pub fn critic_input(&self, s: &[f64], a: &[f64]) -> Vec<f64> {
        let mut x = s.to_vec();
        x.extend(
            a.iter()
                .zip(self.low.iter().zip(&self.high))
                .map(|(a, (l, h))| 2.0 * (a - l) / (h - l) - 1.0),
        );
        x
    }

    fn q(net: &Mlp, x: &[f64]) -> Result<f64> {
        Ok(net.forward(x)?[0])
    }

    /// Bootstrapped targets `(y1, y2)` using next-state noise `noise[i]`.
    pub fn critic_targets(
        &self,
        batch: &[&Transition<Vec<f64>>],
        noise: &[Vec<f64>],
    ) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(batch.len());
        for (tr, xi) in batch.iter().zip(noise) {
            if tr.done || self.gamma == 0.0 {
                out.push((tr.reward, tr.reward));
                continue;
            }
            let next = self.actor.sample(&tr.next_state, Some(xi))?;
            let x = self.critic_input(&tr.next_state, &next.action);
            let q1 = Self::q(&self.targets[0], &x)?;
            let q2 = Self::q(&self.targets[1], &x)?;
            let ent = self.alpha * next.log_prob;
            if self.per_critic_target {
                out.push((
                    tr.reward + self.gamma * (q1 - ent),
                    tr.reward + self.gamma * (q2 - ent),
                ));
            } else {
                let y = tr.reward + self.gamma * (q1.min(q2) - ent);
                out.push((y, y));
            }
        }
        Ok(out)
    }

    /// Half mean squared errors of both critics and their gradients.
    pub fn critic_losses(
        &self,
        batch: &[&Transition<Vec<f64>>],
        noise: &[Vec<f64>],
    ) -> Result<([f64; 2], [Vec<f64>; 2])> {
        if batch.is_empty() {
            return Err(Error::Contract("empty batch".into()));
        }
        let targets = self.critic_targets(batch, noise)?;
        let n = batch.len() as f64;
        let mut losses = [0.0; 2];
        let mut grads = [
            vec![0.0; self.critics[0].num_params()],
            vec![0.0; self.critics[1].num_params()],
        ];
        for (tr, (y1, y2)) in batch.iter().zip(targets) {
            let x = self.critic_input(&tr.state, &tr.action);
            for (k, y) in [y1, y2].into_iter().enumerate() {
                let err = Self::q(&self.critics[k], &x)? - y;
                losses[k] += 0.5 * err * err / n;
                let g = self.critics[k].backward(&x, &[err / n])?.params;
                grads[k].iter_mut().zip(g).for_each(|(a, b)| *a += b);
            }
        }
        Ok((losses, grads))
    }

    /// One step on both critics; returns the pre-update losses.
    pub fn critic_update<R: Rng + ?Sized>(
        &mut self,
        batch: &[&Transition<Vec<f64>>],
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        let noise: Vec<Vec<f64>> = batch
            .iter()
            .map(|_| draw_noise(rng, self.action_dim()))
            .collect();
        let (losses, grads) = self.critic_losses(batch, &noise)?;
        for k in 0..2 {
            self.critic_opts[k].apply(&mut self.critics[k], &grads[k]);
        }
        Ok((losses[0], losses[1]))
    }

    /// Mean of `α·log π(a|s) − min_i Q_i(s, a)` over reparameterized
    /// actions `a(s, noise[i])`, and its actor gradient.
    pub fn actor_loss(
        &self,
        batch: &[&Transition<Vec<f64>>],
        noise: &[Vec<f64>],
    ) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::Contract("empty batch".into()));
        }
        let n = batch.len() as f64;
        let dim = self.action_dim();
        let sdim = self.actor.in_dim();
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.actor.num_params()];
        for (tr, xi) in batch.iter().zip(noise) {
            let sample = self.actor.sample(&tr.state, Some(xi))?;
            let x = self.critic_input(&tr.state, &sample.action);
            let q1 = Self::q(&self.critics[0], &x)?;
            let q2 = Self::q(&self.critics[1], &x)?;
            let k = if q2 < q1 { 1 } else { 0 };
            loss += (self.alpha * sample.log_prob - q1.min(q2)) / n;
            let dx = self.critics[k].backward(&x, &[1.0])?.input;
            let d_action: Vec<f64> = (0..dim)
                .map(|d| -dx[sdim + d] * 2.0 / (self.high[d] - self.low[d]) / n)
                .collect();
            let g = self
                .actor
                .backward(&tr.state, Some(xi), &d_action, self.alpha / n)?;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        Ok((loss, grad))
    }

    /// One actor step; `log_std` is clamped afterwards. Returns the
    /// pre-update loss.
    pub fn actor_update<R: Rng + ?Sized>(
        &mut self,
        batch: &[&Transition<Vec<f64>>],
        rng: &mut R,
    ) -> Result<f64> {
        let noise: Vec<Vec<f64>> = batch
            .iter()
            .map(|_| draw_noise(rng, self.action_dim()))
            .collect();
        let (loss, grad) = self.actor_loss(batch, &noise)?;
        let mut p = self.actor.params();
        self.actor_opt.step(&mut p, &grad);
        for (v, g) in p.iter_mut().zip(groups_of(&self.actor.layout())) {
            if g == ParamGroup::LogStd {
                *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
            }
        }
        self.actor.set_params(&p);
        Ok(loss)
    }

    /// `φ̂ ← τφ + (1 − τ)φ̂` for both critics.
    pub fn polyak(&mut self) {
        for k in 0..2 {
            let online = self.critics[k].params();
            let mut target = self.targets[k].params();
            for (t, o) in target.iter_mut().zip(&online) {
                *t = self.tau * o + (1.0 - self.tau) * *t;
            }
            self.targets[k].set_params(&target);
        }
    }

    /// Deterministic (mean) action.
    pub fn act(&self, s: &[f64]) -> Result<Vec<f64>> {
        Ok(self.actor.sample(s, None)?.action)
    }

    /// Stochastic action for exploration.
    pub fn explore<R: Rng + ?Sized>(&self, s: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let xi = draw_noise(rng, self.action_dim());
        Ok(self.actor.sample(s, Some(&xi))?.action)
    }
}

pub fn sac_critic_update<P: Policy + Clone, R: Rng + ?Sized>(
    agent: &mut SacAgent<P>,
    batch: &[&Transition<Vec<f64>>],
    rng: &mut R,
) -> Result<(f64, f64)> {
    agent.critic_update(batch, rng)
}

pub fn sac_actor_update<P: Policy + Clone, R: Rng + ?Sized>(
    agent: &mut SacAgent<P>,
    batch: &[&Transition<Vec<f64>>],
    rng: &mut R,
) -> Result<f64> {
    agent.actor_update(batch, rng)
}
