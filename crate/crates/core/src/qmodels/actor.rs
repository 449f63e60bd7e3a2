use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnsatzSpec, LinearEncoder, Policy, Trunk};
use crate::error::{Error, Result};
use crate::params::{Cursor, Model, ParamBlock, ParamGroup};

/// Stabilizer inside the tanh log-Jacobian, `log(1 - tanh²u + 1e-6)`.
pub const SQUASH_EPS: f64 = 1e-6;

/// One draw from a squashed Gaussian policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorSample {
    /// Action in physical units (MW), inside `[low, high]`.
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub mean: Vec<f64>,
    /// Pre-squash Gaussian sample `u = mean + exp(log_std) * noise`.
    pub pre_squash: Vec<f64>,
}

/// Maps a Gaussian mean/log-std and standard-normal noise to a bounded action
/// and its log-density. `noise = None` is the deterministic mode.
pub fn squash_forward(
    mean: &[f64],
    log_std: &[f64],
    noise: Option<&[f64]>,
    low: &[f64],
    high: &[f64],
) -> ActorSample {
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    let mut action = Vec::with_capacity(mean.len());
    let mut pre_squash = Vec::with_capacity(mean.len());
    let mut log_prob = 0.0;
    for d in 0..mean.len() {
        let xi = noise.map_or(0.0, |n| n[d]);
        let u = mean[d] + log_std[d].exp() * xi;
        let t = u.tanh();
        action.push(low[d] + 0.5 * (t + 1.0) * (high[d] - low[d]));
        pre_squash.push(u);
        log_prob += -0.5 * xi * xi - log_std[d] - half_log_2pi - (1.0 - t * t + SQUASH_EPS).ln();
    }
    ActorSample {
        action,
        log_prob,
        mean: mean.to_vec(),
        pre_squash,
    }
}

/// Backward pass of [`squash_forward`]: returns `(d_mean, d_log_std)`.
pub fn squash_backward(
    sample: &ActorSample,
    log_std: &[f64],
    noise: Option<&[f64]>,
    low: &[f64],
    high: &[f64],
    d_action: &[f64],
    d_log_prob: f64,
) -> (Vec<f64>, Vec<f64>) {
    let dim = sample.mean.len();
    let mut d_mean = vec![0.0; dim];
    let mut d_log_std = vec![0.0; dim];
    for d in 0..dim {
        let xi = noise.map_or(0.0, |n| n[d]);
        let t = sample.pre_squash[d].tanh();
        let sech2 = 1.0 - t * t;
        let du = d_action[d] * 0.5 * (high[d] - low[d]) * sech2
            + d_log_prob * 2.0 * t * sech2 / (sech2 + SQUASH_EPS);
        d_mean[d] = du;
        d_log_std[d] = du * log_std[d].exp() * xi - d_log_prob;
    }
    (d_mean, d_log_std)
}

/// Log-density of a physical `action` under mean/log-std.
pub(crate) fn squash_log_prob(
    mean: &[f64],
    log_std: &[f64],
    action: &[f64],
    low: &[f64],
    high: &[f64],
) -> f64 {
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    let lim = 1.0 - 1e-12;
    (0..mean.len())
        .map(|d| {
            let t = (2.0 * (action[d] - low[d]) / (high[d] - low[d]) - 1.0).clamp(-lim, lim);
            let xi = (t.atanh() - mean[d]) / log_std[d].exp();
            -0.5 * xi * xi - log_std[d] - half_log_2pi - (1.0 - t * t + SQUASH_EPS).ln()
        })
        .sum()
}

/// Quantum actor: the first `action_dim` per-qubit expectations are the
/// Gaussian means; `log_std` is a classical trainable vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumActor {
    pub encoder: LinearEncoder,
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    pub log_std: Vec<f64>,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
}

impl QuantumActor {
    pub fn new(
        encoder: LinearEncoder,
        ansatz: AnsatzSpec,
        theta: Vec<f64>,
        log_std: Vec<f64>,
        action_low: Vec<f64>,
        action_high: Vec<f64>,
    ) -> Result<Self> {
        Trunk::new(encoder.clone(), ansatz, theta.clone())?;
        let dim = log_std.len();
        if dim > ansatz.num_qubits {
            return Err(Error::Size(format!(
                "action dim {dim} exceeds {} qubits",
                ansatz.num_qubits
            )));
        }
        if action_low.len() != dim || action_high.len() != dim {
            return Err(Error::Size("action bounds must match action dim".into()));
        }
        if action_low.iter().zip(&action_high).any(|(l, h)| !(l < h)) {
            return Err(Error::Size("action_low must be below action_high".into()));
        }
        Ok(Self {
            encoder,
            ansatz,
            theta,
            log_std,
            action_low,
            action_high,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        ansatz: AnsatzSpec,
        action_low: Vec<f64>,
        action_high: Vec<f64>,
        initial_log_std: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let encoder = LinearEncoder::random(in_dim, ansatz.num_qubits, rng);
        let theta = Trunk::random_theta(&ansatz, rng);
        let log_std = vec![initial_log_std; action_low.len()];
        Self::new(encoder, ansatz, theta, log_std, action_low, action_high)
    }

    fn trunk(&self) -> Result<Trunk> {
        Trunk::new(self.encoder.clone(), self.ansatz, self.theta.clone())
    }

    fn check_noise(&self, noise: Option<&[f64]>) -> Result<()> {
        match noise {
            Some(n) if n.len() != self.log_std.len() => Err(Error::Size(format!(
                "noise length {} != action dim {}",
                n.len(),
                self.log_std.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Samples the quantum actor (see [`Policy::sample`]).
pub fn actor_forward(
    actor: &QuantumActor,
    s: &[f64],
    noise: Option<&[f64]>,
) -> Result<ActorSample> {
    actor.sample(s, noise)
}

impl Model for QuantumActor {
    fn layout(&self) -> Vec<ParamBlock> {
        vec![
            ParamBlock {
                group: ParamGroup::Theta,
                len: self.theta.len(),
            },
            ParamBlock {
                group: ParamGroup::LogStd,
                len: self.log_std.len(),
            },
            ParamBlock {
                group: ParamGroup::Encoder,
                len: self.encoder.weights.len() + self.encoder.bias.len(),
            },
        ]
    }

    fn params(&self) -> Vec<f64> {
        let mut out = self.theta.clone();
        out.extend_from_slice(&self.log_std);
        out.extend_from_slice(&self.encoder.weights);
        out.extend_from_slice(&self.encoder.bias);
        out
    }

    fn set_params(&mut self, flat: &[f64]) {
        let mut c = Cursor::new(flat);
        c.fill(&mut self.theta);
        c.fill(&mut self.log_std);
        c.fill(&mut self.encoder.weights);
        c.fill(&mut self.encoder.bias);
    }
}

impl Policy for QuantumActor {
    fn in_dim(&self) -> usize {
        self.encoder.in_dim
    }

    fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    fn sample(&self, s: &[f64], noise: Option<&[f64]>) -> Result<ActorSample> {
        self.check_noise(noise)?;
        let pass = self.trunk()?.forward(s)?;
        let mean = &pass.z[..self.action_dim()];
        Ok(squash_forward(
            mean,
            &self.log_std,
            noise,
            &self.action_low,
            &self.action_high,
        ))
    }

    fn backward(
        &self,
        s: &[f64],
        noise: Option<&[f64]>,
        d_action: &[f64],
        d_log_prob: f64,
    ) -> Result<Vec<f64>> {
        self.check_noise(noise)?;
        if d_action.len() != self.action_dim() {
            return Err(Error::Size("d_action length mismatch".into()));
        }
        let trunk = self.trunk()?;
        let pass = trunk.forward(s)?;
        let dim = self.action_dim();
        let sample = squash_forward(
            &pass.z[..dim],
            &self.log_std,
            noise,
            &self.action_low,
            &self.action_high,
        );
        let (d_mean, d_log_std) = squash_backward(
            &sample,
            &self.log_std,
            noise,
            &self.action_low,
            &self.action_high,
            d_action,
            d_log_prob,
        );
        let mut dz = vec![0.0; self.ansatz.num_qubits];
        dz[..dim].copy_from_slice(&d_mean);
        let (d_theta, d_enc_w, d_enc_b) = trunk.backward(s, &pass, &dz)?;
        let mut out = d_theta;
        out.extend_from_slice(&d_log_std);
        out.extend_from_slice(&d_enc_w);
        out.extend_from_slice(&d_enc_b);
        Ok(out)
    }

    fn log_prob_of(&self, s: &[f64], action: &[f64]) -> Result<f64> {
        if action.len() != self.action_dim() {
            return Err(Error::Size("action length mismatch".into()));
        }
        let pass = self.trunk()?.forward(s)?;
        Ok(squash_log_prob(
            &pass.z[..self.action_dim()],
            &self.log_std,
            action,
            &self.action_low,
            &self.action_high,
        ))
    }
}
