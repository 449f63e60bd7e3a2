use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::params::{groups_of, Model, ParamGroup};

/// Per-group learning rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningRates {
    pub theta: f64,
    pub readout: f64,
    pub encoder: f64,
    pub log_std: f64,
    pub weights: f64,
}

impl LearningRates {
    pub fn uniform(lr: f64) -> Self {
        Self {
            theta: lr,
            readout: lr,
            encoder: lr,
            log_std: lr,
            weights: lr,
        }
    }

    pub fn of(&self, g: ParamGroup) -> f64 {
        match g {
            ParamGroup::Theta => self.theta,
            ParamGroup::Readout => self.readout,
            ParamGroup::Encoder => self.encoder,
            ParamGroup::LogStd => self.log_std,
            ParamGroup::Weights => self.weights,
        }
    }
}

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Bias-corrected Adam for classical groups; plain gradient descent for
/// circuit angles unless `adam_theta` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub lr: LearningRates,
    pub adam_theta: bool,
    groups: Vec<ParamGroup>,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Optimizer {
    pub fn new<M: Model + ?Sized>(model: &M, lr: LearningRates, adam_theta: bool) -> Self {
        let groups = groups_of(&model.layout());
        let n = groups.len();
        Self {
            lr,
            adam_theta,
            groups,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Descends along `grad`. An all-zero gradient is a no-op.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.groups.len(), "parameter count changed");
        assert_eq!(grad.len(), self.groups.len(), "gradient length mismatch");
        if grad.iter().all(|g| *g == 0.0) {
            return;
        }
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t as i32);
        let c2 = 1.0 - BETA2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            let group = self.groups[i];
            let lr = self.lr.of(group);
            if group == ParamGroup::Theta && !self.adam_theta {
                params[i] -= lr * g;
                continue;
            }
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }

    /// Reads, steps and writes back a model's parameters.
    pub fn apply<M: Model + ?Sized>(&mut self, model: &mut M, grad: &[f64]) {
        let mut p = model.params();
        self.step(&mut p, grad);
        model.set_params(&p);
    }
}
