//! Quantum or classical approximators behind one concrete type, so the
//! command layer can pick the kind from a config file.

use qcommit_core::oracle::{MlpActor, MlpQ};
use qcommit_core::params::{Model, ParamBlock};
use qcommit_core::qmodels::{ActorSample, AnsatzSpec, Policy, QFunction, QNetwork, QuantumActor};
use qcommit_core::Result;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Quantum,
    Classical,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Quantum => "quantum",
            AgentKind::Classical => "classical",
        }
    }
}

/// Architecture of either approximator kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub num_qubits: usize,
    pub layers: usize,
    #[serde(default)]
    pub per_qubit_angles: bool,
    /// Hidden widths of the classical variant.
    pub hidden: Vec<usize>,
}

impl ModelSpec {
    pub fn ansatz(&self) -> AnsatzSpec {
        let mut a = AnsatzSpec::new(self.num_qubits, self.layers);
        a.per_qubit_angles = self.per_qubit_angles;
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QModel {
    Quantum(QNetwork),
    Classical(MlpQ),
}

impl QModel {
    pub fn random<R: Rng + ?Sized>(
        kind: AgentKind,
        spec: &ModelSpec,
        in_dim: usize,
        outputs: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(match kind {
            AgentKind::Quantum => {
                QModel::Quantum(QNetwork::random(in_dim, spec.ansatz(), outputs, rng)?)
            }
            AgentKind::Classical => {
                QModel::Classical(MlpQ::random(in_dim, &spec.hidden, outputs, rng)?)
            }
        })
    }

    pub fn kind(&self) -> AgentKind {
        match self {
            QModel::Quantum(_) => AgentKind::Quantum,
            QModel::Classical(_) => AgentKind::Classical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActorModel {
    Quantum(QuantumActor),
    Classical(MlpActor),
}

impl ActorModel {
    #[allow(clippy::too_many_arguments)]
    pub fn random<R: Rng + ?Sized>(
        kind: AgentKind,
        spec: &ModelSpec,
        in_dim: usize,
        low: Vec<f64>,
        high: Vec<f64>,
        log_std_init: f64,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(match kind {
            AgentKind::Quantum => ActorModel::Quantum(QuantumActor::random(
                in_dim,
                spec.ansatz(),
                low,
                high,
                log_std_init,
                rng,
            )?),
            AgentKind::Classical => ActorModel::Classical(MlpActor::random(
                in_dim,
                &spec.hidden,
                low,
                high,
                log_std_init,
                rng,
            )?),
        })
    }
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Self::Quantum($m) => $e,
            Self::Classical($m) => $e,
        }
    };
}

impl Model for QModel {
    fn layout(&self) -> Vec<ParamBlock> {
        delegate!(self, m => m.layout())
    }
    fn params(&self) -> Vec<f64> {
        delegate!(self, m => m.params())
    }
    fn set_params(&mut self, flat: &[f64]) {
        delegate!(self, m => m.set_params(flat))
    }
}

impl QFunction for QModel {
    fn in_dim(&self) -> usize {
        delegate!(self, m => QFunction::in_dim(m))
    }
    fn num_outputs(&self) -> usize {
        delegate!(self, m => m.num_outputs())
    }
    fn q_values(&self, s: &[f64]) -> Result<Vec<f64>> {
        delegate!(self, m => m.q_values(s))
    }
    fn backward(&self, s: &[f64], dq: &[f64]) -> Result<Vec<f64>> {
        delegate!(self, m => QFunction::backward(m, s, dq))
    }
}

impl Model for ActorModel {
    fn layout(&self) -> Vec<ParamBlock> {
        delegate!(self, m => m.layout())
    }
    fn params(&self) -> Vec<f64> {
        delegate!(self, m => m.params())
    }
    fn set_params(&mut self, flat: &[f64]) {
        delegate!(self, m => m.set_params(flat))
    }
}

impl Policy for ActorModel {
    fn in_dim(&self) -> usize {
        delegate!(self, m => Policy::in_dim(m))
    }
    fn action_dim(&self) -> usize {
        delegate!(self, m => m.action_dim())
    }
    fn sample(&self, s: &[f64], noise: Option<&[f64]>) -> Result<ActorSample> {
        delegate!(self, m => m.sample(s, noise))
    }
    fn backward(
        &self,
        s: &[f64],
        noise: Option<&[f64]>,
        d_action: &[f64],
        d_log_prob: f64,
    ) -> Result<Vec<f64>> {
        delegate!(self, m => Policy::backward(m, s, noise, d_action, d_log_prob))
    }
    fn log_prob_of(&self, s: &[f64], action: &[f64]) -> Result<f64> {
        delegate!(self, m => m.log_prob_of(s, action))
    }
}
