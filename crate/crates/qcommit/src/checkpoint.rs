//! Checkpoint documents: model parameters, optimizer moments and the
//! configuration that produced them.

use qcommit_core::oracle::Mlp;
use qcommit_core::params::Model;
use qcommit_core::qmodels::{Policy, QFunction};
use qcommit_core::rl::{ActionSpace, DqnAgent, Optimizer, SacAgent};
use serde::{Deserialize, Serialize};

use crate::agents::{ActorModel, QModel};
use crate::config::{DaRunConfig, RtRunConfig};
use crate::error::{CliError, CliResult};

pub const DA_FORMAT: &str = "qcommit-da-checkpoint/1";
pub const RT_FORMAT: &str = "qcommit-rt-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    /// State features.
    pub n_inputs: usize,
    /// Encoder outputs (qubits), or first hidden width for classical models.
    pub n_encoded: usize,
    pub layers: usize,
    pub num_qubits: usize,
    /// Q-value outputs or action dimension.
    pub num_outputs: usize,
}

impl Dims {
    fn of(
        cfg_model: &crate::agents::ModelSpec,
        n_inputs: usize,
        num_outputs: usize,
        quantum: bool,
    ) -> Self {
        let n_encoded = if quantum {
            cfg_model.num_qubits
        } else {
            cfg_model.hidden.first().copied().unwrap_or(0)
        };
        let layers = if quantum {
            cfg_model.layers
        } else {
            cfg_model.hidden.len()
        };
        Dims {
            n_inputs,
            n_encoded,
            layers,
            num_qubits: if quantum { cfg_model.num_qubits } else { 0 },
            num_outputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaCheckpoint {
    pub format: String,
    pub dims: Dims,
    pub space: ActionSpace,
    pub gamma: f64,
    pub online: QModel,
    pub target: QModel,
    pub optimizer: Optimizer,
    pub config: DaRunConfig,
}

impl DaCheckpoint {
    pub fn new(agent: &DqnAgent<QModel>, config: &DaRunConfig) -> Self {
        let quantum = matches!(agent.online, QModel::Quantum(_));
        Self {
            format: DA_FORMAT.into(),
            dims: Dims::of(
                &config.model,
                agent.online.in_dim(),
                agent.online.num_outputs(),
                quantum,
            ),
            space: agent.space,
            gamma: agent.gamma,
            online: agent.online.clone(),
            target: agent.target.clone(),
            optimizer: agent.optimizer.clone(),
            config: config.clone(),
        }
    }

    pub fn into_agent(self) -> CliResult<DqnAgent<QModel>> {
        if self.format != DA_FORMAT {
            return Err(CliError::Contract(format!(
                "unsupported checkpoint format {:?}",
                self.format
            )));
        }
        if self.online.num_outputs() != self.space.num_outputs()
            || self.online.params().len() != self.target.params().len()
        {
            return Err(CliError::Contract(
                "checkpoint networks do not match the action space".into(),
            ));
        }
        Ok(DqnAgent {
            online: self.online,
            target: self.target,
            space: self.space,
            gamma: self.gamma,
            optimizer: self.optimizer,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtCheckpoint {
    pub format: String,
    pub dims: Dims,
    pub actor: ActorModel,
    pub critics: [Mlp; 2],
    pub targets: [Mlp; 2],
    pub actor_optimizer: Optimizer,
    pub critic_optimizers: [Optimizer; 2],
    pub day: usize,
    pub commitment: Vec<Vec<bool>>,
    pub config: RtRunConfig,
}

impl RtCheckpoint {
    pub fn new(
        agent: &SacAgent<ActorModel>,
        commitment: &[Vec<bool>],
        config: &RtRunConfig,
    ) -> Self {
        let quantum = matches!(agent.actor, ActorModel::Quantum(_));
        Self {
            format: RT_FORMAT.into(),
            dims: Dims::of(
                &config.model,
                agent.actor.in_dim(),
                agent.actor.action_dim(),
                quantum,
            ),
            actor: agent.actor.clone(),
            critics: agent.critics.clone(),
            targets: agent.targets.clone(),
            actor_optimizer: agent.actor_opt.clone(),
            critic_optimizers: agent.critic_opts.clone(),
            day: config.day,
            commitment: commitment.to_vec(),
            config: config.clone(),
        }
    }
}
