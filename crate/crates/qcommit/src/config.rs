use std::path::PathBuf;

use qcommit_core::envs::ScenarioGenerator;
use qcommit_core::rl::{DqnConfig, SacConfig};
use serde::{Deserialize, Serialize};

use crate::agents::{AgentKind, ModelSpec};

/// Day-ahead training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaRunConfig {
    pub agent: AgentKind,
    pub model: ModelSpec,
    pub train: DqnConfig,
}

/// Real-time training run on top of a frozen day-ahead policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtRunConfig {
    pub agent: AgentKind,
    pub model: ModelSpec,
    pub critic_hidden: Vec<usize>,
    pub log_std_init: f64,
    /// Profile day whose plan is corrected in real time.
    #[serde(default)]
    pub day: usize,
    /// Held-out scenarios for the final evaluation.
    pub eval_scenarios: usize,
    pub train: SacConfig,
}

/// One learned method of the comparison harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub da: DaRunConfig,
    /// Skipped on cases without VPPs.
    pub rt: RtRunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Realized-scenario distribution of the evaluation days.
    pub scenario: ScenarioGenerator,
    /// Number of seeded scenario days.
    pub seeds: usize,
    pub classical: MethodConfig,
    pub quantum: MethodConfig,
}

/// Echo of a command invocation, written as `config.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig<'a, C: Serialize> {
    pub command: &'a str,
    pub case: PathBuf,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub da_checkpoint: Option<PathBuf>,
    pub config: &'a C,
}

pub const DEFAULT_COMPARE: &str = include_str!("../configs/compare.json");

pub fn default_compare() -> CompareConfig {
    serde_json::from_str(DEFAULT_COMPARE).expect("bundled compare config parses")
}
