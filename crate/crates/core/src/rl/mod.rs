//! Learning algorithms: double DQN for day-ahead commitment and soft
//! actor-critic for real-time VPP correction, with replay and optimizer.

mod dqn;
mod optim;
mod replay;
mod sac;
mod train;

pub use dqn::{
    argmax, bits_mask, dqn_update, mask_bits, select_action_dqn, ActionSpace, DqnAgent,
    EpsilonSchedule, MAX_ENUMERATED_UNITS,
};
pub use optim::{LearningRates, Optimizer, ADAM_EPS, BETA1, BETA2};
pub use replay::{ReplayBuffer, Transition};
pub use sac::{sac_actor_update, sac_critic_update, SacAgent, SacParams, LOG_STD_MAX, LOG_STD_MIN};
pub use train::{
    eval_scenarios, evaluate_rt, greedy_commitment, plan_records, train_day_ahead, train_real_time,
    CurveRow, DaTrainOutput, DqnConfig, RtEval, RtTrainOutput, SacConfig, StepRecord,
    EVAL_SCENARIO_OFFSET, WARMUP_BATCHES,
};
