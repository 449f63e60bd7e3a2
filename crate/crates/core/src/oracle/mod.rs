//! Exact references and baselines: exhaustive unit-commitment search,
//! grid-search VPP dispatch, the priority-list heuristic and the classical
//! MLP approximators.

mod brute;
mod mlp;
mod priority;
mod vpp;

pub use brute::{brute_force_uc, mask_to_commitment, OracleResult, MAX_SEQUENCES};
pub use mlp::{mlp_forward, mlp_grads, Mlp, MlpActor, MlpGrads, MlpQ};
pub use priority::{priority_list, priority_order, PriorityResult, RESERVE_MARGIN};
pub use vpp::{grid_search_vpp, MAX_GRID_POINTS, MAX_VPPS};
