//! Power-system data model, linearized network evaluation and economic
//! dispatch.

mod case;
mod dispatch;
mod network;

pub use case::{
    load_case, reactive, Branch, Bus, CaseDocument, Costs, GridCase, Load, Meta, Renewable,
    RenewableKind, Unit, Vpp,
};
pub use dispatch::{
    bus_injections, merit_order_dispatch, stage_costs, unit_bounds, DispatchResult, StageCosts,
};
pub use network::{evaluate_network, flow_matrices, zero_injections, FlowMatrices, NetworkEval};
