use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::GridCase;
use crate::error::{Error, Result};

/// Linear sensitivities of a case. `ptdf` is branch × bus; `volt_p` and
/// `volt_q` are bus × bus. All are zero in the slack (bus 0) column.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrices {
    pub ptdf: DMatrix<f64>,
    pub volt_p: DMatrix<f64>,
    pub volt_q: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkEval {
    pub flows: Vec<f64>,
    pub voltages: Vec<f64>,
    pub branch_violation: f64,
    pub voltage_violation: f64,
}

/// DC power-transfer distribution factors plus a linearized voltage model.
///
/// Voltage drops use the squared-magnitude drop `2(r·P + x·Q)` per branch,
/// with reactive flows distributed by the same PTDF. On a meshed network the
/// branch drops are reconciled by a reactance-weighted least-squares fit,
/// which is exact on radial networks.
pub fn flow_matrices(case: &GridCase) -> Result<FlowMatrices> {
    let n = case.num_buses();
    let ends = case.branch_ends();
    let m = ends.len();
    let mut incidence = DMatrix::zeros(m, n);
    let mut b: DMatrix<f64> = DMatrix::zeros(n, n);
    for (l, (&(f, t), br)) in ends.iter().zip(&case.branches).enumerate() {
        incidence[(l, f)] = 1.0;
        incidence[(l, t)] = -1.0;
        let y = 1.0 / br.x;
        b[(f, f)] += y;
        b[(t, t)] += y;
        b[(f, t)] -= y;
        b[(t, f)] -= y;
    }
    let mut xinv = DMatrix::zeros(n, n);
    if n > 1 {
        let reduced: DMatrix<f64> = b.view((1, 1), (n - 1, n - 1)).clone_owned();
        let inv = reduced.lu().try_inverse().ok_or_else(|| {
            Error::Topology(format!(
                "reduced susceptance matrix of {n} buses is singular"
            ))
        })?;
        if inv.iter().any(|v: &f64| !v.is_finite()) {
            return Err(Error::Topology(
                "reduced susceptance matrix is ill-conditioned".into(),
            ));
        }
        xinv.view_mut((1, 1), (n - 1, n - 1)).copy_from(&inv);
    }
    let susceptance = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        case.branches.iter().map(|br| 1.0 / br.x),
    ));
    let ptdf = &susceptance * &incidence * &xinv;

    let fit = &xinv * incidence.transpose() * &susceptance;
    let base = case.meta.base_mva;
    let r = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        case.branches.iter().map(|br| br.r),
    ));
    let x = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        case.branches.iter().map(|br| br.x),
    ));
    // Voltage magnitude deviation is half the squared-magnitude deviation,
    // cancelling the factor 2 of the branch drop.
    let volt_p = &fit * r * &ptdf / base;
    let volt_q = &fit * x * &ptdf / base;
    Ok(FlowMatrices {
        ptdf,
        volt_p,
        volt_q,
    })
}

fn mul(mat: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..mat.nrows())
        .map(|i| mat.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Flows, voltages and limit violations for per-bus net injections (MW and
/// MVAr). Any imbalance is absorbed by the slack bus.
pub fn evaluate_network(
    case: &GridCase,
    matrices: &FlowMatrices,
    injections: &[f64],
    q_injections: &[f64],
) -> Result<NetworkEval> {
    let n = case.num_buses();
    if injections.len() != n || q_injections.len() != n {
        return Err(Error::Size(format!(
            "expected {n} bus injections, got {} active and {} reactive",
            injections.len(),
            q_injections.len()
        )));
    }
    let flows = mul(&matrices.ptdf, injections);
    let dp = mul(&matrices.volt_p, injections);
    let dq = mul(&matrices.volt_q, q_injections);
    let voltages: Vec<f64> = dp.iter().zip(&dq).map(|(a, b)| 1.0 + a + b).collect();
    let branch_violation = flows
        .iter()
        .zip(&case.branches)
        .map(|(f, br)| (f.abs() - br.flow_limit).max(0.0))
        .sum();
    let voltage_violation = voltages
        .iter()
        .zip(&case.buses)
        .map(|(v, bus)| (bus.voltage_min - v).max(0.0) + (v - bus.voltage_max).max(0.0))
        .sum();
    Ok(NetworkEval {
        flows,
        voltages,
        branch_violation,
        voltage_violation,
    })
}

/// Per-bus zero vector, convenient for building injections.
pub fn zero_injections(case: &GridCase) -> Vec<f64> {
    vec![0.0; case.num_buses()]
}
