use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{reactive, GridCase};
use crate::error::{Error, Result};

const PREV_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchResult {
    pub p_gen: Vec<f64>,
    /// Load shed per bus.
    pub p_shed: Vec<f64>,
    /// Curtailment per renewable.
    pub p_curtail: Vec<f64>,
    /// Mandatory output left over after full curtailment. Non-zero only
    /// when committed minimum output exceeds load.
    pub surplus: f64,
    pub startup: Vec<bool>,
    pub shutdown: Vec<bool>,
}

impl DispatchResult {
    pub fn total_gen(&self) -> f64 {
        self.p_gen.iter().sum()
    }

    pub fn total_shed(&self) -> f64 {
        self.p_shed.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageCosts {
    pub fuel: f64,
    pub startup: f64,
    pub shed: f64,
}

impl StageCosts {
    pub fn total(&self) -> f64 {
        self.fuel + self.startup + self.shed
    }
}

/// Output bounds of every unit for this period given the commitment change.
pub fn unit_bounds(
    case: &GridCase,
    e_now: &[bool],
    e_prev: &[bool],
    prev_p: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let g = case.units.len();
    if e_now.len() != g || e_prev.len() != g || prev_p.len() != g {
        return Err(Error::Size(format!(
            "expected {g} unit entries, got e={}, e_prev={}, prev_p={}",
            e_now.len(),
            e_prev.len(),
            prev_p.len()
        )));
    }
    let mut out = Vec::with_capacity(g);
    for (i, u) in case.units.iter().enumerate() {
        let p = prev_p[i];
        let consistent = if e_prev[i] {
            p >= u.p_min - PREV_TOL && p <= u.p_max + PREV_TOL
        } else {
            p.abs() <= PREV_TOL
        };
        if !consistent {
            return Err(Error::Contract(format!(
                "prev_p[{i}] = {p} is inconsistent with previous status {}",
                e_prev[i]
            )));
        }
        out.push(match (e_prev[i], e_now[i]) {
            (_, false) => (0.0, 0.0),
            (false, true) => (u.p_min, u.p_max),
            (true, true) => ((p + u.ramp_down).max(u.p_min), (p + u.ramp_up).min(u.p_max)),
        });
    }
    Ok(out)
}

/// Deterministic economic dispatch of a commitment decision.
///
/// `loads` is per load element and `renewables` per renewable element, both
/// in MW. Committed units start at their lower bound and the remaining
/// demand is filled in ascending cost order (ties by index). Unmet demand is
/// shed pro-rata by bus load. Excess minimum output curtails renewables
/// pro-rata, and whatever remains is reported as `surplus`.
pub fn merit_order_dispatch(
    case: &GridCase,
    e_now: &[bool],
    e_prev: &[bool],
    prev_p: &[f64],
    loads: &[f64],
    renewables: &[f64],
) -> Result<DispatchResult> {
    if loads.len() != case.loads.len() || renewables.len() != case.renewables.len() {
        return Err(Error::Size(format!(
            "expected {} loads and {} renewables, got {} and {}",
            case.loads.len(),
            case.renewables.len(),
            loads.len(),
            renewables.len()
        )));
    }
    let bounds = unit_bounds(case, e_now, e_prev, prev_p)?;
    let total_load: f64 = loads.iter().sum();
    let total_ren: f64 = renewables.iter().sum();
    let mut p_gen: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let floor: f64 = p_gen.iter().sum();
    let mut residual = total_load - total_ren - floor;

    let mut p_curtail = vec![0.0; renewables.len()];
    let mut p_shed = vec![0.0; case.num_buses()];
    let mut surplus = 0.0;

    if residual >= 0.0 {
        let mut order: Vec<usize> = (0..p_gen.len()).collect();
        order.sort_by(|&a, &b| {
            case.units[a]
                .cost
                .total_cmp(&case.units[b].cost)
                .then(a.cmp(&b))
        });
        for i in order {
            if residual <= 0.0 {
                break;
            }
            let add = (bounds[i].1 - bounds[i].0).min(residual);
            p_gen[i] += add;
            residual -= add;
        }
        if residual > 0.0 && total_load > 0.0 {
            let by_bus = case.loads_by_bus(loads);
            for (s, l) in p_shed.iter_mut().zip(&by_bus) {
                *s = residual * l / total_load;
            }
        }
    } else {
        let excess = -residual;
        let cut = excess.min(total_ren);
        if cut > 0.0 {
            for (c, r) in p_curtail.iter_mut().zip(renewables) {
                *c = cut * r / total_ren;
            }
        }
        surplus = excess - cut;
    }

    let startup = e_now.iter().zip(e_prev).map(|(&n, &p)| n && !p).collect();
    let shutdown = e_now.iter().zip(e_prev).map(|(&n, &p)| !n && p).collect();
    Ok(DispatchResult {
        p_gen,
        p_shed,
        p_curtail,
        surplus,
        startup,
        shutdown,
    })
}

/// Fuel, startup and shedding cost of one period. Uncovered surplus is
/// priced at the shedding rate.
pub fn stage_costs(
    case: &GridCase,
    dispatch: &DispatchResult,
    e_prev: &[bool],
    e_now: &[bool],
) -> StageCosts {
    let fuel = case
        .units
        .iter()
        .zip(&dispatch.p_gen)
        .map(|(u, p)| u.cost * p)
        .sum();
    let startup = case
        .units
        .iter()
        .zip(e_now.iter().zip(e_prev))
        .filter(|(_, (&n, &p))| n && !p)
        .map(|(u, _)| u.startup_cost)
        .sum();
    let shed = case.costs.c_ls * (dispatch.total_shed() + dispatch.surplus);
    StageCosts {
        fuel,
        startup,
        shed,
    }
}

/// Per-bus active and reactive net injections of a dispatch.
///
/// `vpp` holds per-VPP output (empty for none); `extra` adds per-bus active
/// injections such as real-time balancing at the slack.
pub fn bus_injections(
    case: &GridCase,
    p_gen: &[f64],
    loads: &[f64],
    renewables: &[f64],
    curtail: &[f64],
    vpp: &[f64],
    shed: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = case.num_buses();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for ((u, &b), &pg) in case.units.iter().zip(case.unit_bus()).zip(p_gen) {
        p[b] += pg;
        q[b] += reactive(pg, u.power_factor);
    }
    for ((l, &b), &pl) in case.loads.iter().zip(case.load_bus()).zip(loads) {
        p[b] -= pl;
        q[b] -= reactive(pl, l.power_factor);
    }
    for (i, (r, &b)) in case.renewables.iter().zip(case.renewable_bus()).enumerate() {
        let out = renewables[i] - curtail.get(i).copied().unwrap_or(0.0);
        p[b] += out;
        q[b] += reactive(out, r.power_factor);
    }
    for ((v, &b), &pv) in case.vpps.iter().zip(case.vpp_bus()).zip(vpp) {
        p[b] += pv;
        q[b] += reactive(pv, v.power_factor);
    }
    // Shedding removes load, including its reactive draw at the bus power factor.
    let by_bus_pf = bus_load_pf(case);
    for (b, &s) in shed.iter().enumerate() {
        p[b] += s;
        q[b] += reactive(s, by_bus_pf[b]);
    }
    (p, q)
}

fn bus_load_pf(case: &GridCase) -> Vec<f64> {
    let mut pf = vec![1.0; case.num_buses()];
    for (l, &b) in case.loads.iter().zip(case.load_bus()) {
        pf[b] = pf[b].min(l.power_factor);
    }
    pf
}
