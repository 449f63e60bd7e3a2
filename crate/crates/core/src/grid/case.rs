use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn unity() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    pub periods: usize,
    pub base_mva: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: usize,
    pub voltage_min: f64,
    pub voltage_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_profile_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub flow_limit: f64,
}

/// Thermal unit. `ramp_down` is a signed (non-positive) limit on the
/// period-to-period output change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Unit {
    pub bus: usize,
    pub cost: f64,
    pub startup_cost: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub initial_status: bool,
    #[serde(default = "unity")]
    pub power_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vpp {
    pub bus: usize,
    pub p_max: f64,
    pub cost: f64,
    #[serde(default = "unity")]
    pub power_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewableKind {
    Pv,
    Wind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Renewable {
    pub bus: usize,
    pub kind: RenewableKind,
    pub forecast_profile: Vec<f64>,
    #[serde(default = "unity")]
    pub power_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub bus: usize,
    pub forecast_profile: Vec<f64>,
    pub power_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Costs {
    /// Load-shedding price, $/MWh. Also prices uncovered surplus.
    pub c_ls: f64,
    /// Voltage-violation price, $/p.u.
    pub lambda_v: f64,
    /// Branch-overload price, $/MW.
    pub lambda_b: f64,
}

/// The on-disk case document. Profiles hold `days × periods` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseDocument {
    pub meta: Meta,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub units: Vec<Unit>,
    #[serde(default)]
    pub vpps: Vec<Vpp>,
    #[serde(default)]
    pub renewables: Vec<Renewable>,
    pub loads: Vec<Load>,
    pub costs: Costs,
}

/// A validated case with bus references resolved to positions. Bus 0 in
/// document order is the slack.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCase {
    pub meta: Meta,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub units: Vec<Unit>,
    pub vpps: Vec<Vpp>,
    pub renewables: Vec<Renewable>,
    pub loads: Vec<Load>,
    pub costs: Costs,
    pub(crate) branch_ends: Vec<(usize, usize)>,
    pub(crate) unit_bus: Vec<usize>,
    pub(crate) vpp_bus: Vec<usize>,
    pub(crate) renewable_bus: Vec<usize>,
    pub(crate) load_bus: Vec<usize>,
    days: usize,
}

/// Validates a document and resolves its bus references.
pub fn load_case(doc: CaseDocument) -> Result<GridCase> {
    GridCase::from_document(doc)
}

fn check(ok: bool, path: impl FnOnce() -> String, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::validation(path(), message))
    }
}

fn finite_nonneg(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

fn valid_pf(pf: f64) -> bool {
    pf > 0.0 && pf <= 1.0
}

impl GridCase {
    pub fn from_document(doc: CaseDocument) -> Result<Self> {
        let CaseDocument {
            meta,
            buses,
            branches,
            units,
            vpps,
            renewables,
            loads,
            costs,
        } = doc;
        check(
            meta.periods >= 1,
            || "meta.periods".into(),
            "must be at least 1",
        )?;
        check(
            meta.base_mva.is_finite() && meta.base_mva > 0.0,
            || "meta.base_mva".into(),
            "must be positive",
        )?;
        check(
            !buses.is_empty(),
            || "buses".into(),
            "at least one bus is required",
        )?;

        let mut index = BTreeMap::new();
        for (i, bus) in buses.iter().enumerate() {
            check(
                index.insert(bus.id, i).is_none(),
                || format!("buses[{i}].id"),
                "duplicate bus id",
            )?;
            check(
                bus.voltage_min.is_finite()
                    && bus.voltage_max.is_finite()
                    && bus.voltage_min < bus.voltage_max,
                || format!("buses[{i}].voltage_min"),
                "voltage_min must be below voltage_max",
            )?;
        }
        let resolve = |id: usize, path: String| -> Result<usize> {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| Error::validation(path, format!("unknown bus id {id}")))
        };

        let mut branch_ends = Vec::with_capacity(branches.len());
        for (i, br) in branches.iter().enumerate() {
            let f = resolve(br.from, format!("branches[{i}].from"))?;
            let t = resolve(br.to, format!("branches[{i}].to"))?;
            check(
                f != t,
                || format!("branches[{i}].to"),
                "branch endpoints must differ",
            )?;
            check(
                br.x.is_finite() && br.x > 0.0,
                || format!("branches[{i}].x"),
                "reactance must be positive",
            )?;
            check(
                finite_nonneg(br.r),
                || format!("branches[{i}].r"),
                "resistance must be non-negative",
            )?;
            check(
                br.flow_limit.is_finite() && br.flow_limit > 0.0,
                || format!("branches[{i}].flow_limit"),
                "flow limit must be positive",
            )?;
            branch_ends.push((f, t));
        }
        check_connected(buses.len(), &branch_ends)?;

        let mut unit_bus = Vec::with_capacity(units.len());
        for (i, u) in units.iter().enumerate() {
            unit_bus.push(resolve(u.bus, format!("units[{i}].bus"))?);
            check(
                finite_nonneg(u.p_min),
                || format!("units[{i}].p_min"),
                "must be non-negative",
            )?;
            check(
                u.p_max.is_finite() && u.p_min <= u.p_max,
                || format!("units[{i}].p_max"),
                "p_min must not exceed p_max",
            )?;
            check(
                finite_nonneg(u.ramp_up),
                || format!("units[{i}].ramp_up"),
                "must be non-negative",
            )?;
            check(
                u.ramp_down.is_finite() && u.ramp_down <= 0.0,
                || format!("units[{i}].ramp_down"),
                "signed ramp-down limit must be non-positive",
            )?;
            check(
                finite_nonneg(u.cost),
                || format!("units[{i}].cost"),
                "must be non-negative",
            )?;
            check(
                finite_nonneg(u.startup_cost),
                || format!("units[{i}].startup_cost"),
                "must be non-negative",
            )?;
            check(
                valid_pf(u.power_factor),
                || format!("units[{i}].power_factor"),
                "must lie in (0, 1]",
            )?;
        }

        let mut vpp_bus = Vec::with_capacity(vpps.len());
        for (i, v) in vpps.iter().enumerate() {
            vpp_bus.push(resolve(v.bus, format!("vpps[{i}].bus"))?);
            check(
                finite_nonneg(v.p_max),
                || format!("vpps[{i}].p_max"),
                "must be non-negative",
            )?;
            check(
                finite_nonneg(v.cost),
                || format!("vpps[{i}].cost"),
                "must be non-negative",
            )?;
            check(
                valid_pf(v.power_factor),
                || format!("vpps[{i}].power_factor"),
                "must lie in (0, 1]",
            )?;
        }

        let mut profile_len = None;
        let mut check_profile = |values: &[f64], path: String| -> Result<()> {
            let expected = *profile_len.get_or_insert(values.len());
            check(
                values.len() == expected,
                || path.clone(),
                "profile length differs from the other profiles",
            )?;
            check(
                !values.is_empty() && values.len().is_multiple_of(meta.periods),
                || path.clone(),
                "profile length must be a positive multiple of meta.periods",
            )?;
            match values.iter().position(|v| !finite_nonneg(*v)) {
                Some(k) => Err(Error::validation(
                    format!("{path}[{k}]"),
                    "must be finite and non-negative",
                )),
                None => Ok(()),
            }
        };

        let mut load_bus = Vec::with_capacity(loads.len());
        for (i, l) in loads.iter().enumerate() {
            load_bus.push(resolve(l.bus, format!("loads[{i}].bus"))?);
            check_profile(&l.forecast_profile, format!("loads[{i}].forecast_profile"))?;
            check(
                valid_pf(l.power_factor),
                || format!("loads[{i}].power_factor"),
                "must lie in (0, 1]",
            )?;
        }
        let mut renewable_bus = Vec::with_capacity(renewables.len());
        for (i, r) in renewables.iter().enumerate() {
            renewable_bus.push(resolve(r.bus, format!("renewables[{i}].bus"))?);
            check_profile(
                &r.forecast_profile,
                format!("renewables[{i}].forecast_profile"),
            )?;
            check(
                valid_pf(r.power_factor),
                || format!("renewables[{i}].power_factor"),
                "must lie in (0, 1]",
            )?;
        }
        let days = profile_len.map_or(1, |len| len / meta.periods);

        check(
            finite_nonneg(costs.c_ls),
            || "costs.c_ls".into(),
            "must be non-negative",
        )?;
        check(
            finite_nonneg(costs.lambda_v),
            || "costs.lambda_v".into(),
            "must be non-negative",
        )?;
        check(
            finite_nonneg(costs.lambda_b),
            || "costs.lambda_b".into(),
            "must be non-negative",
        )?;

        Ok(Self {
            meta,
            buses,
            branches,
            units,
            vpps,
            renewables,
            loads,
            costs,
            branch_ends,
            unit_bus,
            vpp_bus,
            renewable_bus,
            load_bus,
            days,
        })
    }

    pub fn to_document(&self) -> CaseDocument {
        CaseDocument {
            meta: self.meta.clone(),
            buses: self.buses.clone(),
            branches: self.branches.clone(),
            units: self.units.clone(),
            vpps: self.vpps.clone(),
            renewables: self.renewables.clone(),
            loads: self.loads.clone(),
            costs: self.costs.clone(),
        }
    }

    pub fn periods(&self) -> usize {
        self.meta.periods
    }

    /// Number of whole days in the profiles.
    pub fn days(&self) -> usize {
        self.days
    }

    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    /// Bus positions of branch endpoints.
    pub fn branch_ends(&self) -> &[(usize, usize)] {
        &self.branch_ends
    }

    pub fn unit_bus(&self) -> &[usize] {
        &self.unit_bus
    }

    pub fn vpp_bus(&self) -> &[usize] {
        &self.vpp_bus
    }

    pub fn renewable_bus(&self) -> &[usize] {
        &self.renewable_bus
    }

    pub fn load_bus(&self) -> &[usize] {
        &self.load_bus
    }

    fn check_period(&self, day: usize, t: usize) -> Result<usize> {
        if day >= self.days || t >= self.meta.periods {
            return Err(Error::Contract(format!(
                "day {day} period {t} outside {} days x {} periods",
                self.days, self.meta.periods
            )));
        }
        Ok(day * self.meta.periods + t)
    }

    /// Forecast load of every load element at `(day, t)`.
    pub fn load_forecast(&self, day: usize, t: usize) -> Result<Vec<f64>> {
        let k = self.check_period(day, t)?;
        Ok(self.loads.iter().map(|l| l.forecast_profile[k]).collect())
    }

    /// Forecast output of every renewable at `(day, t)`.
    pub fn renewable_forecast(&self, day: usize, t: usize) -> Result<Vec<f64>> {
        let k = self.check_period(day, t)?;
        Ok(self
            .renewables
            .iter()
            .map(|r| r.forecast_profile[k])
            .collect())
    }

    /// Sum of per-load values onto buses.
    pub fn loads_by_bus(&self, per_load: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.buses.len()];
        for (v, &b) in per_load.iter().zip(&self.load_bus) {
            out[b] += v;
        }
        out
    }

    /// Largest total forecast load over all periods.
    pub fn peak_load(&self) -> f64 {
        let len = self.loads.first().map_or(0, |l| l.forecast_profile.len());
        (0..len)
            .map(|k| {
                self.loads
                    .iter()
                    .map(|l| l.forecast_profile[k])
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Reactive power drawn or injected alongside `p` at power factor `pf`.
pub fn reactive(p: f64, pf: f64) -> f64 {
    p * (1.0 - pf * pf).sqrt() / pf
}

fn check_connected(n: usize, ends: &[(usize, usize)]) -> Result<()> {
    let mut adj = vec![Vec::new(); n];
    for &(f, t) in ends {
        adj[f].push(t);
        adj[t].push(f);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(b) = stack.pop() {
        for &nb in &adj[b] {
            if !seen[nb] {
                seen[nb] = true;
                stack.push(nb);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(i) => Err(Error::validation(
            format!("buses[{i}]"),
            "bus is not connected to the slack bus",
        )),
        None => Ok(()),
    }
}
