#![allow(dead_code)]

use qcommit_core::grid::{
    load_case, Branch, Bus, CaseDocument, Costs, GridCase, Load, Meta, Unit, Vpp,
};

pub fn fixture(name: &str) -> GridCase {
    let text = match name {
        "toy3" => include_str!("../../../qcommit/fixtures/toy3.json"),
        "toy3rt" => include_str!("../../../qcommit/fixtures/toy3rt.json"),
        "rts24" => include_str!("../../../qcommit/fixtures/rts24.json"),
        other => panic!("unknown fixture {other}"),
    };
    let doc: CaseDocument = serde_json::from_str(text).expect("fixture parses");
    load_case(doc).expect("fixture validates")
}

pub fn fixture_doc(name: &str) -> CaseDocument {
    fixture(name).to_document()
}

pub fn bus(id: usize) -> Bus {
    Bus {
        id,
        voltage_min: 0.95,
        voltage_max: 1.05,
        load_profile_ref: None,
    }
}

pub fn branch(from: usize, to: usize, x: f64, limit: f64) -> Branch {
    Branch {
        from,
        to,
        r: 0.01,
        x,
        flow_limit: limit,
    }
}

pub fn unit(
    bus: usize,
    cost: f64,
    startup: f64,
    p_min: f64,
    p_max: f64,
    ramp: f64,
    on: bool,
) -> Unit {
    Unit {
        bus,
        cost,
        startup_cost: startup,
        p_min,
        p_max,
        ramp_up: ramp,
        ramp_down: -ramp,
        initial_status: on,
        power_factor: 1.0,
    }
}

pub fn load(bus: usize, profile: Vec<f64>) -> Load {
    Load {
        bus,
        forecast_profile: profile,
        power_factor: 1.0,
    }
}

pub fn vpp(bus: usize, p_max: f64, cost: f64) -> Vpp {
    Vpp {
        bus,
        p_max,
        cost,
        power_factor: 1.0,
    }
}

/// A document with the given parts and neutral defaults elsewhere.
pub fn doc(
    periods: usize,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    units: Vec<Unit>,
    loads: Vec<Load>,
    c_ls: f64,
) -> CaseDocument {
    CaseDocument {
        meta: Meta {
            name: "test".into(),
            periods,
            base_mva: 100.0,
        },
        buses,
        branches,
        units,
        vpps: vec![],
        renewables: vec![],
        loads,
        costs: Costs {
            c_ls,
            lambda_v: 1.0e4,
            lambda_b: 1.0e4,
        },
    }
}

pub fn single_unit_case(
    p_min: f64,
    p_max: f64,
    cost: f64,
    startup: f64,
    ramp: f64,
    on: bool,
    load_mw: Vec<f64>,
    c_ls: f64,
) -> GridCase {
    let t = load_mw.len();
    load_case(doc(
        t,
        vec![bus(0)],
        vec![],
        vec![unit(0, cost, startup, p_min, p_max, ramp, on)],
        vec![load(0, load_mw)],
        c_ls,
    ))
    .unwrap()
}
