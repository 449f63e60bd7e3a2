mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qcommit_core::grid::*;
use qcommit_core::Error;

fn validation_path(doc: CaseDocument) -> String {
    match load_case(doc) {
        Err(Error::Validation { path, .. }) => path,
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn toy3_fixture_loads_and_round_trips() {
    let case = fixture("toy3");
    assert_eq!(case.periods(), 4);
    assert_eq!(case.units.len(), 3);
    assert_eq!(case.num_buses(), 1);
    let text = serde_json::to_string(&case.to_document()).unwrap();
    let again = load_case(serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(again, case);
}

#[test]
fn rts24_fixture_shape() {
    let case = fixture("rts24");
    assert_eq!(case.num_buses(), 24);
    assert_eq!(case.branches.len(), 38);
    assert_eq!(case.units.len(), 11);
    assert_eq!(case.periods(), 24);
    let pv: Vec<usize> = case
        .renewables
        .iter()
        .filter(|r| r.kind == RenewableKind::Pv)
        .map(|r| r.bus)
        .collect();
    let wind: Vec<usize> = case
        .renewables
        .iter()
        .filter(|r| r.kind == RenewableKind::Wind)
        .map(|r| r.bus)
        .collect();
    assert_eq!(pv, vec![1, 22]);
    assert_eq!(wind, vec![2, 23]);
    let vpp: Vec<usize> = case.vpps.iter().map(|v| v.bus).collect();
    assert_eq!(vpp, vec![3, 5, 6, 8, 9, 14, 17, 20]);
    assert_eq!(case.days(), 7);
}

#[test]
fn profile_length_mismatch_names_path() {
    let mut d = fixture_doc("rts24");
    d.renewables[0].forecast_profile.pop();
    assert_eq!(validation_path(d), "renewables[0].forecast_profile");

    let mut d = fixture_doc("toy3");
    d.loads[0].forecast_profile.push(1.0);
    assert_eq!(validation_path(d), "loads[0].forecast_profile");
}

#[test]
fn invariant_violations_name_paths() {
    let mut d = fixture_doc("toy3");
    d.units[2].p_min = 100.0;
    assert_eq!(validation_path(d), "units[2].p_max");

    let mut d = fixture_doc("toy3");
    d.units[1].ramp_down = 5.0;
    assert_eq!(validation_path(d), "units[1].ramp_down");

    let mut d = fixture_doc("toy3rt");
    d.buses[1].voltage_min = 1.1;
    assert_eq!(validation_path(d), "buses[1].voltage_min");

    let mut d = fixture_doc("toy3rt");
    d.branches[0].flow_limit = 0.0;
    assert_eq!(validation_path(d), "branches[0].flow_limit");

    let mut d = fixture_doc("toy3rt");
    d.units[0].bus = 42;
    assert_eq!(validation_path(d), "units[0].bus");

    let mut d = fixture_doc("toy3rt");
    d.buses[2].id = 2;
    assert_eq!(validation_path(d), "buses[2].id");
}

#[test]
fn disconnected_network_rejected() {
    let mut d = fixture_doc("toy3rt");
    d.branches.pop();
    assert_eq!(validation_path(d), "buses[2]");
}

#[test]
fn unknown_and_missing_keys_rejected() {
    let text = include_str!("../../qcommit/fixtures/toy3.json");
    let mut value: serde_json::Value = serde_json::from_str(text).unwrap();
    value["meta"]["colour"] = serde_json::json!("blue");
    assert!(serde_json::from_value::<CaseDocument>(value).is_err());

    let mut value: serde_json::Value = serde_json::from_str(text).unwrap();
    value.as_object_mut().unwrap().remove("costs");
    let err = serde_json::from_value::<CaseDocument>(value).unwrap_err();
    assert!(err.to_string().contains("costs"));
}

#[test]
fn two_bus_ptdf() {
    let case = load_case(doc(
        1,
        vec![bus(0), bus(1)],
        vec![branch(0, 1, 0.1, 50.0)],
        vec![],
        vec![load(1, vec![1.0])],
        10.0,
    ))
    .unwrap();
    let m = flow_matrices(&case).unwrap();
    assert_eq!(m.ptdf.shape(), (1, 2));
    assert!(m.ptdf[(0, 0)].abs() < 1e-15);
    assert!((m.ptdf[(0, 1)] + 1.0).abs() < 1e-12);
}

#[test]
fn radial_chain_flow_equals_downstream_injection() {
    let case = load_case(doc(
        1,
        vec![bus(0), bus(1), bus(2)],
        vec![branch(0, 1, 0.1, 50.0), branch(1, 2, 0.2, 50.0)],
        vec![],
        vec![load(2, vec![1.0])],
        10.0,
    ))
    .unwrap();
    let m = flow_matrices(&case).unwrap();
    let eval = evaluate_network(&case, &m, &[7.0, 0.0, -7.0], &[0.0; 3]).unwrap();
    // Bus 2 withdraws 7 MW: it flows forward over both branches.
    assert!((eval.flows[0] - 7.0).abs() < 1e-12);
    assert!((eval.flows[1] - 7.0).abs() < 1e-12);
    // Injection at bus 2 flows back against the branch orientation.
    assert!((m.ptdf[(1, 2)] + 1.0).abs() < 1e-12);
    assert!(m.ptdf[(1, 1)].abs() < 1e-12);
}

#[test]
fn radial_voltage_drop_matches_lindistflow() {
    let case = load_case(doc(
        1,
        vec![bus(0), bus(1)],
        vec![branch(0, 1, 0.05, 500.0)],
        vec![],
        vec![load(1, vec![1.0])],
        10.0,
    ))
    .unwrap();
    let m = flow_matrices(&case).unwrap();
    let (p, q) = (80.0, 30.0);
    let eval = evaluate_network(&case, &m, &[p, -p], &[q, -q]).unwrap();
    let expected = 1.0 - (0.01 * p + 0.05 * q) / 100.0;
    assert!((eval.voltages[1] - expected).abs() < 1e-12);
    assert!((eval.voltages[0] - 1.0).abs() < 1e-15);
}

#[test]
fn zero_injection_is_clean() {
    let case = fixture("rts24");
    let m = flow_matrices(&case).unwrap();
    let eval =
        evaluate_network(&case, &m, &zero_injections(&case), &zero_injections(&case)).unwrap();
    assert!(eval.flows.iter().all(|f| *f == 0.0));
    assert!(eval.voltages.iter().all(|v| *v == 1.0));
    assert_eq!(eval.branch_violation, 0.0);
    assert_eq!(eval.voltage_violation, 0.0);
}

#[test]
fn single_branch_overload_equals_limit() {
    let limit = 40.0;
    let case = load_case(doc(
        1,
        vec![bus(0), bus(1)],
        vec![branch(0, 1, 0.1, limit)],
        vec![],
        vec![load(1, vec![1.0])],
        10.0,
    ))
    .unwrap();
    let m = flow_matrices(&case).unwrap();
    let eval = evaluate_network(&case, &m, &[-2.0 * limit, 2.0 * limit], &[0.0; 2]).unwrap();
    assert!((eval.branch_violation - limit).abs() < 1e-12);
}

#[test]
fn wrong_injection_length_is_size_error() {
    let case = fixture("toy3rt");
    let m = flow_matrices(&case).unwrap();
    assert!(matches!(
        evaluate_network(&case, &m, &[0.0; 2], &[0.0; 3]),
        Err(Error::Size(_))
    ));
}

/// Dense recomputation: full-rank angle solve with the slack pinned.
fn reference_flows(case: &GridCase, inj: &[f64]) -> Vec<f64> {
    let n = case.num_buses();
    let mut b = DMatrix::<f64>::zeros(n, n);
    for (&(f, t), br) in case.branch_ends().iter().zip(&case.branches) {
        let y = 1.0 / br.x;
        b[(f, f)] += y;
        b[(t, t)] += y;
        b[(f, t)] -= y;
        b[(t, f)] -= y;
    }
    // Replace the slack equation by theta_0 = 0.
    let mut rhs = DVector::from_column_slice(inj);
    for j in 0..n {
        b[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
    }
    rhs[0] = 0.0;
    let theta = b.lu().solve(&rhs).unwrap();
    case.branch_ends()
        .iter()
        .zip(&case.branches)
        .map(|(&(f, t), br)| (theta[f] - theta[t]) / br.x)
        .collect()
}

fn balanced_rts_injection(case: &GridCase, t: usize) -> Vec<f64> {
    let loads = case.load_forecast(0, t).unwrap();
    let mut inj: Vec<f64> = case.loads_by_bus(&loads).iter().map(|l| -l).collect();
    let total: f64 = loads.iter().sum();
    let cap: f64 = case.units.iter().map(|u| u.p_max).sum();
    for (u, &b) in case.units.iter().zip(case.unit_bus()) {
        inj[b] += total * u.p_max / cap;
    }
    inj
}

#[test]
fn rts24_nodal_balance() {
    let case = fixture("rts24");
    let m = flow_matrices(&case).unwrap();
    let inj = balanced_rts_injection(&case, 12);
    assert!(inj.iter().sum::<f64>().abs() < 1e-9);
    let eval = evaluate_network(&case, &m, &inj, &[0.0; 24]).unwrap();
    let mut net = vec![0.0; 24];
    for (&(f, t), flow) in case.branch_ends().iter().zip(&eval.flows) {
        net[f] += flow;
        net[t] -= flow;
    }
    for (n, i) in net.iter().zip(&inj) {
        assert!((n - i).abs() < 1e-8, "bus outflow {n} vs injection {i}");
    }
}

#[test]
fn rts24_violations_match_dense_recomputation() {
    let case = fixture("rts24");
    let m = flow_matrices(&case).unwrap();
    // Stress the nominal t=12 pattern so limits bind.
    let inj: Vec<f64> = balanced_rts_injection(&case, 12)
        .iter()
        .map(|v| 1.6 * v)
        .collect();
    let q: Vec<f64> = inj.iter().map(|v| 0.3 * v).collect();
    let eval = evaluate_network(&case, &m, &inj, &q).unwrap();
    let flows = reference_flows(&case, &inj);
    let b_d: f64 = flows
        .iter()
        .zip(&case.branches)
        .map(|(f, br)| (f.abs() - br.flow_limit).max(0.0))
        .sum();
    for (a, b) in eval.flows.iter().zip(&flows) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(b_d > 0.0);
    assert!((eval.branch_violation - b_d).abs() < 1e-8);

    // Voltages: weighted least-squares fit of squared-magnitude branch drops.
    let n = 24;
    let mut lap = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let qflows = reference_flows(&case, &q);
    for (l, (&(f, t), br)) in case.branch_ends().iter().zip(&case.branches).enumerate() {
        let w = 1.0 / br.x;
        let drop = 2.0 * (br.r * flows[l] + br.x * qflows[l]) / 100.0;
        lap[(f, f)] += w;
        lap[(t, t)] += w;
        lap[(f, t)] -= w;
        lap[(t, f)] -= w;
        rhs[f] += w * drop;
        rhs[t] -= w * drop;
    }
    for j in 0..n {
        lap[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
    }
    rhs[0] = 0.0;
    let dw = lap.lu().solve(&rhs).unwrap();
    let v: Vec<f64> = dw.iter().map(|d| 1.0 + d / 2.0).collect();
    let v_d: f64 = v
        .iter()
        .zip(&case.buses)
        .map(|(v, b)| (b.voltage_min - v).max(0.0) + (v - b.voltage_max).max(0.0))
        .sum();
    for (a, b) in eval.voltages.iter().zip(&v) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!((eval.voltage_violation - v_d).abs() < 1e-8);
}

#[test]
fn dispatch_within_ramp() {
    let case = single_unit_case(10.0, 100.0, 20.0, 0.0, 30.0, true, vec![70.0], 1000.0);
    let d = merit_order_dispatch(&case, &[true], &[true], &[50.0], &[70.0], &[]).unwrap();
    assert_eq!(d.p_gen, vec![70.0]);
    assert_eq!(d.total_shed(), 0.0);
}

#[test]
fn dispatch_ramp_capped_sheds() {
    let case = single_unit_case(10.0, 100.0, 20.0, 0.0, 30.0, true, vec![200.0], 1000.0);
    let d = merit_order_dispatch(&case, &[true], &[true], &[50.0], &[200.0], &[]).unwrap();
    assert_eq!(d.p_gen, vec![80.0]);
    assert_eq!(d.total_shed(), 120.0);
}

#[test]
fn dispatch_rejects_inconsistent_prev() {
    let case = fixture("toy3");
    let e = [true, false, false];
    assert!(matches!(
        merit_order_dispatch(
            &case,
            &e,
            &[true, false, false],
            &[0.0, 0.0, 0.0],
            &[50.0],
            &[]
        ),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        merit_order_dispatch(
            &case,
            &e,
            &[true, false, false],
            &[50.0, 20.0, 0.0],
            &[50.0],
            &[]
        ),
        Err(Error::Contract(_))
    ));
}

#[test]
fn surplus_curtails_renewables_first() {
    let mut d = doc(
        1,
        vec![bus(0)],
        vec![],
        vec![unit(0, 10.0, 0.0, 40.0, 100.0, 100.0, true)],
        vec![load(0, vec![50.0])],
        100.0,
    );
    d.renewables.push(Renewable {
        bus: 0,
        kind: RenewableKind::Wind,
        forecast_profile: vec![30.0],
        power_factor: 1.0,
    });
    d.renewables.push(Renewable {
        bus: 0,
        kind: RenewableKind::Pv,
        forecast_profile: vec![10.0],
        power_factor: 1.0,
    });
    let case = load_case(d).unwrap();
    let r = merit_order_dispatch(&case, &[true], &[true], &[40.0], &[50.0], &[30.0, 10.0]).unwrap();
    assert_eq!(r.p_gen, vec![40.0]);
    assert!((r.p_curtail[0] - 22.5).abs() < 1e-12);
    assert!((r.p_curtail[1] - 7.5).abs() < 1e-12);
    assert_eq!(r.surplus, 0.0);

    let r = merit_order_dispatch(&case, &[true], &[true], &[40.0], &[20.0], &[30.0, 10.0]).unwrap();
    assert_eq!(r.p_curtail, vec![30.0, 10.0]);
    assert!((r.surplus - 20.0).abs() < 1e-12);
    let c = stage_costs(&case, &r, &[true], &[true]);
    assert!((c.shed - 2000.0).abs() < 1e-9);
}

#[test]
fn startup_and_shutdown_flags() {
    let case = fixture("toy3");
    let d = merit_order_dispatch(
        &case,
        &[false, true, true],
        &[true, false, true],
        &[50.0, 0.0, 20.0],
        &[50.0],
        &[],
    )
    .unwrap();
    assert_eq!(d.startup, vec![false, true, false]);
    assert_eq!(d.shutdown, vec![true, false, false]);
    assert_eq!(d.p_gen[0], 0.0);
}

#[test]
fn stage_cost_examples() {
    let case = single_unit_case(10.0, 100.0, 20.0, 500.0, 100.0, false, vec![0.0], 1000.0);
    let d = merit_order_dispatch(&case, &[false], &[false], &[0.0], &[0.0], &[]).unwrap();
    assert_eq!(
        stage_costs(&case, &d, &[false], &[false]),
        StageCosts::default()
    );

    let d = merit_order_dispatch(&case, &[true], &[false], &[0.0], &[0.0], &[]).unwrap();
    let c = stage_costs(&case, &d, &[false], &[true]);
    assert_eq!(c.startup, 500.0);
}

#[test]
fn toy3_schedule_costs_hand_summed() {
    let case = fixture("toy3");
    // U0 always on; U1 on from t=1; U2 on at t=2 only.
    let schedule = [
        [true, false, false],
        [true, true, false],
        [true, true, true],
        [true, true, false],
    ];
    let loads = [50.0, 80.0, 120.0, 70.0];
    let mut e_prev = [true, false, false];
    let mut prev = vec![50.0, 0.0, 0.0];
    let mut total = 0.0;
    for (t, e) in schedule.iter().enumerate() {
        let d = merit_order_dispatch(&case, e, &e_prev, &prev, &[loads[t]], &[]).unwrap();
        total += stage_costs(&case, &d, &e_prev, e).total();
        e_prev = *e;
        prev = d.p_gen;
    }
    // t0: U0 50 -> 500. t1: U1 starts (50); U0 60, U1 20 -> 600+400.
    // t2: U2 starts (10); U0 60, U1 50, U2 10 -> 600+1000+400.
    // t3: U0 60, U1 10 (floor of ramp is 0 -> p_min) -> 600+200.
    let expected =
        500.0 + (50.0 + 600.0 + 400.0) + (10.0 + 600.0 + 1000.0 + 400.0) + (600.0 + 200.0);
    assert!((total - expected).abs() < 1e-9, "{total} vs {expected}");
}

/// Minimum one-period cost over an integer-MW output grid.
fn grid_search_dispatch(
    case: &GridCase,
    e: &[bool],
    e_prev: &[bool],
    prev: &[f64],
    load: f64,
) -> f64 {
    let bounds = unit_bounds(case, e, e_prev, prev).unwrap();
    let startup: f64 = case
        .units
        .iter()
        .zip(e.iter().zip(e_prev))
        .filter(|(_, (&n, &p))| n && !p)
        .map(|(u, _)| u.startup_cost)
        .sum();
    let ranges: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| {
            let (lo, hi) = (lo.ceil() as i64, hi.floor() as i64);
            (lo..=hi).map(|v| v as f64).collect()
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; ranges.len()];
    loop {
        let p: Vec<f64> = idx.iter().zip(&ranges).map(|(&i, r)| r[i]).collect();
        let gen: f64 = p.iter().sum();
        let fuel: f64 = p.iter().zip(&case.units).map(|(p, u)| p * u.cost).sum();
        let mismatch = (load - gen).abs();
        best = best.min(fuel + startup + case.costs.c_ls * mismatch);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < ranges[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn toy3_dispatch_matches_grid_search() {
    let case = fixture("toy3");
    let loads = [50.0, 80.0, 120.0, 70.0];
    let init = [true, false, false];
    for t in 0..4 {
        for mask in 0..8u32 {
            let e: Vec<bool> = (0..3).map(|g| mask >> g & 1 == 1).collect();
            // Previous state: the initial commitment, with U0 on at the prior period's load.
            let prev = [
                if t == 0 {
                    50.0
                } else {
                    f64::min(loads[t - 1], 60.0)
                },
                0.0,
                0.0,
            ];
            let d = merit_order_dispatch(&case, &e, &init, &prev, &[loads[t]], &[]).unwrap();
            let cost = stage_costs(&case, &d, &init, &e).total();
            let oracle = grid_search_dispatch(&case, &e, &init, &prev, loads[t]);
            assert!(
                (cost - oracle).abs() < 1e-9,
                "t={t} e={e:?}: {cost} vs {oracle}"
            );
        }
    }
}

fn balance_residual(d: &DispatchResult, loads: &[f64], ren: &[f64]) -> f64 {
    let r: f64 = ren.iter().sum::<f64>() - d.p_curtail.iter().sum::<f64>();
    d.total_gen() + r + d.total_shed() - d.surplus - loads.iter().sum::<f64>()
}

proptest! {
    #[test]
    fn dispatch_invariants(
        load in 0.0f64..250.0,
        mask in 0u32..8,
        prev_mask in 0u32..8,
        frac in proptest::collection::vec(0.0f64..=1.0, 3),
    ) {
        let case = fixture("toy3");
        let e: Vec<bool> = (0..3).map(|g| mask >> g & 1 == 1).collect();
        let e_prev: Vec<bool> = (0..3).map(|g| prev_mask >> g & 1 == 1).collect();
        let prev: Vec<f64> = case.units.iter().zip(&e_prev).zip(&frac)
            .map(|((u, &on), f)| if on { u.p_min + f * (u.p_max - u.p_min) } else { 0.0 })
            .collect();
        let d = merit_order_dispatch(&case, &e, &e_prev, &prev, &[load], &[]).unwrap();
        prop_assert!(balance_residual(&d, &[load], &[]).abs() < 1e-6);
        for (g, u) in case.units.iter().enumerate() {
            if e[g] {
                prop_assert!(d.p_gen[g] >= u.p_min - 1e-9 && d.p_gen[g] <= u.p_max + 1e-9);
                if e_prev[g] {
                    let delta = d.p_gen[g] - prev[g];
                    prop_assert!(delta <= u.ramp_up + 1e-9 && delta >= u.ramp_down - 1e-9);
                }
            } else {
                prop_assert_eq!(d.p_gen[g], 0.0);
            }
            prop_assert!(!(d.startup[g] && d.shutdown[g]));
        }
        prop_assert!(d.p_shed[0] >= 0.0 && d.p_shed[0] <= load + 1e-9);

        // Merit order: no cheaper unit below its cap while a dearer one is above its floor.
        let bounds = unit_bounds(&case, &e, &e_prev, &prev).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                if e[a] && e[b] && case.units[a].cost < case.units[b].cost {
                    let a_below = d.p_gen[a] < bounds[a].1 - 1e-9;
                    let b_above = d.p_gen[b] > bounds[b].0 + 1e-9;
                    prop_assert!(!(a_below && b_above));
                }
            }
        }

        // Monotonicity in load.
        let more = merit_order_dispatch(&case, &e, &e_prev, &prev, &[load + 5.0], &[]).unwrap();
        prop_assert!(more.total_gen() >= d.total_gen() - 1e-9);
    }

    #[test]
    fn flows_are_linear(a in proptest::collection::vec(-100.0f64..100.0, 24), b in proptest::collection::vec(-100.0f64..100.0, 24), k in -3.0f64..3.0) {
        let case = fixture("rts24");
        let m = flow_matrices(&case).unwrap();
        let zero = vec![0.0; 24];
        let fa = evaluate_network(&case, &m, &a, &zero).unwrap().flows;
        let fb = evaluate_network(&case, &m, &b, &zero).unwrap().flows;
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + k * y).collect();
        let fm = evaluate_network(&case, &m, &mix, &zero).unwrap().flows;
        for i in 0..fa.len() {
            prop_assert!((fm[i] - (fa[i] + k * fb[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn violations_nonnegative_and_zero_inside(scale in 0.0f64..3.0) {
        let case = fixture("rts24");
        let m = flow_matrices(&case).unwrap();
        let inj = balanced_rts_injection(&case, 12);
        let scaled: Vec<f64> = inj.iter().map(|v| v * scale).collect();
        let eval = evaluate_network(&case, &m, &scaled, &vec![0.0; 24]).unwrap();
        prop_assert!(eval.branch_violation >= 0.0 && eval.voltage_violation >= 0.0);
        let inside = eval.flows.iter().zip(&case.branches).all(|(f, br)| f.abs() <= br.flow_limit)
            && eval.voltages.iter().zip(&case.buses).all(|(v, b)| *v >= b.voltage_min && *v <= b.voltage_max);
        if inside {
            prop_assert_eq!(eval.branch_violation + eval.voltage_violation, 0.0);
        }
    }
}
