use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qcommit_core::envs::{
    default_reward_scale, rollout_plan, sample_scenario, DaPlan, ScenarioGenerator,
};
use qcommit_core::grid::{flow_matrices, FlowMatrices, GridCase};
use qcommit_core::oracle::{brute_force_uc, priority_list};
use qcommit_core::rl::{CurveRow, StepRecord, EVAL_SCENARIO_OFFSET};
use rayon::prelude::*;
use serde::Serialize;

use crate::checkpoint::{DaCheckpoint, RtCheckpoint};
use crate::config::{CompareConfig, DaRunConfig, MethodConfig, RtRunConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{read_case, read_json, to_json, write_atomic, write_json};
use crate::pipeline::{
    evaluate_day, evaluate_plan, evaluate_rt_agent, greedy_plan, train_da, train_rt, EvalRow,
    Metrics,
};
use crate::report::{
    comparison_csv, curve_csv, eval_csv, histogram_plot, line_plot, ComparisonRow,
};

/// Appends a timestamped line to `run.log`; the only non-reproducible file.
fn log_run(out: &Path, command: &str, wall_time_s: f64) -> CliResult<()> {
    use std::io::Write;
    let path = out.join("run.log");
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    writeln!(
        f,
        "unix_time={stamp} command={command} wall_time_s={wall_time_s:.3}"
    )
    .map_err(|source| CliError::Io { path, source })
}

fn returns(curve: &[CurveRow]) -> Vec<f64> {
    curve.iter().map(|r| r.ret).collect()
}

#[derive(Serialize)]
struct StepRow {
    episode: usize,
    t: usize,
    unit: usize,
    e_prev: u8,
    e: u8,
    startup: u8,
    shutdown: u8,
}

/// Commitment transitions, one row per unit and step.
pub fn steps_csv(steps: &[StepRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in steps {
        for g in 0..s.e.len() {
            w.serialize(StepRow {
                episode: s.episode,
                t: s.t,
                unit: g,
                e_prev: s.e_prev[g] as u8,
                e: s.e[g] as u8,
                startup: s.startup[g] as u8,
                shutdown: s.shutdown[g] as u8,
            })
            .expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

pub fn validate(case_path: &Path) -> CliResult<String> {
    let case = read_case(case_path)?;
    flow_matrices(&case)?;
    let mut s = format!(
        "{}: {} buses, {} units, {} VPPs, T={}\n",
        case.meta.name,
        case.buses.len(),
        case.units.len(),
        case.vpps.len(),
        case.periods()
    );
    s.push_str(&format!(
        "{} branches, {} renewables, {} loads, {} profile days, base {} MVA\n",
        case.branches.len(),
        case.renewables.len(),
        case.loads.len(),
        case.days(),
        case.meta.base_mva
    ));
    for check in [
        "unique bus ids",
        "voltage limits ordered",
        "branch endpoints and impedances",
        "network connected and solvable",
        "unit limits, ramps and costs",
        "VPP limits and costs",
        "profile lengths and values",
        "power factors",
    ] {
        s.push_str(&format!("ok  {check}\n"));
    }
    Ok(s)
}

pub fn metrics_json(metrics: &Metrics) -> Vec<u8> {
    to_json(metrics)
}

fn write_common(
    out: &Path,
    curve: &[CurveRow],
    rows: &[EvalRow],
    title: &str,
) -> CliResult<Metrics> {
    let metrics = Metrics::from_rows(rows);
    write_atomic(&out.join("curve.csv"), &curve_csv(curve))?;
    write_atomic(&out.join("eval.csv"), &eval_csv(rows))?;
    write_atomic(&out.join("metrics.json"), &metrics_json(&metrics))?;
    write_atomic(
        &out.join("curve.svg"),
        &line_plot(title, &[("return".into(), returns(curve))]),
    )?;
    Ok(metrics)
}

fn metrics_line(m: &Metrics, wall: f64) -> String {
    format!(
        "total_cost={:.4} operational_cost={:.4} startup_cost={:.4} violation={:.6} adjustment_output_mw={:.4} wall_time_s={wall:.3}",
        m.total_cost, m.operational_cost, m.startup_cost, m.violation, m.adjustment_output_mw
    )
}

pub fn train_da_cmd(case_path: &Path, config_path: &Path, out: &Path) -> CliResult<String> {
    let start = Instant::now();
    let case = read_case(case_path)?;
    let cfg: DaRunConfig = read_json(config_path)?;
    let echo = RunConfig {
        command: "train-da",
        case: case_path.into(),
        out: out.into(),
        da_checkpoint: None,
        config: &cfg,
    };
    write_json(&out.join("config.json"), &echo)?;
    let run = train_da(&case, &cfg)?;
    let m = flow_matrices(&case)?;
    let day = cfg
        .train
        .days
        .as_ref()
        .and_then(|d| d.first().copied())
        .unwrap_or(0);
    let (plan, _) = greedy_plan(&case, &run.agent, day, run.reward_scale)?;
    let rows = evaluate_plan(&case, &m, &plan)?;
    write_json(
        &out.join("checkpoint.json"),
        &DaCheckpoint::new(&run.agent, &cfg),
    )?;
    write_json(&out.join("plan.json"), &plan.commitment)?;
    write_atomic(&out.join("steps.csv"), &steps_csv(&run.steps))?;
    let metrics = write_common(out, &run.curve, &rows, "Day-ahead training return")?;
    let wall = start.elapsed().as_secs_f64();
    log_run(out, "train-da", wall)?;
    Ok(metrics_line(&metrics, wall))
}

/// Greedy plan of a day-ahead checkpoint, checked against the case.
pub fn plan_from_checkpoint(case: &GridCase, path: &Path, day: usize) -> CliResult<DaPlan> {
    let ckpt: DaCheckpoint = read_json(path)?;
    let scale = ckpt
        .config
        .train
        .reward_scale
        .unwrap_or_else(|| default_reward_scale(case));
    if day >= case.days() {
        return Err(CliError::Contract(format!(
            "day {day} outside the case's {} profile days",
            case.days()
        )));
    }
    let agent = ckpt.into_agent()?;
    Ok(greedy_plan(case, &agent, day, scale)?.0)
}

pub fn train_rt_cmd(
    case_path: &Path,
    da_checkpoint: &Path,
    config_path: &Path,
    out: &Path,
) -> CliResult<String> {
    let start = Instant::now();
    let case = read_case(case_path)?;
    let cfg: RtRunConfig = read_json(config_path)?;
    let echo = RunConfig {
        command: "train-rt",
        case: case_path.into(),
        out: out.into(),
        da_checkpoint: Some(da_checkpoint.into()),
        config: &cfg,
    };
    write_json(&out.join("config.json"), &echo)?;
    let plan = plan_from_checkpoint(&case, da_checkpoint, cfg.day)?;
    let m = flow_matrices(&case)?;
    let run = train_rt(&case, &m, &plan, &cfg)?;
    let rows = evaluate_rt_agent(&case, &m, &plan, &run.agent, &cfg)?;
    write_json(
        &out.join("checkpoint.json"),
        &RtCheckpoint::new(&run.agent, &plan.commitment, &cfg),
    )?;
    write_atomic(&out.join("steps.csv"), &steps_csv(&run.steps))?;
    let metrics = write_common(out, &run.curve, &rows, "Real-time training return")?;
    let violations: Vec<f64> = run.curve.iter().filter_map(|r| r.violation).collect();
    write_atomic(
        &out.join("violation.svg"),
        &line_plot(
            "Violation degree per episode",
            &[("violation".into(), violations)],
        ),
    )?;
    let wall = start.elapsed().as_secs_f64();
    log_run(out, "train-rt", wall)?;
    Ok(metrics_line(&metrics, wall))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub day: usize,
    pub best_value: f64,
    pub best_cost: f64,
    pub schedule: Vec<Vec<u8>>,
    pub evaluated_count: u64,
    pub reward_scale: f64,
}

pub fn oracle_report(case: &GridCase, day: usize) -> CliResult<OracleReport> {
    let scale = default_reward_scale(case);
    let res = brute_force_uc(case, day, scale)?;
    let schedule = res
        .best_actions
        .iter()
        .map(|e| e.iter().map(|&b| b as u8).collect())
        .collect();
    let mut it = res.best_actions.iter().cloned();
    let (plan, _) = rollout_plan(case, day, scale, |_| {
        Ok(it.next().expect("one action per period"))
    })?;
    Ok(OracleReport {
        day,
        best_value: res.best_value,
        best_cost: plan.total_cost(),
        schedule,
        evaluated_count: res.evaluated_count as u64,
        reward_scale: scale,
    })
}

pub fn oracle_cmd(case_path: &Path, day: usize, out: &Path) -> CliResult<String> {
    let case = read_case(case_path)?;
    let report = oracle_report(&case, day)?;
    write_json(out, &report)?;
    let rows: Vec<String> = report.schedule.iter().map(|e| format!("{e:?}")).collect();
    Ok(format!(
        "optimum value {:.6} (cost {:.4}) over {} sequences\nschedule {}",
        report.best_value,
        report.best_cost,
        report.evaluated_count,
        rows.join(" ")
    ))
}

pub fn export_lp_cmd(case_path: &Path, day: usize, out: &Path) -> CliResult<String> {
    let case = read_case(case_path)?;
    if day >= case.days() {
        return Err(CliError::Contract(format!(
            "day {day} outside the case's {} profile days",
            case.days()
        )));
    }
    write_atomic(out, crate::lp::export_lp(&case, day)?.as_bytes())?;
    Ok(format!("wrote {}", out.display()))
}

/// One evaluated method of the comparison.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub row: ComparisonRow,
    pub da_curve: Vec<CurveRow>,
    pub rt_curve: Vec<CurveRow>,
    pub adjustments: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dominance {
    pub day: usize,
    pub priority_list_cost: f64,
    pub oracle_cost: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub methods: Vec<MethodResult>,
    pub dominance: Option<Dominance>,
}

struct Day {
    day: usize,
    scenario: qcommit_core::envs::Scenario,
}

fn seeded_days(case: &GridCase, gen: &ScenarioGenerator, seeds: usize) -> CliResult<Vec<Day>> {
    (0..seeds)
        .map(|s| {
            let day = s % case.days();
            Ok(Day {
                day,
                scenario: sample_scenario(gen, case, day, EVAL_SCENARIO_OFFSET + s as u64)?,
            })
        })
        .collect()
}

/// Mean of per-day evaluation metrics.
fn average(days: &[Vec<EvalRow>]) -> Metrics {
    let mut acc = Metrics::default();
    for rows in days {
        let m = Metrics::from_rows(rows);
        acc.operational_cost += m.operational_cost;
        acc.startup_cost += m.startup_cost;
        acc.violation += m.violation;
        acc.adjustment_output_mw += m.adjustment_output_mw;
    }
    let n = days.len().max(1) as f64;
    acc.operational_cost /= n;
    acc.startup_cost /= n;
    acc.violation /= n;
    acc.adjustment_output_mw /= n;
    acc.total_cost = acc.operational_cost + acc.startup_cost;
    acc
}

fn row(method: &str, m: Metrics, wall: f64) -> ComparisonRow {
    ComparisonRow {
        method: method.into(),
        total_cost: m.total_cost,
        operational_cost: m.operational_cost,
        startup_cost: m.startup_cost,
        violation: m.violation,
        adjustment_output_mw: m.adjustment_output_mw,
        wall_time_s: wall,
    }
}

fn run_priority(case: &GridCase, m: &FlowMatrices, days: &[Day]) -> CliResult<MethodResult> {
    let start = Instant::now();
    let scale = default_reward_scale(case);
    let zero = vec![0.0; case.vpps.len()];
    let mut per_day = Vec::with_capacity(days.len());
    let mut adjustments = Vec::new();
    for d in days {
        let plan = priority_list(case, d.day, scale)?.plan;
        let (rows, adj) = evaluate_day(case, m, &plan, std::slice::from_ref(&d.scenario), |_| {
            Ok(zero.clone())
        })?;
        per_day.push(rows);
        adjustments.extend(adj);
    }
    Ok(MethodResult {
        row: row(
            "priority_list",
            average(&per_day),
            start.elapsed().as_secs_f64(),
        ),
        da_curve: Vec::new(),
        rt_curve: Vec::new(),
        adjustments,
        steps: Vec::new(),
    })
}

fn run_learned(
    name: &str,
    case: &GridCase,
    m: &FlowMatrices,
    days: &[Day],
    cfg: &MethodConfig,
) -> CliResult<MethodResult> {
    let start = Instant::now();
    let da = train_da(case, &cfg.da)?;
    let mut steps = da.steps.clone();
    let rt = if case.vpps.is_empty() {
        None
    } else {
        let (plan, _) = greedy_plan(case, &da.agent, cfg.rt.day, da.reward_scale)?;
        let run = train_rt(case, m, &plan, &cfg.rt)?;
        steps.extend(run.steps.iter().cloned());
        Some(run)
    };
    let mut per_day = Vec::with_capacity(days.len());
    let mut adjustments = Vec::new();
    for d in days {
        let (plan, _) = greedy_plan(case, &da.agent, d.day, da.reward_scale)?;
        let scenarios = std::slice::from_ref(&d.scenario);
        let (rows, adj) = match &rt {
            Some(run) => evaluate_day(case, m, &plan, scenarios, |s| run.agent.act(s))?,
            None => evaluate_day(case, m, &plan, scenarios, |_| Ok(Vec::new()))?,
        };
        per_day.push(rows);
        adjustments.extend(adj);
    }
    Ok(MethodResult {
        row: row(name, average(&per_day), start.elapsed().as_secs_f64()),
        da_curve: da.curve,
        rt_curve: rt.map(|r| r.curve).unwrap_or_default(),
        adjustments,
        steps,
    })
}

fn dominance(case: &GridCase) -> CliResult<Option<Dominance>> {
    let day = 0;
    let oracle = match oracle_report(case, day) {
        Ok(r) => r,
        Err(CliError::Core(qcommit_core::Error::SizeGuard(_))) => return Ok(None),
        Err(e) => return Err(e),
    };
    let priority = priority_list(case, day, default_reward_scale(case))?
        .plan
        .total_cost();
    Ok(Some(Dominance {
        day,
        priority_list_cost: priority,
        oracle_cost: oracle.best_cost,
        holds: priority >= oracle.best_cost,
    }))
}

/// Worker pool capped by `QCOMMIT_THREADS`.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QCOMMIT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            CliError::Contract(format!(
                "QCOMMIT_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| CliError::Output(e.to_string()))
}

/// Evaluates the priority list and both learned methods over seeded
/// scenario days. Methods run in parallel and are joined in fixed order.
pub fn compare(case: &GridCase, cfg: &CompareConfig) -> CliResult<Comparison> {
    if cfg.seeds == 0 {
        return Err(CliError::Contract(
            "at least one scenario day is required".into(),
        ));
    }
    let m = flow_matrices(case)?;
    let days = seeded_days(case, &cfg.scenario, cfg.seeds)?;
    let pool = thread_pool()?;
    let methods: Vec<CliResult<MethodResult>> = pool.install(|| {
        (0..3)
            .into_par_iter()
            .map(|k| match k {
                0 => run_priority(case, &m, &days),
                1 => run_learned("classical", case, &m, &days, &cfg.classical),
                _ => run_learned("quantum", case, &m, &days, &cfg.quantum),
            })
            .collect()
    });
    let methods = methods.into_iter().collect::<CliResult<Vec<_>>>()?;
    Ok(Comparison {
        methods,
        dominance: dominance(case)?,
    })
}

pub fn compare_cmd(
    case_path: &Path,
    config: Option<&PathBuf>,
    seeds: Option<usize>,
    out: &Path,
) -> CliResult<String> {
    let start = Instant::now();
    let case = read_case(case_path)?;
    let mut cfg = match config {
        Some(p) => read_json::<CompareConfig>(p)?,
        None => crate::config::default_compare(),
    };
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    let echo = RunConfig {
        command: "compare",
        case: case_path.into(),
        out: out.into(),
        da_checkpoint: None,
        config: &cfg,
    };
    write_json(&out.join("config.json"), &echo)?;
    let cmp = compare(&case, &cfg)?;
    let rows: Vec<ComparisonRow> = cmp.methods.iter().map(|r| r.row.clone()).collect();
    write_atomic(&out.join("comparison.csv"), &comparison_csv(&rows))?;
    for r in &cmp.methods {
        if !r.da_curve.is_empty() {
            write_atomic(
                &out.join(format!("{}_da_curve.csv", r.row.method)),
                &curve_csv(&r.da_curve),
            )?;
        }
        if !r.rt_curve.is_empty() {
            write_atomic(
                &out.join(format!("{}_rt_curve.csv", r.row.method)),
                &curve_csv(&r.rt_curve),
            )?;
        }
    }
    let da: Vec<(String, Vec<f64>)> = cmp
        .methods
        .iter()
        .filter(|r| !r.da_curve.is_empty())
        .map(|r| (r.row.method.clone(), returns(&r.da_curve)))
        .collect();
    write_atomic(
        &out.join("reward_curves.svg"),
        &line_plot("Day-ahead training return", &da),
    )?;
    let rt: Vec<(String, Vec<f64>)> = cmp
        .methods
        .iter()
        .filter(|r| !r.rt_curve.is_empty())
        .map(|r| (r.row.method.clone(), returns(&r.rt_curve)))
        .collect();
    if !rt.is_empty() {
        write_atomic(
            &out.join("rt_reward_curves.svg"),
            &line_plot("Real-time training return", &rt),
        )?;
    }
    let adj: Vec<(String, Vec<f64>)> = cmp
        .methods
        .iter()
        .map(|r| (r.row.method.clone(), r.adjustments.clone()))
        .collect();
    write_atomic(
        &out.join("vpp_adjustment.svg"),
        &histogram_plot("VPP adjustment per step (MW)", &adj, 20),
    )?;
    if let Some(d) = &cmp.dominance {
        write_json(&out.join("dominance.json"), d)?;
    }

    let mut text = String::from("method,total_cost,operational_cost,startup_cost,violation,adjustment_output_mw,wall_time_s\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{:.6},{:.4},{:.3}\n",
            r.method,
            r.total_cost,
            r.operational_cost,
            r.startup_cost,
            r.violation,
            r.adjustment_output_mw,
            r.wall_time_s
        ));
    }
    if let Some(d) = &cmp.dominance {
        text.push_str(&format!(
            "priority_list cost {:.4} vs oracle optimum {:.4} on day {}: dominance {}\n",
            d.priority_list_cost,
            d.oracle_cost,
            d.day,
            if d.holds { "holds" } else { "VIOLATED" }
        ));
    }
    let (q, c) = (&rows[2], &rows[1]);
    let order = if q.violation < c.violation {
        "quantum < classical"
    } else if q.violation > c.violation {
        "quantum > classical"
    } else {
        "quantum = classical"
    };
    text.push_str(&format!(
        "violation ordering: {order} ({:.6} vs {:.6})\n",
        q.violation, c.violation
    ));
    log_run(out, "compare", start.elapsed().as_secs_f64())?;
    Ok(text)
}
