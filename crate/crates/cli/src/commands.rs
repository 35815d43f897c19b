//! The `run`, `converge`, `depend` and `sweep` verbs.

use std::path::Path;

use peakflow::diagnostics::DiagnosticsRecord;
use peakflow::integrator::{run, RunStatus};
use peakflow::snapshot::Manifest;
use peakflow::studies::{convergence_study, dependence_study, ConvergenceReport, DependenceReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, Scenario};
use crate::error::{CliError, Exit};
use crate::output::{create_dir, create_file, csv_io, write_diagnostics, write_json, SnapshotWriter};

/// Progress messages on stderr, one whole line per call.
#[derive(Debug, Clone, Copy)]
pub struct Console {
    pub quiet: bool,
}

impl Console {
    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn status_exit(status: RunStatus) -> Exit {
    match status {
        RunStatus::Completed => Exit::Completed,
        RunStatus::Breakdown(_) => Exit::Breakdown,
        RunStatus::Diverged(_) => Exit::Diverged,
    }
}

fn describe(status: RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".into(),
        RunStatus::Breakdown(t) => format!("breakdown at t = {t}"),
        RunStatus::Diverged(t) => format!("diverged at t = {t}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub status: RunStatus,
    pub final_time: f64,
    pub records: Vec<DiagnosticsRecord>,
}

/// Runs one scenario into `out_dir`, writing `snapshots.ndjson` (manifest
/// first) and `diagnostics.csv`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path, console: Console) -> Result<RunSummary, CliError> {
    let state0 = scenario.case().initial_state()?;
    create_dir(out_dir)?;
    let config = serde_json::to_value(scenario).expect("scenario serializes");
    let manifest = Manifest::new(&scenario.name, scenario.grid, config);
    let mut writer = SnapshotWriter::create(out_dir, &manifest)?;
    let outcome = run(&state0, &scenario.params, &scenario.integrator, &scenario.plan, &mut |rec| writer.push(rec))?;
    writer.finish()?;

    let records: Vec<DiagnosticsRecord> = outcome.diagnostics_trace.into_iter().map(|r| r.diagnostics).collect();
    let probes: Vec<String> = scenario.plan.probes.iter().map(|p| p.id.clone()).collect();
    write_diagnostics(out_dir, &records, &scenario.plan.decay, &probes)?;
    console.say(format!(
        "{}: {} after {} snapshots, output in {}",
        scenario.name,
        describe(outcome.status),
        records.len(),
        out_dir.display()
    ));
    Ok(RunSummary { status: outcome.status, final_time: outcome.final_state.time(), records })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs the scenario's `[convergence]` ladder and writes `convergence.csv`
/// (one row per rung), `orders.csv` (one row per rung pair short of the
/// finest) and `convergence.json`.
pub fn run_convergence(scenario: &Scenario, out_dir: &Path, console: Console) -> Result<ConvergenceReport, CliError> {
    if scenario.ladder.is_empty() {
        return Err(ConfigError::single("convergence.ladder", "converge needs a [convergence] ladder").into());
    }
    create_dir(out_dir)?;
    console.say(format!("{}: running {} rungs", scenario.name, scenario.ladder.len()));
    let report = convergence_study(&scenario.case(), &scenario.ladder)?;

    let path = out_dir.join("convergence.csv");
    let mut w = csv::Writer::from_writer(create_file(&path)?);
    w.write_record(["nodes", "dt", "status", "error", "l2_vs_finest", "h1_vs_finest", "l2_vs_next"]).map_err(csv_io(&path))?;
    for r in &report.rungs {
        let status = r.status.map(describe).unwrap_or_else(|| "failed".into());
        w.write_record([
            r.nodes.to_string(),
            r.dt.to_string(),
            status,
            r.error.clone().unwrap_or_default(),
            opt(r.l2_vs_finest),
            opt(r.h1_vs_finest),
            opt(r.l2_vs_next),
        ])
        .map_err(csv_io(&path))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let orders_path = out_dir.join("orders.csv");
    let mut w = csv::Writer::from_writer(create_file(&orders_path)?);
    w.write_record(["coarse_nodes", "coarse_dt", "fine_nodes", "fine_dt", "order_vs_finest", "self_convergence_order"])
        .map_err(csv_io(&orders_path))?;
    for (k, (p_fin, p_self)) in report.orders_vs_finest.iter().zip(&report.self_convergence_orders).enumerate() {
        let (a, b) = (&scenario.ladder[k], &scenario.ladder[k + 1]);
        w.write_record([a.nodes.to_string(), a.dt.to_string(), b.nodes.to_string(), b.dt.to_string(), opt(*p_fin), opt(*p_self)])
            .map_err(csv_io(&orders_path))?;
    }
    w.flush().map_err(|e| CliError::io(&orders_path, e))?;
    write_json(&out_dir.join("convergence.json"), &report)?;

    for (k, p) in report.self_convergence_orders.iter().enumerate() {
        console.say(format!("  rungs {}-{}: self-convergence order {}", k, k + 1, p.map(|v| format!("{v:.3}")).unwrap_or("n/a".into())));
    }
    Ok(report)
}

/// Runs base and perturbed data and writes `dependence.csv` and `dependence.json`.
/// Distances are in `H^1` only.
pub fn run_dependence(scenario: &Scenario, delta: f64, out_dir: &Path, console: Console) -> Result<DependenceReport, CliError> {
    create_dir(out_dir)?;
    let report = dependence_study(&scenario.case(), delta)?;
    let path = out_dir.join("dependence.csv");
    let mut w = csv::Writer::from_writer(create_file(&path)?);
    w.write_record(["time", "h1_distance"]).map_err(csv_io(&path))?;
    for (t, d) in report.times.iter().zip(&report.h1_distances) {
        w.write_record([t.to_string(), d.to_string()]).map_err(csv_io(&path))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    write_json(&out_dir.join("dependence.json"), &report)?;
    let ratio = match report.ratio {
        Some(r) => format!("{r:.4}"),
        None if report.exact_match => "exact match".into(),
        None => "undefined".into(),
    };
    console.say(format!(
        "{}: delta {delta}, sup H1 distance {:.4e}, ratio to initial H1 distance {ratio}",
        scenario.name, report.sup_h1_distance
    ));
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub dir: String,
    pub status: String,
    pub final_time: f64,
    pub energy_drift: f64,
    pub min_jacobian: f64,
    pub max_slope: f64,
}

/// Runs every value of the scenario's `[sweep]` on the worker pool. Each
/// value writes into its own subdirectory; `sweep.csv` summarizes them in
/// input order.
pub fn run_sweep(scenario: &Scenario, out_dir: &Path, console: Console) -> Result<Vec<SweepRow>, CliError> {
    let Some(sweep) = &scenario.sweep else {
        return Err(ConfigError::single("sweep", "sweep needs a [sweep] section").into());
    };
    create_dir(out_dir)?;
    let variants: Vec<(f64, Scenario)> =
        sweep.values.iter().map(|&v| scenario.with_parameter(sweep.parameter, v).map(|s| (v, s))).collect::<Result<_, _>>()?;
    let rows: Vec<Result<SweepRow, CliError>> = variants
        .par_iter()
        .enumerate()
        .map(|(k, (value, s))| {
            let dir_name = format!("{k:03}_{}={value}", sweep.parameter.key());
            let summary = run_scenario(s, &out_dir.join(&dir_name), console)?;
            let (first, last) = (summary.records.first().unwrap(), summary.records.last().unwrap());
            let drift = if first.energy > 0.0 { (last.energy - first.energy).abs() / first.energy } else { 0.0 };
            Ok(SweepRow {
                value: *value,
                dir: dir_name,
                status: describe(summary.status),
                final_time: summary.final_time,
                energy_drift: drift,
                min_jacobian: last.min_jacobian,
                max_slope: last.max_slope,
            })
        })
        .collect();
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_, _>>()?;

    let path = out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_writer(create_file(&path)?);
    for row in &rows {
        w.serialize(row).map_err(csv_io(&path))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(rows)
}
