//! CSV serialization of traces, sweeps and comparisons.
//!
//! Every file starts with a header row followed by a comment row
//! `# seed=<n> config_hash=<hex>`. Floats carry nine significant digits.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sim::compare::StrategyReport;
use crate::sim::metrics::running_average;
use crate::sim::rp_region::{RpRegion, SampleStatus};
use crate::sim::run::SimTrace;

/// Nine significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Build one CSV document from a header, the provenance comment and rows.
pub fn csv_document<I>(header: &[String], seed: u64, config_hash: &str, rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io_err)?;
    let mut bytes = w.into_inner().map_err(io_err)?;
    writeln!(bytes, "# seed={seed} config_hash={config_hash}").map_err(io_err)?;
    let mut w = csv::Writer::from_writer(bytes);
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(io_err)?;
    String::from_utf8(bytes).map_err(io_err)
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn per_user<F>(trace: &SimTrace, value: F) -> Vec<Vec<String>>
where
    F: Fn(&crate::sim::run::FrameRecord, usize) -> String,
{
    trace
        .records
        .iter()
        .flat_map(|r| (0..r.batteries.len()).map(move |u| (r, u)))
        .map(|(r, u)| vec![r.frame.to_string(), u.to_string(), value(r, u)])
        .collect()
}

pub fn battery_trace_csv(trace: &SimTrace) -> Result<String> {
    let rows = per_user(trace, |r, u| fmt_f64(r.batteries[u]));
    csv_document(&header(&["frame", "user_id", "battery"]), trace.seed, &trace.config_hash, rows)
}

pub fn sumrate_trace_csv(trace: &SimTrace) -> Result<String> {
    let inst: Vec<f64> = trace.records.iter().map(|r| r.sum_rate()).collect();
    let avg = running_average(&inst);
    let rows = trace
        .records
        .iter()
        .zip(avg.iter().zip(&inst))
        .map(|(r, (a, s))| vec![r.frame.to_string(), fmt_f64(*a), fmt_f64(*s)]);
    csv_document(&header(&["frame", "running_avg_sr", "instantaneous_sr"]), trace.seed, &trace.config_hash, rows)
}

pub fn rate_samples_csv(trace: &SimTrace) -> Result<String> {
    let rows = per_user(trace, |r, u| fmt_f64(r.rates[u]));
    csv_document(&header(&["frame", "user_id", "rate"]), trace.seed, &trace.config_hash, rows)
}

pub fn harvest_trace_csv(trace: &SimTrace) -> Result<String> {
    let rows = per_user(trace, |r, u| fmt_f64(r.harvested[u]));
    csv_document(&header(&["frame", "user_id", "harvested"]), trace.seed, &trace.config_hash, rows)
}

pub fn groups_trace_csv(trace: &SimTrace) -> Result<String> {
    let rows = per_user(trace, |r, u| r.roles[u].code().to_string());
    csv_document(&header(&["frame", "user_id", "role"]), trace.seed, &trace.config_hash, rows)
}

/// The five trace files of a simulation run as `(file name, contents)`.
pub fn trace_bundle(trace: &SimTrace) -> Result<Vec<(&'static str, String)>> {
    Ok(vec![
        ("battery_trace.csv", battery_trace_csv(trace)?),
        ("sumrate_trace.csv", sumrate_trace_csv(trace)?),
        ("rate_samples.csv", rate_samples_csv(trace)?),
        ("harvest_trace.csv", harvest_trace_csv(trace)?),
        ("groups_trace.csv", groups_trace_csv(trace)?),
    ])
}

fn q_header(m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("Q_{j}")).collect()
}

/// One row per grid point: the targets, then the optimal weighted sum rate
/// or `infeasible` / `unconverged`.
pub fn rp_surface_csv(region: &RpRegion, seed: u64, config_hash: &str) -> Result<String> {
    let m = region.q_info.len();
    let mut head = q_header(m);
    head.push("SR".into());
    let rows = region.samples.iter().map(|s| {
        let mut row: Vec<String> = s.q.iter().map(|&q| fmt_f64(q)).collect();
        row.push(match s.status {
            SampleStatus::Feasible(v) => fmt_f64(v),
            SampleStatus::Infeasible => "infeasible".into(),
            SampleStatus::Unconverged => "unconverged".into(),
        });
        row
    });
    csv_document(&head, seed, config_hash, rows)
}

/// The unconstrained optimum (`info`) and one energy-beamforming corner per
/// harvesting user (`energy_j`), each with its sum rate and harvest tuple.
/// `q_max` holds the single-user beamforming bound of the corner's user.
pub fn boundary_points_csv(region: &RpRegion, seed: u64, config_hash: &str) -> Result<String> {
    let m = region.q_info.len();
    let mut head = vec!["point".to_string(), "sum_rate".to_string()];
    head.extend((1..=m).map(|j| format!("q_{j}")));
    head.push("q_max".into());
    let mut rows = Vec::with_capacity(m + 1);
    let mut info = vec!["info".to_string(), fmt_f64(region.sr_max)];
    info.extend(region.q_info.iter().map(|&q| fmt_f64(q)));
    info.push(String::new());
    rows.push(info);
    for e in &region.energy_points {
        let mut row = vec![format!("energy_{}", e.harvest_user + 1), fmt_f64(e.sum_rate)];
        row.extend(e.harvested.iter().map(|&q| fmt_f64(q)));
        row.push(fmt_f64(e.q_max));
        rows.push(row);
    }
    csv_document(&head, seed, config_hash, rows)
}

/// One row per strategy with timings relative to the fastest strategy.
pub fn grouping_compare_csv(reports: &[StrategyReport], seed: u64, config_hash: &str) -> Result<String> {
    let fastest = reports.iter().map(|r| r.seconds_per_frame).fold(f64::INFINITY, f64::min);
    let rows = reports.iter().map(|r| {
        let rel = if fastest > 0.0 { r.seconds_per_frame / fastest } else { 1.0 };
        vec![
            r.strategy.name().to_string(),
            fmt_f64(r.avg_sum_rate),
            fmt_f64(r.aggregate_harvested),
            fmt_f64(r.seconds_per_frame),
            fmt_f64(rel),
        ]
    });
    let head = header(&["strategy", "avg_sum_rate", "aggregate_harvested", "seconds_per_frame", "relative_time"]);
    csv_document(&head, seed, config_hash, rows)
}
