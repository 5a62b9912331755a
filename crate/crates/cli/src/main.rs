//! `swipt` command-line front end.
//!
//! Subcommands read a JSON scenario file, run one experiment and write CSV
//! files for external plotting. Exit status: 0 success, 1 I/O failure,
//! 2 usage or scenario error, 3 infeasible targets, 4 iteration budget
//! exhausted, 5 other numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use swipt::bd::build_effective_channels;
use swipt::grouping::Strategy;
use swipt::sim::{self, export, ScenarioConfig};
use swipt::solver::{self, necessary_condition_check, Allocation};
use swipt::Error;

#[derive(Parser)]
#[command(name = "swipt", version, about = "SWIPT multiuser MIMO grouping and allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one frame for the snapshot groups in the scenario.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Run the frame loop and write the trace CSV files.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Grouping strategy (LB-DHS, LB-CHS, RR, Random, no-swipt, no-harvest-mgmt).
        #[arg(long)]
        strategy: Option<String>,
        /// Override the number of frames.
        #[arg(long)]
        frames: Option<usize>,
        /// Terminal count of the built-in reference cell when no scenario is given.
        #[arg(long, default_value_t = 30)]
        users: usize,
    },
    /// Sweep the rate-power region for the snapshot groups.
    RpRegion {
        #[command(flatten)]
        common: Common,
        /// `N` for N evenly spaced targets per harvesting user from 0 to the
        /// largest reachable harvest, or explicit per-user lists such as
        /// `0,5,10;0,2.5`.
        #[arg(long, default_value = "25")]
        grid: String,
    },
    /// Run several strategies on shared channels and compare them.
    GroupingCompare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated strategy names; all strategies when omitted.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long, default_value_t = 30)]
        users: usize,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => 1,
            Error::Config(_) | Error::InvalidInput(_) | Error::DimensionMismatch(_) | Error::BdDimension { .. } => 2,
            Error::BdInfeasible { .. } => 3,
            Error::IterationBudget { .. } => 4,
            _ => 5,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 1, message: format!("{}: {e}", path.display()) }
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let scenario: ScenarioConfig =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(scenario)
}

fn scenario_or_reference(common: &Common, users: usize) -> Result<ScenarioConfig, Failure> {
    let mut s = match &common.scenario {
        Some(p) => load_scenario(p)?,
        None => ScenarioConfig::reference(users, 1),
    };
    if let Some(seed) = common.seed {
        s.rng_seed = seed;
    }
    Ok(s)
}

fn required_scenario(common: &Common) -> Result<ScenarioConfig, Failure> {
    if common.scenario.is_none() {
        return Err(usage("--scenario is required for this subcommand"));
    }
    scenario_or_reference(common, 0)
}

fn write_files(out: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    for (name, body) in files {
        let path = out.join(name);
        fs::write(&path, body).map_err(|e| io_failure(&path, e))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_strategy(name: &str) -> Result<Strategy, Failure> {
    name.trim().parse().map_err(|e: Error| usage(e.to_string()))
}

#[derive(Serialize)]
struct SolveReport {
    seed: u64,
    config_hash: String,
    info_users: Vec<usize>,
    harvest_users: Vec<usize>,
    feasible: bool,
    restoration_beta: Option<f64>,
    sum_rate: f64,
    weighted_sum_rate: f64,
    rates: Vec<f64>,
    harvested: Vec<f64>,
    q_targets: Vec<f64>,
    lambdas: Vec<f64>,
    mu: f64,
    kkt_primal: f64,
    kkt_complementarity: f64,
    kkt_gap: f64,
    iterations: usize,
    diagnostic: Option<String>,
}

fn report(s: &ScenarioConfig, a: &Allocation, q: Vec<f64>, beta: Option<f64>) -> SolveReport {
    SolveReport {
        seed: s.rng_seed,
        config_hash: s.config_hash(),
        info_users: a.info_users.clone(),
        harvest_users: a.harvest_users.clone(),
        feasible: a.feasible,
        restoration_beta: beta,
        sum_rate: a.sum_rate(),
        weighted_sum_rate: a.objective,
        rates: a.rates.clone(),
        harvested: a.harvested.clone(),
        q_targets: q,
        lambdas: a.duals.lambdas.clone(),
        mu: a.duals.mu,
        kkt_primal: a.kkt.primal,
        kkt_complementarity: a.kkt.complementarity,
        kkt_gap: a.kkt.gap,
        iterations: a.iterations,
        diagnostic: a.diagnostic.clone(),
    }
}

fn print_report(r: &SolveReport) {
    println!("info users {:?}, harvest users {:?}", r.info_users, r.harvest_users);
    println!("feasible: {}", r.feasible);
    if let Some(b) = r.restoration_beta {
        println!("targets scaled by beta = {b:.6}");
    }
    println!("sum rate: {:.9} bit/s/Hz (weighted {:.9})", r.sum_rate, r.weighted_sum_rate);
    for (u, rate) in r.info_users.iter().zip(&r.rates) {
        println!("  user {u}: rate {rate:.9}");
    }
    for ((j, h), (q, l)) in r.harvest_users.iter().zip(&r.harvested).zip(r.q_targets.iter().zip(&r.lambdas)) {
        let price = if *l <= 1e-6 { " (constraint inactive, lambda ~ 0)" } else { "" };
        println!("  user {j}: harvested {h:.9} target {q:.9} lambda {l:.3e}{price}");
    }
    println!("mu {:.6e}", r.mu);
    println!("kkt residuals: primal {:.2e} complementarity {:.2e} gap {:.2e}", r.kkt_primal, r.kkt_complementarity, r.kkt_gap);
    println!("iterations: {}", r.iterations);
    if let Some(d) = &r.diagnostic {
        println!("diagnostic: {d}");
    }
}

fn cmd_solve(common: &Common) -> Result<(), Failure> {
    let s = required_scenario(common)?;
    s.validate()?;
    let snap = s.snapshot.clone().ok_or_else(|| usage("scenario has no snapshot section"))?;
    let channels = sim::snapshot_channels(&s)?;
    let budget = s.power.radiated_budget();
    let q: Vec<f64> = snap.harvest.iter().map(|&j| s.terminals[j].q_target).collect();
    let harvest_channels: Vec<_> = snap.harvest.iter().map(|&j| channels.get(j).clone()).collect();
    let necessary = necessary_condition_check(&harvest_channels, &q, budget);
    if !snap.restore {
        if let Some(pos) = necessary.iter().position(|ok| !ok) {
            return Err(Failure {
                code: 3,
                message: format!(
                    "harvest user {} cannot reach its target {} even with all {} W beamformed to it",
                    snap.harvest[pos], q[pos], budget
                ),
            });
        }
    }
    let weights = snap.weights.clone().unwrap_or_else(|| vec![1.0; snap.info.len()]);
    let eff = build_effective_channels(&channels, &snap.info, &snap.harvest)?;
    let (alloc, beta) = if snap.harvest.is_empty() {
        (solver::solve_wsr_info_only(&eff, &weights, budget, &s.solver)?, None)
    } else if snap.restore {
        let r = solver::solve_with_restoration(&eff, &weights, &q, budget, &s.solver)?;
        (r.allocation, Some(r.beta))
    } else {
        (solver::solve_wsr_harvest(&eff, &weights, &q, budget, &s.solver)?, None)
    };
    let r = report(&s, &alloc, q, beta);
    print_report(&r);
    let json = serde_json::to_string_pretty(&r).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    write_files(&common.out, &[("solve_report.json", json + "\n")])?;
    if !alloc.feasible {
        return Err(Failure { code: 3, message: alloc.diagnostic.unwrap_or_else(|| "harvesting targets are infeasible".into()) });
    }
    Ok(())
}

fn cmd_simulate(common: &Common, strategy: Option<&str>, frames: Option<usize>, users: usize) -> Result<(), Failure> {
    let mut s = scenario_or_reference(common, users)?;
    if let Some(name) = strategy {
        s.grouping.strategy = parse_strategy(name)?;
    }
    if let Some(f) = frames {
        s.total_frames = f;
    }
    let trace = sim::run_simulation(&s)?;
    let summary = sim::metrics(&trace);
    println!(
        "{}: {} frames, average sum rate {:.6}, aggregate harvested {:.6}, infeasible frames {}",
        s.grouping.strategy,
        trace.records.len(),
        summary.avg_sum_rate,
        summary.aggregate_harvested,
        summary.infeasible_frames
    );
    write_files(&common.out, &export::trace_bundle(&trace)?)
}

fn parse_grid(spec: &str, q_max: &[f64]) -> Result<Vec<Vec<f64>>, Failure> {
    let spec = spec.trim();
    if let Ok(n) = spec.parse::<usize>() {
        if n == 0 {
            return Err(usage("--grid needs at least one point per axis"));
        }
        let axes: Vec<Vec<f64>> = q_max.iter().map(|&m| sim::linspace(0.0, m, n)).collect();
        return Ok(sim::grid_product(&axes));
    }
    let axes = spec
        .split(';')
        .map(|axis| {
            axis.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("bad grid value {v:?}"))))
                .collect::<Result<Vec<f64>, Failure>>()
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    if axes.len() != q_max.len() {
        return Err(usage(format!("--grid names {} axes but the snapshot has {} harvesting users", axes.len(), q_max.len())));
    }
    Ok(sim::grid_product(&axes))
}

fn cmd_rp_region(common: &Common, grid: &str) -> Result<(), Failure> {
    let s = required_scenario(common)?;
    s.validate()?;
    let snap = s.snapshot.clone().ok_or_else(|| usage("scenario has no snapshot section"))?;
    let channels = sim::snapshot_channels(&s)?;
    let weights = snap.weights.clone().unwrap_or_else(|| vec![1.0; snap.info.len()]);
    let budget = s.power.radiated_budget();
    let probe = sim::rp_region_sweep(&channels, &snap.info, &snap.harvest, &weights, budget, &[], &s.solver)?;
    let q_max: Vec<f64> = probe.energy_points.iter().map(|e| e.q_max_effective).collect();
    let points = parse_grid(grid, &q_max)?;
    let region = sim::rp_region_sweep(&channels, &snap.info, &snap.harvest, &weights, budget, &points, &s.solver)?;
    let feasible = region.samples.iter().filter(|p| p.status.value().is_some()).count();
    println!("SR_max {:.9}; {} of {} grid points feasible", region.sr_max, feasible, region.samples.len());
    let hash = s.config_hash();
    write_files(
        &common.out,
        &[
            ("rp_surface.csv", export::rp_surface_csv(&region, s.rng_seed, &hash)?),
            ("boundary_points.csv", export::boundary_points_csv(&region, s.rng_seed, &hash)?),
        ],
    )
}

fn cmd_grouping_compare(common: &Common, strategy: Option<&str>, frames: Option<usize>, users: usize) -> Result<(), Failure> {
    let mut s = scenario_or_reference(common, users)?;
    if let Some(f) = frames {
        s.total_frames = f;
    }
    let strategies = match strategy {
        Some(list) => list.split(',').map(parse_strategy).collect::<Result<Vec<_>, _>>()?,
        None => Strategy::ALL.to_vec(),
    };
    let reports = sim::compare_strategies(&s, &strategies)?;
    for r in &reports {
        println!(
            "{:>16}: average sum rate {:.6}, aggregate harvested {:.6}, {:.3e} s per frame",
            r.strategy.name(),
            r.avg_sum_rate,
            r.aggregate_harvested,
            r.seconds_per_frame
        );
    }
    let csv = export::grouping_compare_csv(&reports, s.rng_seed, &s.config_hash())?;
    write_files(&common.out, &[("grouping_compare.csv", csv)])
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve { common } => cmd_solve(common),
        Command::Simulate { common, strategy, frames, users } => cmd_simulate(common, strategy.as_deref(), *frames, *users),
        Command::RpRegion { common, grid } => cmd_rp_region(common, grid),
        Command::GroupingCompare { common, strategy, frames, users } => {
            cmd_grouping_compare(common, strategy.as_deref(), *frames, *users)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
