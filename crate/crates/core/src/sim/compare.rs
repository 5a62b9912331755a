//! Side-by-side runs of several grouping strategies on shared channels.

use crate::error::Result;
use crate::grouping::Strategy;
use crate::sim::metrics::{metrics, Summary};
use crate::sim::run::{run_simulation, SimTrace};
use crate::sim::scenario::ScenarioConfig;

/// Converged figures of one strategy.
#[derive(Debug, Clone)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub avg_sum_rate: f64,
    pub aggregate_harvested: f64,
    pub seconds_per_frame: f64,
    pub summary: Summary,
    pub trace: SimTrace,
}

/// Run `scenario` once per strategy. All runs share the seed, so they see
/// the same channel and battery draws. Runs are sequential so the per-frame
/// timings are not distorted by contention.
pub fn compare_strategies(scenario: &ScenarioConfig, strategies: &[Strategy]) -> Result<Vec<StrategyReport>> {
    strategies
        .iter()
        .map(|&strategy| {
            let mut s = scenario.clone();
            s.grouping.strategy = strategy;
            let trace = run_simulation(&s)?;
            let summary = metrics(&trace);
            Ok(StrategyReport {
                strategy,
                avg_sum_rate: summary.avg_sum_rate,
                aggregate_harvested: summary.aggregate_harvested,
                seconds_per_frame: summary.seconds_per_frame,
                summary,
                trace,
            })
        })
        .collect()
}
