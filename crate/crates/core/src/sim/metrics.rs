//! Summary statistics over a simulation trace.

use crate::sim::run::SimTrace;

/// Aggregates of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Running average of the instantaneous sum rate after each frame.
    pub running_sum_rate: Vec<f64>,
    /// Average sum rate over the whole run.
    pub avg_sum_rate: f64,
    /// Per-user average post-efficiency harvested power over all frames.
    pub avg_harvested: Vec<f64>,
    /// Sum over users of `avg_harvested`.
    pub aggregate_harvested: f64,
    /// Every per-user per-frame rate as `(frame, user, rate)`, zeros
    /// included, for the empirical rate distribution.
    pub rate_samples: Vec<(usize, usize, f64)>,
    pub final_batteries: Vec<f64>,
    pub peak_batteries: Vec<f64>,
    /// Frames whose allocation was infeasible.
    pub infeasible_frames: usize,
    /// Mean scheduling time per frame in seconds.
    pub seconds_per_frame: f64,
}

/// Prefix averages of `values`.
pub fn running_average(values: &[f64]) -> Vec<f64> {
    let mut total = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(n, v)| {
            total += v;
            total / (n + 1) as f64
        })
        .collect()
}

/// Compute the summary of `trace`.
pub fn metrics(trace: &SimTrace) -> Summary {
    let frames = trace.records.len();
    let k = trace.capacities.len();
    let sum_rates: Vec<f64> = trace.records.iter().map(|r| r.sum_rate()).collect();
    let running_sum_rate = running_average(&sum_rates);
    let avg_sum_rate = running_sum_rate.last().copied().unwrap_or(0.0);
    let mut avg_harvested = vec![0.0; k];
    let mut peak_batteries = vec![f64::NEG_INFINITY; k];
    let mut rate_samples = Vec::new();
    for r in &trace.records {
        for u in 0..k {
            avg_harvested[u] += r.harvested[u];
            peak_batteries[u] = peak_batteries[u].max(r.batteries[u]);
            rate_samples.push((r.frame, u, r.rates[u]));
        }
    }
    if frames > 0 {
        for h in &mut avg_harvested {
            *h /= frames as f64;
        }
    }
    let final_batteries = trace.records.last().map_or_else(Vec::new, |r| r.batteries.clone());
    let seconds_per_frame =
        if frames > 0 { trace.scheduling_seconds.iter().sum::<f64>() / frames as f64 } else { 0.0 };
    Summary {
        running_sum_rate,
        avg_sum_rate,
        aggregate_harvested: avg_harvested.iter().sum(),
        avg_harvested,
        rate_samples,
        final_batteries,
        peak_batteries,
        infeasible_frames: trace.records.iter().filter(|r| !r.feasible).count(),
        seconds_per_frame,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run::{FrameRecord, Role};

    fn record(frame: usize, rates: Vec<f64>, harvested: Vec<f64>, batteries: Vec<f64>) -> FrameRecord {
        let roles = vec![Role::Idle; rates.len()];
        FrameRecord { frame, batteries, rates, harvested, roles, feasible: true, iterations: 0 }
    }

    #[test]
    fn running_average_of_constant_is_constant() {
        assert_eq!(running_average(&[2.0, 2.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(running_average(&[1.0, 3.0]), vec![1.0, 2.0]);
        assert!(running_average(&[]).is_empty());
    }

    #[test]
    fn summary_of_two_frames() {
        let trace = SimTrace {
            seed: 0,
            config_hash: String::new(),
            capacities: vec![10.0, 10.0],
            records: vec![
                record(0, vec![1.0, 0.0], vec![0.0, 4.0], vec![3.0, 6.0]),
                record(1, vec![0.0, 3.0], vec![2.0, 0.0], vec![5.0, 4.0]),
            ],
            scheduling_seconds: vec![0.5, 1.5],
        };
        let s = metrics(&trace);
        assert_eq!(s.running_sum_rate, vec![1.0, 2.0]);
        assert_eq!(s.avg_sum_rate, 2.0);
        assert_eq!(s.avg_harvested, vec![1.0, 2.0]);
        assert_eq!(s.aggregate_harvested, 3.0);
        assert_eq!(s.rate_samples, vec![(0, 0, 1.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 3.0)]);
        assert_eq!(s.final_batteries, vec![5.0, 4.0]);
        assert_eq!(s.peak_batteries, vec![5.0, 6.0]);
        assert_eq!(s.seconds_per_frame, 1.0);
    }
}
