//! Rate-power region sweeps on a fixed channel draw.

use rayon::prelude::*;

use crate::bd::{build_effective_channels, EffectiveChannels};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::ChannelSet;
use crate::solver::{solve_wsr_harvest, solve_wsr_info_only, SolverConfig};

/// Outcome at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleStatus {
    /// Optimal weighted sum rate.
    Feasible(f64),
    Infeasible,
    /// The solver ran out of iterations.
    Unconverged,
}

impl SampleStatus {
    pub fn value(self) -> Option<f64> {
        match self {
            SampleStatus::Feasible(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpSample {
    pub q: Vec<f64>,
    pub status: SampleStatus,
}

/// Corner of the region where all power serves one harvesting user.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyPoint {
    /// Position of the user in the harvest list.
    pub harvest_user: usize,
    /// `budget * lambda_max(H_j^H H_j)`, the unconstrained beamforming value.
    pub q_max: f64,
    /// Largest harvest reachable through the information users' null
    /// spaces; targets above it are infeasible for this grouping.
    pub q_max_effective: f64,
    /// Weighted sum rate delivered by the energy-beamforming covariance.
    pub sum_rate: f64,
    /// Harvest of every harvesting user under that covariance.
    pub harvested: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpRegion {
    pub samples: Vec<RpSample>,
    /// Weighted sum rate without harvesting constraints.
    pub sr_max: f64,
    /// Harvest of each harvesting user at the unconstrained optimum.
    pub q_info: Vec<f64>,
    pub energy_points: Vec<EnergyPoint>,
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Cartesian product of per-axis values; the last axis varies fastest.
pub fn grid_product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

fn energy_point(eff: &EffectiveChannels, weights: &[f64], budget: f64, j: usize) -> EnergyPoint {
    let q_max = budget * linalg::lambda_max(&linalg::gram(&eff.harvest_channels[j]));
    let (best, lmax) = (0..eff.n_info())
        .map(|i| (i, linalg::lambda_max(&eff.cross_gram[j][i])))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let eig = linalg::herm_eig(&eff.cross_gram[j][best]);
    let u = eig.vectors.column(0).into_owned();
    let reduced = (&u * u.adjoint()).scale(budget);
    let sum_rate = weights[best] * linalg::log2_det_i_plus(&eff.eff_info[best], &reduced);
    let full: CMat = eff.lift(best, &reduced);
    let harvested = eff
        .harvest_channels
        .iter()
        .map(|h| linalg::trace_re(&(h * &full * h.adjoint())))
        .collect();
    EnergyPoint { harvest_user: j, q_max, q_max_effective: budget * lmax.max(0.0), sum_rate, harvested }
}

/// Solve the harvest-constrained problem at every grid point.
///
/// `weights` has one entry per information user and each grid point one
/// target per harvesting user. Grid points are solved in parallel.
pub fn rp_region_sweep(
    channels: &ChannelSet,
    info: &[usize],
    harvest: &[usize],
    weights: &[f64],
    power_budget: f64,
    grid: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<RpRegion> {
    if grid.iter().any(|q| q.len() != harvest.len()) {
        return Err(Error::DimensionMismatch(format!("every grid point needs {} targets", harvest.len())));
    }
    let eff = build_effective_channels(channels, info, harvest)?;
    let unconstrained = solve_wsr_info_only(&eff, weights, power_budget, cfg)?;
    let total = unconstrained.total_covariance(channels.n_t);
    let q_info = eff.harvest_channels.iter().map(|h| linalg::trace_re(&(h * &total * h.adjoint()))).collect();
    let energy_points = (0..harvest.len()).map(|j| energy_point(&eff, weights, power_budget, j)).collect();
    let samples = grid
        .par_iter()
        .map(|q| {
            let status = match solve_wsr_harvest(&eff, weights, q, power_budget, cfg) {
                Ok(a) if a.feasible => SampleStatus::Feasible(a.objective),
                Ok(_) => SampleStatus::Infeasible,
                Err(Error::IterationBudget { .. }) => SampleStatus::Unconverged,
                Err(e) => return Err(e),
            };
            Ok(RpSample { q: q.clone(), status })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RpRegion { samples, sr_max: unconstrained.objective, q_info, energy_points })
}
