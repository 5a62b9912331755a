//! Two-stage user selection: battery-driven supergrouping once per
//! superframe, then per-frame choice of the information and harvesting
//! groups inside the supergroups.
//!
//! All selections are deterministic: ties in battery ratios, harvesting
//! scores and weighted rates are broken by ascending user id.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bd::{bd_dimension_ok, build_effective_channels};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{ChannelSet, TerminalState, UserSets};
use crate::solver::{solve_wsr_harvest, solve_wsr_info_only, Allocation, SolverConfig};

/// Scheduling strategy for a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Battery supergrouping with decoupled information and harvest selection.
    #[serde(rename = "LB-DHS")]
    LbDhs,
    /// Battery supergrouping with joint information and harvest selection.
    #[serde(rename = "LB-CHS")]
    LbChs,
    #[serde(rename = "RR")]
    RoundRobin,
    #[serde(rename = "Random")]
    Random,
    /// Information users only; nobody recharges.
    #[serde(rename = "no-swipt")]
    NoSwipt,
    /// Joint selection with every harvesting target set to zero.
    #[serde(rename = "no-harvest-mgmt")]
    NoHarvestMgmt,
}

impl Strategy {
    pub const ALL: [Strategy; 6] =
        [Strategy::LbDhs, Strategy::LbChs, Strategy::RoundRobin, Strategy::Random, Strategy::NoSwipt, Strategy::NoHarvestMgmt];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::LbDhs => "LB-DHS",
            Strategy::LbChs => "LB-CHS",
            Strategy::RoundRobin => "RR",
            Strategy::Random => "Random",
            Strategy::NoSwipt => "no-swipt",
            Strategy::NoHarvestMgmt => "no-harvest-mgmt",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown strategy '{s}' (expected one of LB-DHS, LB-CHS, RR, Random, no-swipt, no-harvest-mgmt)")))
    }
}

/// Group sizes and strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupingConfig {
    pub strategy: Strategy,
    /// Maximum number of information users `U`; `None` uses `ceil(n_T / N_R)`.
    pub max_info_users: Option<usize>,
    /// Harvesting group size `M`; `None` uses `U`.
    pub harvest_group_size: Option<usize>,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        Self { strategy: Strategy::LbDhs, max_info_users: None, harvest_group_size: None }
    }
}

impl GroupingConfig {
    /// `U`, defaulting to `ceil(n_t / n_r)` with `n_r` the largest terminal.
    pub fn info_limit(&self, n_t: usize, n_r: usize) -> usize {
        self.max_info_users.unwrap_or_else(|| n_t.div_ceil(n_r.max(1))).max(1)
    }

    /// `M`, defaulting to `U`.
    pub fn harvest_limit(&self, n_t: usize, n_r: usize) -> usize {
        self.harvest_group_size.unwrap_or_else(|| self.info_limit(n_t, n_r))
    }
}

fn ordered_by_ratio(terminals: &[TerminalState]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..terminals.len()).collect();
    order.sort_by(|&a, &b| terminals[a].charge_ratio().total_cmp(&terminals[b].charge_ratio()).then(a.cmp(&b)));
    order
}

/// Split all terminals into information and harvesting candidates by
/// battery ratio.
///
/// With ratios sorted ascending, when `alpha` lies below the middle ratio the
/// lower half harvests; otherwise every user up to and including the one
/// whose ratio is closest to `alpha` harvests.
pub fn supergroup(terminals: &[TerminalState], alpha: f64) -> Result<UserSets> {
    let k = terminals.len();
    if k < 2 {
        return Err(Error::InvalidInput("supergrouping needs at least two terminals".into()));
    }
    let order = ordered_by_ratio(terminals);
    let ratios: Vec<f64> = order.iter().map(|&u| terminals[u].charge_ratio()).collect();
    let half = k / 2;
    let split = if alpha < ratios[half - 1] {
        half
    } else {
        let closest = (0..k).min_by(|&a, &b| (ratios[a] - alpha).abs().total_cmp(&(ratios[b] - alpha).abs())).unwrap_or(0);
        closest + 1
    };
    let mut super_harvest = order[..split].to_vec();
    let mut super_info = order[split..].to_vec();
    super_harvest.sort_unstable();
    super_info.sort_unstable();
    Ok(UserSets { super_info, super_harvest, info: Vec::new(), harvest: Vec::new() })
}

/// Outcome of a greedy information-user selection.
#[derive(Debug, Clone)]
pub struct InfoSelection {
    pub info: Vec<usize>,
    /// Allocation of the selected set (no harvesting constraints).
    pub allocation: Allocation,
    /// Accepted weighted sum rates, one per round; strictly increasing.
    pub history: Vec<f64>,
}

fn rx_counts(channels: &ChannelSet, users: &[usize]) -> Vec<usize> {
    users.iter().map(|&u| channels.n_rx(u)).collect()
}

fn weights_of(users: &[usize], weights: &[f64]) -> Vec<f64> {
    users.iter().map(|&u| weights[u]).collect()
}

/// Information-only allocation for `info`, `None` when BD rules the set out.
fn info_only_allocation(channels: &ChannelSet, info: &[usize], weights: &[f64], budget: f64, cfg: &SolverConfig) -> Result<Option<Allocation>> {
    if !bd_dimension_ok(channels.n_t, &rx_counts(channels, info)) {
        return Ok(None);
    }
    match build_effective_channels(channels, info, &[]) {
        Ok(eff) => solve_wsr_info_only(&eff, &weights_of(info, weights), budget, cfg).map(Some),
        Err(Error::BdInfeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Allocation for `info` with harvesting constraints on `harvest`.
///
/// Returns `None` when BD rules the set out or the solver runs out of
/// iterations; infeasible targets give `Some` with `feasible = false`.
pub fn allocate(
    channels: &ChannelSet,
    info: &[usize],
    harvest: &[usize],
    weights: &[f64],
    q_targets: &[f64],
    budget: f64,
    cfg: &SolverConfig,
) -> Result<Option<Allocation>> {
    if harvest.is_empty() {
        return info_only_allocation(channels, info, weights, budget, cfg);
    }
    if info.is_empty() || !bd_dimension_ok(channels.n_t, &rx_counts(channels, info)) {
        return Ok(None);
    }
    let eff = match build_effective_channels(channels, info, harvest) {
        Ok(eff) => eff,
        Err(Error::BdInfeasible { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let q: Vec<f64> = harvest.iter().map(|&j| q_targets[j]).collect();
    match solve_wsr_harvest(&eff, &weights_of(info, weights), &q, budget, cfg) {
        Ok(a) => Ok(Some(a)),
        Err(Error::IterationBudget { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Pick the candidate with the largest objective; ties go to the lower id.
fn best_candidate(scored: Vec<(usize, f64, Allocation)>) -> Option<(usize, f64, Allocation)> {
    scored.into_iter().fold(None, |best, cur| match &best {
        Some((id, f, _)) if *f > cur.1 || (*f == cur.1 && *id < cur.0) => best,
        _ => Some(cur),
    })
}

/// Greedy information-user selection without harvesting constraints.
///
/// `weights` is indexed by user id. A candidate is accepted only when it
/// strictly raises the weighted sum rate, and only if the grown set still
/// satisfies the BD dimension constraint.
pub fn select_info_greedy(
    super_info: &[usize],
    channels: &ChannelSet,
    weights: &[f64],
    power_budget: f64,
    max_users: usize,
    cfg: &SolverConfig,
) -> Result<InfoSelection> {
    if super_info.is_empty() {
        return Err(Error::InvalidInput("no information candidates".into()));
    }
    let mut remaining: Vec<usize> = super_info.to_vec();
    remaining.sort_unstable();
    let mut scored = Vec::new();
    for &i in &remaining {
        if let Some(a) = info_only_allocation(channels, &[i], weights, power_budget, cfg)? {
            scored.push((i, a.objective, a));
        }
    }
    let Some((first, f0, alloc0)) = best_candidate(scored) else {
        return Err(Error::InvalidInput("no information candidate admits a single-user allocation".into()));
    };
    let mut info = vec![first];
    remaining.retain(|&u| u != first);
    let mut history = vec![f0];
    let mut allocation = alloc0;
    while info.len() < max_users && !remaining.is_empty() {
        let mut scored = Vec::new();
        for &i in &remaining {
            let mut trial = info.clone();
            trial.push(i);
            if let Some(a) = info_only_allocation(channels, &trial, weights, power_budget, cfg)? {
                scored.push((i, a.objective, a));
            }
        }
        match best_candidate(scored) {
            Some((i, f, a)) if f > *history.last().expect("nonempty") => {
                info.push(i);
                remaining.retain(|&u| u != i);
                history.push(f);
                allocation = a;
            }
            _ => break,
        }
    }
    Ok(InfoSelection { info, allocation, history })
}

/// Harvesting scores `m_j = Tr(H_j S H_j^H) - Q_j` for each candidate.
pub fn harvest_scores(candidates: &[usize], channels: &ChannelSet, total_covariance: &CMat, q_targets: &[f64]) -> Vec<(usize, f64)> {
    candidates
        .iter()
        .map(|&j| {
            let h = channels.get(j);
            (j, linalg::trace_re(&(h * total_covariance * h.adjoint())) - q_targets[j])
        })
        .collect()
}

fn top_scored(mut scores: Vec<(usize, f64)>, count: usize) -> Vec<usize> {
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scores.into_iter().take(count).map(|(j, _)| j).collect()
}

/// The `m` harvesting candidates with the largest scores against the
/// information users' total covariance.
pub fn select_harvest_decoupled(
    super_harvest: &[usize],
    channels: &ChannelSet,
    total_covariance: &CMat,
    q_targets: &[f64],
    m: usize,
) -> Vec<usize> {
    let mut out = top_scored(harvest_scores(super_harvest, channels, total_covariance, q_targets), m);
    out.sort_unstable();
    out
}

/// Harvest batch sizes for each greedy round: `m / u` each, with the
/// remainder going one by one to the earliest rounds.
pub fn harvest_batches(m: usize, u: usize) -> Vec<usize> {
    let u = u.max(1);
    (0..u).map(|r| m / u + usize::from(r < m % u)).collect()
}

/// Outcome of the joint selection.
#[derive(Debug, Clone)]
pub struct JointSelection {
    pub info: Vec<usize>,
    pub harvest: Vec<usize>,
    /// Allocation for the final groups, when one could be computed.
    pub allocation: Option<Allocation>,
    /// Accepted weighted sum rates, one per round; strictly increasing.
    pub history: Vec<f64>,
    /// Set when a round found no feasible candidate.
    pub diagnostic: Option<String>,
}

fn total_covariance(n_t: usize, alloc: &Allocation) -> CMat {
    alloc.covariances.iter().fold(linalg::zeros(n_t, n_t), |acc, s| acc + s)
}

/// Joint information and harvesting selection.
///
/// Each greedy round adds the information candidate with the best weighted
/// sum rate under the harvesting constraints of the users chosen so far, then
/// adds the next harvest batch scored against the accumulated covariance.
#[allow(clippy::too_many_arguments)]
pub fn select_joint_chs(
    super_info: &[usize],
    super_harvest: &[usize],
    channels: &ChannelSet,
    weights: &[f64],
    q_targets: &[f64],
    power_budget: f64,
    max_users: usize,
    harvest_size: usize,
    cfg: &SolverConfig,
) -> Result<JointSelection> {
    if super_info.is_empty() {
        return Err(Error::InvalidInput("no information candidates".into()));
    }
    let n_t = channels.n_t;
    let batches = harvest_batches(harvest_size, max_users);
    let mut remaining_info: Vec<usize> = super_info.to_vec();
    remaining_info.sort_unstable();
    let mut remaining_harvest: Vec<usize> = super_harvest.to_vec();
    remaining_harvest.sort_unstable();

    let mut scored = Vec::new();
    for &i in &remaining_info {
        if let Some(a) = info_only_allocation(channels, &[i], weights, power_budget, cfg)? {
            scored.push((i, a.objective, a));
        }
    }
    let Some((first, f0, alloc0)) = best_candidate(scored) else {
        return Err(Error::InvalidInput("no information candidate admits a single-user allocation".into()));
    };
    let mut info = vec![first];
    remaining_info.retain(|&u| u != first);
    let mut history = vec![f0];
    let mut harvest = Vec::new();
    let add_batch = |size: usize, alloc: &Allocation, harvest: &mut Vec<usize>, remaining: &mut Vec<usize>| {
        let batch = top_scored(harvest_scores(remaining, channels, &total_covariance(n_t, alloc), q_targets), size);
        remaining.retain(|u| !batch.contains(u));
        harvest.extend(batch);
    };
    add_batch(batches[0], &alloc0, &mut harvest, &mut remaining_harvest);
    let mut diagnostic = None;

    for &batch in batches.iter().skip(1) {
        if remaining_info.is_empty() {
            break;
        }
        let mut scored = Vec::new();
        for &i in &remaining_info {
            let mut trial = info.clone();
            trial.push(i);
            if let Some(a) = allocate(channels, &trial, &harvest, weights, q_targets, power_budget, cfg)? {
                if a.feasible {
                    scored.push((i, a.objective, a));
                }
            }
        }
        if scored.is_empty() {
            diagnostic = Some(format!("no feasible information candidate in round {}", info.len() + 1));
            break;
        }
        match best_candidate(scored) {
            Some((i, f, a)) if f > *history.last().expect("nonempty") => {
                info.push(i);
                remaining_info.retain(|&u| u != i);
                history.push(f);
                add_batch(batch, &a, &mut harvest, &mut remaining_harvest);
            }
            _ => break,
        }
    }
    harvest.sort_unstable();
    let allocation = allocate(channels, &info, &harvest, weights, q_targets, power_budget, cfg)?;
    Ok(JointSelection { info, harvest, allocation, history, diagnostic })
}

/// Round-robin groups: the next `u` users in id order receive data and the
/// following `m` harvest; the pointer then advances by `u`.
pub fn baseline_round_robin(k: usize, pointer: &mut usize, u: usize, m: usize) -> UserSets {
    let u = u.min(k);
    let m = m.min(k - u);
    let info: Vec<usize> = (0..u).map(|o| (*pointer + o) % k).collect();
    let harvest: Vec<usize> = (u..u + m).map(|o| (*pointer + o) % k).collect();
    *pointer = (*pointer + u) % k.max(1);
    UserSets { super_info: info.clone(), super_harvest: harvest.clone(), info, harvest }
}

/// Uniformly random groups drawn without replacement.
pub fn baseline_random<R: Rng + ?Sized>(k: usize, rng: &mut R, u: usize, m: usize) -> UserSets {
    let u = u.min(k);
    let m = m.min(k - u);
    let drawn = sample(rng, k, u + m).into_vec();
    let mut info = drawn[..u].to_vec();
    let mut harvest = drawn[u..].to_vec();
    info.sort_unstable();
    harvest.sort_unstable();
    UserSets { super_info: info.clone(), super_harvest: harvest.clone(), info, harvest }
}
