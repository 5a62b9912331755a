//! The superframe and frame loop.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::grouping::{
    allocate, baseline_random, baseline_round_robin, select_harvest_decoupled, select_info_greedy, select_joint_chs, supergroup,
    Strategy,
};
use crate::linalg::{self, CMat};
use crate::model::{self, ChannelMatrix, ChannelSet, TerminalState, UserSets};
use crate::sim::scenario::ScenarioConfig;
use crate::solver::{energy_beamforming_max, harvest_feasibility, Allocation, SolverConfig};

/// Substream ids derived from the run seed.
const STREAM_CHANNELS: u64 = 1;
const STREAM_BATTERIES: u64 = 2;
const STREAM_GROUPING: u64 = 3;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Role of a terminal in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Info,
    Harvest,
    Idle,
}

impl Role {
    pub fn code(self) -> &'static str {
        match self {
            Role::Info => "I",
            Role::Harvest => "E",
            Role::Idle => "idle",
        }
    }
}

/// What happened in one frame. Per-user vectors are indexed by user id.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: usize,
    /// Battery levels at the end of the frame.
    pub batteries: Vec<f64>,
    /// Delivered rate (bit/s/Hz), zero for users not receiving data.
    pub rates: Vec<f64>,
    /// Post-efficiency harvested power, zero for users not harvesting.
    pub harvested: Vec<f64>,
    pub roles: Vec<Role>,
    pub feasible: bool,
    pub iterations: usize,
}

impl FrameRecord {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn total_harvested(&self) -> f64 {
        self.harvested.iter().sum()
    }
}

/// Time-indexed record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub seed: u64,
    pub config_hash: String,
    pub capacities: Vec<f64>,
    pub records: Vec<FrameRecord>,
    /// Wall-clock seconds spent in grouping and allocation, per frame.
    pub scheduling_seconds: Vec<f64>,
}

/// Draw one i.i.d. `CN(0, 1)` channel per terminal, scaled for path loss.
pub fn generate_channels<R: Rng + ?Sized>(rng: &mut R, scenario: &ScenarioConfig) -> ChannelSet {
    let amp_std = std::f64::consts::FRAC_1_SQRT_2;
    let channels = scenario
        .terminals
        .iter()
        .enumerate()
        .map(|(u, t)| {
            let scale = t.distance.powf(-scenario.pathloss_exponent / 2.0) * amp_std;
            let entries = CMat::from_fn(t.antennas, scenario.n_t, |_, _| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                num_complex::Complex64::new(re * scale, im * scale)
            });
            ChannelMatrix { user_id: u, entries }
        })
        .collect();
    ChannelSet::new(scenario.n_t, channels).expect("generated channels have consistent dimensions")
}

/// Channels of a single-frame study: the snapshot's inline matrices when
/// given, otherwise the first draw of the run's channel substream.
pub fn snapshot_channels(scenario: &ScenarioConfig) -> Result<ChannelSet> {
    match scenario.snapshot.as_ref().and_then(|s| s.channels.as_ref()) {
        Some(specs) => {
            let mats = specs.iter().map(|m| m.to_matrix()).collect::<Result<Vec<_>>>()?;
            ChannelSet::from_matrices(scenario.n_t, mats)
        }
        None => Ok(generate_channels(&mut substream(scenario.rng_seed, STREAM_CHANNELS), scenario)),
    }
}

/// Groups and transmission chosen for one frame.
struct FramePlan {
    info: Vec<usize>,
    harvest: Vec<usize>,
    allocation: Option<Allocation>,
    /// Pre-efficiency harvest per harvesting user for energy-only frames.
    energy: Option<Vec<f64>>,
}

impl FramePlan {
    fn idle() -> Self {
        Self { info: Vec::new(), harvest: Vec::new(), allocation: None, energy: None }
    }

    fn feasible(&self) -> bool {
        match (&self.allocation, &self.energy) {
            (Some(a), _) => a.feasible,
            (None, Some(_)) => true,
            (None, None) => self.info.is_empty() && self.harvest.is_empty(),
        }
    }
}

/// Mutable state of a run.
pub struct Simulation<'a> {
    scenario: &'a ScenarioConfig,
    pub terminals: Vec<TerminalState>,
    pub sets: UserSets,
    frame: usize,
    rr_pointer: usize,
    channel_rng: ChaCha8Rng,
    grouping_rng: ChaCha8Rng,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a ScenarioConfig) -> Result<Self> {
        scenario.validate()?;
        let mut battery_rng = substream(scenario.rng_seed, STREAM_BATTERIES);
        let [lo, hi] = scenario.capacity_range;
        let terminals = scenario
            .terminals
            .iter()
            .map(|t| {
                let drawn = if hi > lo { battery_rng.random_range(lo..=hi) } else { lo };
                let capacity = t.capacity.unwrap_or(drawn);
                TerminalState::new(capacity * scenario.initial_charge, capacity, t.zeta, t.q_target, t.antennas)
            })
            .collect();
        Ok(Self {
            scenario,
            terminals,
            sets: UserSets::default(),
            frame: 0,
            rr_pointer: 0,
            channel_rng: substream(scenario.rng_seed, STREAM_CHANNELS),
            grouping_rng: substream(scenario.rng_seed, STREAM_GROUPING),
        })
    }

    fn strategy(&self) -> Strategy {
        self.scenario.grouping.strategy
    }

    fn limits(&self) -> (usize, usize) {
        let g = &self.scenario.grouping;
        let (n_t, n_r) = (self.scenario.n_t, self.scenario.max_rx());
        let u = g.info_limit(n_t, n_r);
        let m = if self.strategy() == Strategy::NoSwipt { 0 } else { g.harvest_limit(n_t, n_r) };
        (u, m)
    }

    /// Energy-only transmission to the best harvesting candidates, used when
    /// no information candidate can decode. The least-power covariance that
    /// meets every target is scaled up to the full budget.
    fn harvest_only(&self, channels: &ChannelSet, super_harvest: &[usize], m: usize) -> Result<FramePlan> {
        let scenario = self.scenario;
        let q = scenario.q_targets();
        let budget = scenario.power.radiated_budget();
        // Candidates are scored against an isotropic full-budget covariance.
        let isotropic = linalg::identity(channels.n_t).scale(budget / channels.n_t as f64);
        let harvest = select_harvest_decoupled(super_harvest, channels, &isotropic, &q, m);
        if harvest.is_empty() {
            return Ok(FramePlan::idle());
        }
        let mats: Vec<CMat> = harvest.iter().map(|&j| channels.get(j).clone()).collect();
        let targets: Vec<f64> = harvest.iter().map(|&j| q[j]).collect();
        // The covariance is rescaled to the full budget afterwards, so a
        // coarse bracket on the least power is enough here.
        let cfg = SolverConfig { bisection_tol: 1e-3, projection_max_iters: 2_000, ..scenario.solver };
        let f = harvest_feasibility(&mats, &targets, budget, &cfg)?;
        if !f.feasible {
            return Ok(FramePlan { info: Vec::new(), harvest, allocation: None, energy: None });
        }
        let cov = if f.min_power > 0.0 {
            f.covariance.scale(budget / f.min_power)
        } else {
            energy_beamforming_max(&mats[0], budget).1
        };
        let delivered = mats.iter().map(|h| linalg::trace_re(&(h * &cov * h.adjoint())).max(0.0)).collect();
        Ok(FramePlan { info: Vec::new(), harvest, allocation: None, energy: Some(delivered) })
    }

    /// Choose the groups for this frame and solve the allocation.
    fn schedule(&mut self, channels: &ChannelSet) -> Result<FramePlan> {
        let scenario = self.scenario;
        let k = self.terminals.len();
        let (u, m) = self.limits();
        let weights: Vec<f64> = self.terminals.iter().map(|t| t.weight).collect();
        let q = scenario.q_targets();
        let budget = scenario.power.radiated_budget();
        let cfg = &scenario.solver;
        let strategy = self.strategy();
        if matches!(strategy, Strategy::RoundRobin | Strategy::Random) {
            let sets = if strategy == Strategy::RoundRobin {
                baseline_round_robin(k, &mut self.rr_pointer, u, m)
            } else {
                baseline_random(k, &mut self.grouping_rng, u, m)
            };
            let allocation = allocate(channels, &sets.info, &sets.harvest, &weights, &q, budget, cfg)?;
            self.sets = sets.clone();
            return Ok(FramePlan { info: sets.info, harvest: sets.harvest, allocation, energy: None });
        }
        // Terminals below the decoding floor cannot use any rate, so they are
        // not offered as information candidates.
        let t_f = scenario.frame.t_f;
        let super_info: Vec<usize> = self
            .sets
            .super_info
            .iter()
            .copied()
            .filter(|&i| model::max_rate(self.terminals[i].battery, &scenario.power, t_f) > 0.0)
            .collect();
        let super_harvest = self.sets.super_harvest.clone();
        if super_info.is_empty() {
            return self.harvest_only(channels, &super_harvest, m);
        }
        match strategy {
            Strategy::LbDhs | Strategy::NoSwipt => {
                let sel = select_info_greedy(&super_info, channels, &weights, budget, u, cfg)?;
                if m == 0 {
                    return Ok(FramePlan { info: sel.info, harvest: Vec::new(), allocation: Some(sel.allocation), energy: None });
                }
                let total = sel.allocation.total_covariance(channels.n_t);
                let harvest = select_harvest_decoupled(&super_harvest, channels, &total, &q, m);
                let allocation = allocate(channels, &sel.info, &harvest, &weights, &q, budget, cfg)?;
                Ok(FramePlan { info: sel.info, harvest, allocation, energy: None })
            }
            _ => {
                let q_used = if strategy == Strategy::NoHarvestMgmt { vec![0.0; k] } else { q };
                let sel = select_joint_chs(&super_info, &super_harvest, channels, &weights, &q_used, budget, u, m, cfg)?;
                Ok(FramePlan { info: sel.info, harvest: sel.harvest, allocation: sel.allocation, energy: None })
            }
        }
    }

    /// Run one frame: supergrouping at superframe boundaries, grouping,
    /// allocation, the decodable-rate cap, battery and weight updates.
    pub fn run_frame(&mut self) -> Result<(FrameRecord, f64)> {
        let scenario = self.scenario;
        let k = self.terminals.len();
        let uses_supergroups = !matches!(self.strategy(), Strategy::RoundRobin | Strategy::Random);
        if uses_supergroups && self.frame.is_multiple_of(scenario.frame.superframe_frames) {
            self.sets = if k >= 2 {
                supergroup(&self.terminals, scenario.frame.alpha)?
            } else {
                UserSets { super_info: (0..k).collect(), ..UserSets::default() }
            };
        }
        let channels = generate_channels(&mut self.channel_rng, scenario);

        let started = Instant::now();
        let plan = self.schedule(&channels)?;
        let elapsed = started.elapsed().as_secs_f64();
        self.sets.info = plan.info.clone();
        self.sets.harvest = plan.harvest.clone();

        let feasible = plan.feasible();
        let iterations = plan.allocation.as_ref().map_or(0, |a| a.iterations);
        let mut roles = vec![Role::Idle; k];
        let mut rates = vec![0.0; k];
        let mut harvested = vec![0.0; k];
        let t_f = scenario.frame.t_f;
        if let Some(a) = plan.allocation.as_ref().filter(|a| a.feasible) {
            for (pos, &i) in a.info_users.iter().enumerate() {
                let cap = model::max_rate(self.terminals[i].battery, &scenario.power, t_f);
                rates[i] = a.rates[pos].min(cap).max(0.0);
            }
            for (pos, &j) in a.harvest_users.iter().enumerate() {
                harvested[j] = self.terminals[j].zeta * a.harvested[pos].max(0.0);
            }
        }
        if let Some(delivered) = &plan.energy {
            for (&j, &h) in plan.harvest.iter().zip(delivered) {
                harvested[j] = self.terminals[j].zeta * h;
            }
        }
        let (info, harvest) = (plan.info, plan.harvest);
        for &i in &info {
            roles[i] = Role::Info;
            self.terminals[i] = model::update_battery_info(&self.terminals[i], rates[i], &scenario.power, t_f);
        }
        for &j in &harvest {
            roles[j] = Role::Harvest;
            self.terminals[j] = model::update_battery_harvest(&self.terminals[j], harvested[j], &scenario.power, t_f);
        }
        for (u, t) in self.terminals.iter_mut().enumerate() {
            *t = model::pf_update(t, rates[u], scenario.frame.t_c);
        }

        let record = FrameRecord {
            frame: self.frame,
            batteries: self.terminals.iter().map(|t| t.battery).collect(),
            rates,
            harvested,
            roles,
            feasible,
            iterations,
        };
        self.frame += 1;
        Ok((record, elapsed))
    }
}

/// Run every frame of `scenario`.
pub fn run_simulation(scenario: &ScenarioConfig) -> Result<SimTrace> {
    let mut sim = Simulation::new(scenario)?;
    let capacities = sim.terminals.iter().map(|t| t.capacity).collect();
    let mut records = Vec::with_capacity(scenario.total_frames);
    let mut scheduling_seconds = Vec::with_capacity(scenario.total_frames);
    for _ in 0..scenario.total_frames {
        let (record, secs) = sim.run_frame()?;
        records.push(record);
        scheduling_seconds.push(secs);
    }
    Ok(SimTrace { seed: scenario.rng_seed, config_hash: scenario.config_hash(), capacities, records, scheduling_seconds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::TerminalConfig;

    fn small(strategy: Strategy, frames: usize) -> ScenarioConfig {
        let mut s = ScenarioConfig::reference(6, 11);
        s.n_t = 4;
        s.total_frames = frames;
        s.capacity_range = [300.0, 1000.0];
        s.grouping.strategy = strategy;
        for t in &mut s.terminals {
            t.q_target = 2.0;
        }
        s
    }

    #[test]
    fn channel_moments_match_unit_variance() {
        let mut s = ScenarioConfig::reference(1, 3);
        s.n_t = 100;
        s.terminals[0].antennas = 1000;
        let ch = generate_channels(&mut substream(3, STREAM_CHANNELS), &s);
        let h = ch.get(0);
        let var = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / h.len() as f64;
        assert!((var - 1.0).abs() < 0.02, "{var}");
        let mean = h.iter().sum::<num_complex::Complex64>() / h.len() as f64;
        assert!(mean.norm() < 0.01);
    }

    #[test]
    fn channel_pathloss_scaling() {
        let mut s = ScenarioConfig::reference(1, 4);
        s.n_t = 100;
        s.terminals[0] = TerminalConfig { antennas: 1000, capacity: None, zeta: 1.0, q_target: 0.0, distance: 2.0 };
        let ch = generate_channels(&mut substream(4, STREAM_CHANNELS), &s);
        let h = ch.get(0);
        let var = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / h.len() as f64;
        assert!((var - 0.25).abs() < 0.25 * 0.02, "{var}");
    }

    #[test]
    fn channels_are_reproducible() {
        let s = ScenarioConfig::reference(3, 5);
        let a = generate_channels(&mut substream(5, STREAM_CHANNELS), &s);
        let b = generate_channels(&mut substream(5, STREAM_CHANNELS), &s);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x.entries == y.entries));
    }

    #[test]
    fn single_frame_trace() {
        let trace = run_simulation(&small(Strategy::LbDhs, 1)).unwrap();
        assert_eq!(trace.records.len(), 1);
    }

    #[test]
    fn same_seed_same_trace() {
        for strategy in [Strategy::LbChs, Strategy::Random] {
            let s = small(strategy, 5);
            assert_eq!(run_simulation(&s).unwrap().records, run_simulation(&s).unwrap().records);
        }
    }

    #[test]
    fn no_swipt_batteries_never_rise() {
        let trace = run_simulation(&small(Strategy::NoSwipt, 20)).unwrap();
        let mut prev = trace.capacities.iter().map(|c| c * 0.5).collect::<Vec<_>>();
        for r in &trace.records {
            for (b, p) in r.batteries.iter().zip(&prev) {
                assert!(b <= p);
            }
            assert!(r.roles.iter().all(|&x| x != Role::Harvest));
            prev = r.batteries.clone();
        }
    }

    #[test]
    fn static_single_user_matches_info_only() {
        let mut s = small(Strategy::RoundRobin, 3);
        s.terminals.truncate(1);
        s.terminals[0].q_target = 0.0;
        s.terminals[0].capacity = Some(1e9);
        s.capacity_range = [1e9, 1e9];
        s.n_t = 2;
        s.grouping.max_info_users = Some(1);
        let trace = run_simulation(&s).unwrap();
        let mut rng = substream(s.rng_seed, STREAM_CHANNELS);
        for r in &trace.records {
            let ch = generate_channels(&mut rng, &s);
            let eff = crate::bd::build_effective_channels(&ch, &[0], &[]).unwrap();
            let a = crate::solver::solve_wsr_info_only(&eff, &[1.0], 10.0, &s.solver).unwrap();
            assert!((r.rates[0] - a.rates[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_battery_info_user_gets_nothing() {
        let mut s = small(Strategy::RoundRobin, 1);
        s.initial_charge = 0.0;
        let trace = run_simulation(&s).unwrap();
        assert!(trace.records[0].rates.iter().all(|&r| r == 0.0));
    }
}
