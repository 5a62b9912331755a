//! Domain types plus the power-consumption, battery and proportional-fair
//! arithmetic shared by the solver, grouping and simulation layers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Floor applied to proportional-fair averages so weights stay finite.
pub const PF_FLOOR: f64 = 1e-6;

/// Channel from the base station to one terminal, `n_rx x n_tx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub user_id: usize,
    pub entries: CMat,
}

impl ChannelMatrix {
    pub fn new(user_id: usize, entries: CMat) -> Result<Self> {
        if !linalg::all_finite(&entries) {
            return Err(Error::InvalidInput(format!("channel of user {user_id} has non-finite entries")));
        }
        Ok(Self { user_id, entries })
    }

    pub fn n_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.ncols()
    }
}

/// All channels of one frame, indexed by user id.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub n_t: usize,
    channels: Vec<ChannelMatrix>,
}

impl ChannelSet {
    /// Channels must be listed in user-id order starting at 0.
    pub fn new(n_t: usize, channels: Vec<ChannelMatrix>) -> Result<Self> {
        for (k, ch) in channels.iter().enumerate() {
            if ch.user_id != k {
                return Err(Error::InvalidInput(format!("channel {k} carries user id {}", ch.user_id)));
            }
            if ch.n_tx() != n_t {
                return Err(Error::DimensionMismatch(format!(
                    "user {k} channel has {} columns, expected {n_t}",
                    ch.n_tx()
                )));
            }
        }
        Ok(Self { n_t, channels })
    }

    /// Convenience constructor from bare matrices.
    pub fn from_matrices(n_t: usize, mats: Vec<CMat>) -> Result<Self> {
        let channels = mats
            .into_iter()
            .enumerate()
            .map(|(k, m)| ChannelMatrix::new(k, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_t, channels)
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn get(&self, user: usize) -> &CMat {
        &self.channels[user].entries
    }

    pub fn n_rx(&self, user: usize) -> usize {
        self.channels[user].n_rx()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChannelMatrix> {
        self.channels.iter()
    }
}

/// Transmitter and receiver power-consumption parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Constant transmitter circuit power (W).
    pub p_c_tx: f64,
    /// Receiver front-end power (W).
    pub p_c_rx: f64,
    /// Decoding power at zero rate (W).
    pub c1: f64,
    /// Exponential growth of decoding power per bit/s/Hz.
    pub c2: f64,
    /// Total transmitter power budget (W).
    pub p_max: f64,
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.p_c_tx, self.p_c_rx, self.c1, self.c2, self.p_max];
        if fields.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Config("power model fields must be finite and positive".into()));
        }
        if self.p_max <= self.p_c_tx {
            return Err(Error::Config("p_max must exceed p_c_tx".into()));
        }
        Ok(())
    }

    /// Power left for radiation once the circuit power is paid.
    pub fn radiated_budget(&self) -> f64 {
        self.p_max - self.p_c_tx
    }
}

/// Per-terminal state carried across frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalState {
    pub battery: f64,
    pub capacity: f64,
    pub zeta: f64,
    /// Harvesting target, already divided by `zeta`.
    pub q_min: f64,
    pub pf_avg: f64,
    pub weight: f64,
    pub n_antennas: usize,
}

impl TerminalState {
    /// A fresh terminal with the proportional-fair average at its floor.
    pub fn new(battery: f64, capacity: f64, zeta: f64, q_min: f64, n_antennas: usize) -> Self {
        Self { battery, capacity, zeta, q_min, pf_avg: PF_FLOOR, weight: 1.0 / PF_FLOOR, n_antennas }
    }

    pub fn charge_ratio(&self) -> f64 {
        self.battery / self.capacity
    }
}

/// Frame timing and scheduling constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    /// Frame duration (s).
    pub t_f: f64,
    /// Frames per superframe.
    pub superframe_frames: usize,
    /// Effective proportional-fair window (frames).
    pub t_c: f64,
    /// Supergrouping battery threshold.
    pub alpha: f64,
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_f > 0.0) || self.superframe_frames == 0 || !(self.t_c >= 1.0) || !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config("frame config requires t_f > 0, superframe_frames >= 1, t_c >= 1, alpha in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Supergroup candidates and per-frame groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserSets {
    pub super_info: Vec<usize>,
    pub super_harvest: Vec<usize>,
    pub info: Vec<usize>,
    pub harvest: Vec<usize>,
}

impl UserSets {
    /// Check disjointness and membership; `k` is the number of users when
    /// the supergroups are expected to partition the population.
    pub fn check(&self, k: Option<usize>) -> Result<()> {
        if self.info.iter().any(|u| self.harvest.contains(u)) {
            return Err(Error::InvalidInput("info and harvest groups overlap".into()));
        }
        if self.info.iter().any(|u| !self.super_info.contains(u)) {
            return Err(Error::InvalidInput("info group leaves its supergroup".into()));
        }
        if self.harvest.iter().any(|u| !self.super_harvest.contains(u)) {
            return Err(Error::InvalidInput("harvest group leaves its supergroup".into()));
        }
        if let Some(k) = k {
            if self.super_info.len() + self.super_harvest.len() != k {
                return Err(Error::InvalidInput("supergroups do not cover every user".into()));
            }
        }
        Ok(())
    }
}

/// Decoding power `c1 exp(c2 R)`.
pub fn decoding_power(rate: f64, model: &PowerModel) -> f64 {
    model.c1 * (model.c2 * rate).exp()
}

/// Largest rate a terminal can decode over one frame with its battery.
///
/// Returns 0 when the battery cannot cover the zero-rate decoding power plus
/// the front end.
pub fn max_rate(battery: f64, model: &PowerModel, t_f: f64) -> f64 {
    let available = battery / t_f - model.p_c_rx;
    (available.max(model.c1) / model.c1).ln() / model.c2
}

/// Post-efficiency power collected by a harvester: `zeta * sum_i Tr(H S_i H^H)`.
pub fn harvested_power(h: &CMat, covariances: &[CMat], zeta: f64) -> Result<f64> {
    let mut total = 0.0;
    for s in covariances {
        if s.nrows() != h.ncols() || s.ncols() != h.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "covariance {}x{} against channel with {} columns",
                s.nrows(),
                s.ncols(),
                h.ncols()
            )));
        }
        total += linalg::trace_re(&(h * s * h.adjoint()));
    }
    Ok(zeta * total.max(0.0))
}

/// Battery after serving one frame of data at `rate`.
pub fn update_battery_info(state: &TerminalState, rate: f64, model: &PowerModel, t_f: f64) -> TerminalState {
    let drain = t_f * (decoding_power(rate, model) + model.p_c_rx);
    TerminalState { battery: (state.battery - drain).clamp(0.0, state.capacity), ..*state }
}

/// Battery after one frame of harvesting `harvested` (post-efficiency) power.
pub fn update_battery_harvest(state: &TerminalState, harvested: f64, model: &PowerModel, t_f: f64) -> TerminalState {
    let delta = t_f * (harvested - model.p_c_rx);
    TerminalState { battery: (state.battery + delta).clamp(0.0, state.capacity), ..*state }
}

/// One step of the exponentially averaged delivered rate and its PF weight.
pub fn pf_update(state: &TerminalState, achieved_rate: f64, t_c: f64) -> TerminalState {
    let pf_avg = ((1.0 - 1.0 / t_c) * state.pf_avg + achieved_rate / t_c).max(PF_FLOOR);
    TerminalState { pf_avg, weight: 1.0 / pf_avg, ..*state }
}
