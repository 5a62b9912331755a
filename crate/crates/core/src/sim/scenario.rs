//! Scenario description, loaded from a structured document by the CLI.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grouping::GroupingConfig;
use crate::linalg::CMat;
use crate::model::{FrameConfig, PowerModel};
use crate::solver::SolverConfig;

fn one() -> f64 {
    1.0
}

fn default_pathloss() -> f64 {
    2.0
}

fn default_capacity_range() -> [f64; 2] {
    [3000.0, 10000.0]
}

fn default_initial_charge() -> f64 {
    0.5
}

/// One terminal of the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalConfig {
    /// Receive antennas.
    pub antennas: usize,
    /// Battery capacity (energy units); drawn from `capacity_range` when absent.
    #[serde(default)]
    pub capacity: Option<f64>,
    /// Harvesting efficiency in (0, 1].
    #[serde(default = "one")]
    pub zeta: f64,
    /// Harvesting target in power units, already divided by `zeta`.
    pub q_target: f64,
    /// Relative distance to the transmitter (1 = reference).
    #[serde(default = "one")]
    pub distance: f64,
}

/// A dense complex matrix given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub rows: usize,
    pub cols: usize,
    /// Real parts, row-major.
    pub re: Vec<f64>,
    /// Imaginary parts, row-major; all zero when omitted.
    #[serde(default)]
    pub im: Vec<f64>,
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.rows * self.cols;
        if self.re.len() != n || !(self.im.is_empty() || self.im.len() == n) {
            return Err(Error::Config(format!("matrix {}x{} needs {n} real (and optional imaginary) entries", self.rows, self.cols)));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |r, c| {
            let k = r * self.cols + c;
            num_complex::Complex64::new(self.re[k], self.im.get(k).copied().unwrap_or(0.0))
        }))
    }
}

/// Inputs of a single allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    pub info: Vec<usize>,
    #[serde(default)]
    pub harvest: Vec<usize>,
    /// One matrix per terminal; drawn from the seed when absent.
    #[serde(default)]
    pub channels: Option<Vec<MatrixSpec>>,
    /// Weights of the information users, in the order of `info`; all one when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Scale all targets down until they become feasible.
    #[serde(default)]
    pub restore: bool,
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Transmit antennas.
    pub n_t: usize,
    pub terminals: Vec<TerminalConfig>,
    pub power: PowerModel,
    pub frame: FrameConfig,
    #[serde(default)]
    pub grouping: GroupingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub total_frames: usize,
    /// Path-loss exponent; channel amplitudes scale as `distance^(-exponent / 2)`.
    #[serde(default = "default_pathloss")]
    pub pathloss_exponent: f64,
    pub rng_seed: u64,
    /// Range for capacities not given per terminal.
    #[serde(default = "default_capacity_range")]
    pub capacity_range: [f64; 2],
    /// Initial battery level as a fraction of capacity.
    #[serde(default = "default_initial_charge")]
    pub initial_charge: f64,
    #[serde(default)]
    pub snapshot: Option<SnapshotConfig>,
}

impl ScenarioConfig {
    /// The cell used for the system-level study: 8 transmit antennas, `k`
    /// two-antenna terminals, 10 W radiated, 100 ms frames, 3 s superframes,
    /// exponential decoding cost and a common harvesting target of 50.
    pub fn reference(k: usize, seed: u64) -> Self {
        Self {
            n_t: 8,
            terminals: (0..k).map(|_| TerminalConfig { antennas: 2, capacity: None, zeta: 1.0, q_target: 50.0, distance: 1.0 }).collect(),
            power: PowerModel { p_c_tx: 1.0, p_c_rx: 0.1, c1: 30.0, c2: 0.75, p_max: 11.0 },
            frame: FrameConfig { t_f: 0.1, superframe_frames: 30, t_c: 5.0, alpha: 0.1 },
            grouping: GroupingConfig::default(),
            solver: SolverConfig::default(),
            total_frames: 300,
            pathloss_exponent: 2.0,
            rng_seed: seed,
            capacity_range: default_capacity_range(),
            initial_charge: 0.5,
            snapshot: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.power.validate()?;
        self.frame.validate()?;
        self.solver.validate()?;
        if self.n_t == 0 {
            return Err(Error::Config("n_t must be positive".into()));
        }
        if self.terminals.is_empty() {
            return Err(Error::Config("at least one terminal is required".into()));
        }
        if self.total_frames == 0 {
            return Err(Error::Config("total_frames must be at least 1".into()));
        }
        if !(self.pathloss_exponent >= 0.0) || !self.pathloss_exponent.is_finite() {
            return Err(Error::Config("pathloss_exponent must be finite and nonnegative".into()));
        }
        let [lo, hi] = self.capacity_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config("capacity_range must satisfy 0 < lo <= hi".into()));
        }
        if !(0.0..=1.0).contains(&self.initial_charge) {
            return Err(Error::Config("initial_charge must lie in [0, 1]".into()));
        }
        for (u, t) in self.terminals.iter().enumerate() {
            let capacity_ok = t.capacity.is_none_or(|c| c > 0.0 && c.is_finite());
            if t.antennas == 0
                || !capacity_ok
                || !(t.zeta > 0.0 && t.zeta <= 1.0)
                || !(t.q_target >= 0.0 && t.q_target.is_finite())
                || !(t.distance > 0.0 && t.distance.is_finite())
            {
                return Err(Error::Config(format!(
                    "terminal {u}: need antennas >= 1, capacity > 0, zeta in (0, 1], q_target >= 0, distance > 0"
                )));
            }
        }
        if let Some(g) = self.grouping.max_info_users {
            if g == 0 {
                return Err(Error::Config("grouping.max_info_users must be at least 1".into()));
            }
        }
        if let Some(s) = &self.snapshot {
            let k = self.terminals.len();
            if s.info.is_empty() || s.info.iter().chain(&s.harvest).any(|&u| u >= k) {
                return Err(Error::Config("snapshot: info must be nonempty and every id must name a terminal".into()));
            }
            if s.info.iter().any(|u| s.harvest.contains(u)) {
                return Err(Error::Config("snapshot: info and harvest sets overlap".into()));
            }
            if let Some(ch) = &s.channels {
                if ch.len() != k {
                    return Err(Error::Config(format!("snapshot: expected {k} channel matrices, got {}", ch.len())));
                }
                for (u, m) in ch.iter().enumerate() {
                    if m.rows != self.terminals[u].antennas || m.cols != self.n_t {
                        return Err(Error::Config(format!("snapshot: channel {u} must be {}x{}", self.terminals[u].antennas, self.n_t)));
                    }
                }
            }
            if let Some(w) = &s.weights {
                if w.len() != s.info.len() || w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(Error::Config("snapshot: one nonnegative weight per information user required".into()));
                }
            }
        }
        Ok(())
    }

    /// Largest receive-antenna count.
    pub fn max_rx(&self) -> usize {
        self.terminals.iter().map(|t| t.antennas).max().unwrap_or(1)
    }

    /// Harvesting targets indexed by user id.
    pub fn q_targets(&self) -> Vec<f64> {
        self.terminals.iter().map(|t| t.q_target).collect()
    }

    /// Hex SHA-256 of the full configuration, recorded in output headers.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario_is_valid() {
        let s = ScenarioConfig::reference(30, 1);
        s.validate().unwrap();
        assert_eq!(s.power.radiated_budget(), 10.0);
        assert_eq!(s.grouping.info_limit(s.n_t, s.max_rx()), 4);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::reference(4, 1);
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.rng_seed = 2;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let text = r#"{
            "n_t": 4,
            "terminals": [{"antennas": 2, "q_target": 1.0}, {"antennas": 2, "q_target": 0.0, "capacity": 10.0}],
            "power": {"p_c_tx": 1.0, "p_c_rx": 0.1, "c1": 30.0, "c2": 0.75, "p_max": 11.0},
            "frame": {"t_f": 0.1, "superframe_frames": 30, "t_c": 5.0, "alpha": 0.1},
            "total_frames": 3,
            "rng_seed": 9,
            "grouping": {"strategy": "LB-CHS"}
        }"#;
        let s: ScenarioConfig = serde_json::from_str(text).unwrap();
        s.validate().unwrap();
        assert_eq!(s.pathloss_exponent, 2.0);
        assert_eq!(s.terminals[0].zeta, 1.0);
        assert_eq!(s.grouping.strategy, crate::grouping::Strategy::LbChs);
        let back: ScenarioConfig = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn invalid_terminal_is_reported() {
        let mut s = ScenarioConfig::reference(2, 1);
        s.terminals[1].zeta = 1.5;
        assert!(matches!(s.validate(), Err(Error::Config(m)) if m.contains("terminal 1")));
    }

    #[test]
    fn matrix_spec_layout() {
        let m = MatrixSpec { rows: 1, cols: 2, re: vec![1.0, 2.0], im: vec![0.0, -1.0] }.to_matrix().unwrap();
        assert_eq!(m[(0, 1)], num_complex::Complex64::new(2.0, -1.0));
        assert!(MatrixSpec { rows: 1, cols: 2, re: vec![1.0], im: vec![] }.to_matrix().is_err());
    }
}
