//! Frame-level simulation: scenarios, channel generation, the superframe
//! and frame loop, metrics, rate-power sweeps and CSV export.

pub mod compare;
pub mod export;
pub mod metrics;
pub mod rp_region;
pub mod run;
pub mod scenario;

pub use compare::{compare_strategies, StrategyReport};
pub use metrics::{metrics, running_average, Summary};
pub use rp_region::{grid_product, linspace, rp_region_sweep, EnergyPoint, RpRegion, RpSample, SampleStatus};
pub use run::{generate_channels, run_simulation, snapshot_channels, FrameRecord, Role, SimTrace, Simulation};
pub use scenario::{MatrixSpec, ScenarioConfig, SnapshotConfig, TerminalConfig};
