//! Per-frame resource allocation under block diagonalization.
//!
//! The main entry point, [`solve_wsr_harvest`], maximizes a weighted sum rate
//! subject to a radiated power budget and minimum harvested power for each
//! energy-harvesting terminal. It works on the dual: an ellipsoid method over
//! `(lambda, mu)` with a closed-form water-filling primal at every center.

mod beamforming;
mod ellipsoid;
mod feasibility;
mod info_only;
mod projection;
mod waterfill;

pub use beamforming::energy_beamforming_max;
pub use ellipsoid::{solve_wsr_harvest, solve_with_restoration, Restored};
pub use feasibility::{harvest_feasibility, necessary_condition_check, HarvestFeasibility};
pub use info_only::solve_wsr_info_only;
pub use waterfill::{dual_subgradient, form_a, harvested_by, waterfill_covariance, waterfill_user, UserWaterfill};

use serde::{Deserialize, Serialize};

use crate::bd::EffectiveChannels;
use crate::linalg::{self, CMat};

/// Dual variables: one `lambda` per harvesting user and the power price `mu`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualVariables {
    pub lambdas: Vec<f64>,
    pub mu: f64,
}

/// Numerical knobs shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Collapse threshold on the ellipsoid's largest semi-axis, relative to
    /// the radius the current phase started from.
    pub ellipsoid_tol: f64,
    /// Total ellipsoid iterations across restarts.
    pub max_iters: usize,
    /// Starting radius; `None` derives it from the channel scale.
    pub initial_radius: Option<f64>,
    /// Bound on primal infeasibility and relative duality gap.
    pub kkt_tol: f64,
    /// Relative tolerance of the minimum-power bisection.
    pub bisection_tol: f64,
    /// Iteration cap of a single alternating-projection run.
    pub projection_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ellipsoid_tol: 1e-10,
            max_iters: 5000,
            initial_radius: None,
            kkt_tol: 1e-8,
            bisection_tol: 1e-7,
            projection_max_iters: 50_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.ellipsoid_tol > 0.0
            && self.max_iters > 0
            && self.initial_radius.is_none_or(|r| r > 0.0)
            && self.kkt_tol > 0.0
            && self.bisection_tol > 0.0
            && self.projection_max_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config("solver tolerances and iteration limits must be positive".into()))
        }
    }
}

/// Optimality residuals of a returned allocation.
///
/// Dual variables enter with the weights normalized to a maximum of one, so
/// the residuals do not scale with proportional-fair weights.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    /// Largest relative violation of a harvesting or power constraint.
    pub primal: f64,
    /// Largest complementary-slackness product, relative to the constraint scale.
    pub complementarity: f64,
    /// Duality gap relative to `1 + objective`.
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.complementarity).max(self.gap)
    }
}

/// Result of a per-frame allocation.
#[derive(Debug, Clone)]
pub struct Allocation {
    pub info_users: Vec<usize>,
    pub harvest_users: Vec<usize>,
    /// Covariances in each info user's null-space coordinates.
    pub reduced_covariances: Vec<CMat>,
    /// Covariances lifted to the transmit antennas.
    pub covariances: Vec<CMat>,
    pub precoders: Vec<CMat>,
    pub rates: Vec<f64>,
    /// Pre-efficiency power reaching each harvesting user.
    pub harvested: Vec<f64>,
    pub duals: DualVariables,
    pub feasible: bool,
    pub iterations: usize,
    /// Weighted sum rate with the caller's weights.
    pub objective: f64,
    pub kkt: KktResiduals,
    pub diagnostic: Option<String>,
}

impl Allocation {
    /// An all-zero allocation flagged infeasible.
    pub fn infeasible(eff: &EffectiveChannels, iterations: usize, diagnostic: String) -> Self {
        let n_t = eff.n_t;
        Self {
            info_users: eff.info_users.clone(),
            harvest_users: eff.harvest_users.clone(),
            reduced_covariances: (0..eff.n_info()).map(|i| linalg::zeros(eff.reduced_dim(i), eff.reduced_dim(i))).collect(),
            covariances: vec![linalg::zeros(n_t, n_t); eff.n_info()],
            precoders: vec![linalg::zeros(n_t, 0); eff.n_info()],
            rates: vec![0.0; eff.n_info()],
            harvested: vec![0.0; eff.n_harvest()],
            duals: DualVariables { lambdas: vec![0.0; eff.n_harvest()], mu: 0.0 },
            feasible: false,
            iterations,
            objective: 0.0,
            kkt: KktResiduals::default(),
            diagnostic: Some(diagnostic),
        }
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Total transmit covariance `sum_i S_i`.
    pub fn total_covariance(&self, n_t: usize) -> CMat {
        self.covariances.iter().fold(linalg::zeros(n_t, n_t), |acc, s| acc + s)
    }

    pub fn total_power(&self) -> f64 {
        self.covariances.iter().map(linalg::trace_re).sum()
    }
}

/// Lift reduced covariances and build precoders by eigendecomposition.
///
/// Used when a covariance does not come straight out of the water-filling
/// formula, e.g. after face recovery.
pub(crate) fn precoder_from_covariance(basis: &CMat, reduced: &CMat) -> CMat {
    let eig = linalg::herm_eig(reduced);
    let scale = eig.max().abs().max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > 1e-14 * scale).collect();
    let mut f = linalg::zeros(reduced.nrows(), keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        let col = eig.vectors.column(k) * linalg::re(eig.values[k].sqrt());
        f.set_column(dst, &col);
    }
    basis * f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob, from_real};

    #[test]
    fn default_config_is_valid() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { kkt_tol: 0.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn precoder_reproduces_covariance() {
        let basis = linalg::identity(2);
        let s = from_real(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let b = precoder_from_covariance(&basis, &s);
        assert!(frob(&(&b * b.adjoint() - s)) < 1e-12);
    }
}
