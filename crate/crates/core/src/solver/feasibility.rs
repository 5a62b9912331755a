//! Harvest-only feasibility: the least radiated power that meets every
//! harvesting target, found by bisection on a trial power with alternating
//! projections deciding each trial.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::solver::projection::{Halfspace, ProjectionOutcome, ProjectionProblem};
use crate::solver::SolverConfig;


#[derive(Debug, Clone)]
pub struct HarvestFeasibility {
    pub feasible: bool,
    /// Least total radiated power meeting all targets (`inf` when no power
    /// suffices).
    pub min_power: f64,
    /// A covariance achieving `min_power`.
    pub covariance: CMat,
}

/// Per-user check `budget * lambda_max(H_j^H H_j) >= Q_j`.
pub fn necessary_condition_check(channels: &[CMat], q_targets: &[f64], power_budget: f64) -> Vec<bool> {
    channels
        .iter()
        .zip(q_targets)
        .map(|(h, &q)| q <= 0.0 || power_budget * linalg::lambda_max(&linalg::gram(h)) >= q)
        .collect()
}

fn harvest_of(c: &[CMat], s: &CMat) -> Vec<f64> {
    c.iter().map(|c| linalg::inner(c, s)).collect()
}

/// Minimum power covariance for harvest-only transmission.
pub fn harvest_feasibility(channels: &[CMat], q_targets: &[f64], power_budget: f64, cfg: &SolverConfig) -> Result<HarvestFeasibility> {
    if channels.len() != q_targets.len() {
        return Err(Error::DimensionMismatch("one harvesting target per channel required".into()));
    }
    if q_targets.iter().any(|q| !q.is_finite() || *q < 0.0) {
        return Err(Error::InvalidInput("harvesting targets must be finite and nonnegative".into()));
    }
    let n_t = channels.first().map_or(0, |h| h.ncols());
    let active: Vec<usize> = (0..channels.len()).filter(|&j| q_targets[j] > 0.0).collect();
    if active.is_empty() {
        return Ok(HarvestFeasibility { feasible: true, min_power: 0.0, covariance: linalg::zeros(n_t, n_t) });
    }

    let grams: Vec<CMat> = active.iter().map(|&j| linalg::gram(&channels[j])).collect();
    let q: Vec<f64> = active.iter().map(|&j| q_targets[j]).collect();
    let mut lo: f64 = 0.0;
    let mut hi = 0.0;
    let mut s_hi = linalg::zeros(n_t, n_t);
    for (c, &qj) in grams.iter().zip(&q) {
        let eig = linalg::herm_eig(c);
        if eig.max() <= 0.0 {
            return Ok(HarvestFeasibility { feasible: false, min_power: f64::INFINITY, covariance: linalg::zeros(n_t, n_t) });
        }
        let p = qj / eig.max();
        lo = lo.max(p);
        hi += p;
        let u = eig.vectors.column(0).into_owned();
        s_hi += (&u * u.adjoint()).scale(p);
    }

    while hi - lo > cfg.bisection_tol * hi {
        let mid = 0.5 * (lo + hi);
        let mut halfspaces: Vec<Halfspace> =
            grams.iter().zip(&q).map(|(c, &qj)| Halfspace::le(vec![-c.clone()], -qj)).collect();
        halfspaces.push(Halfspace::le(vec![linalg::identity(n_t)], mid));
        // A tenth of the bisection tolerance suffices: the final rescaling
        // below turns a near-feasible point into an exactly feasible one.
        let tol = 0.1 * cfg.bisection_tol;
        let problem = ProjectionProblem { halfspaces, tol, max_iters: cfg.projection_max_iters };
        match problem.solve(&[s_hi.scale(mid / hi)]) {
            Ok(ProjectionOutcome::Feasible(x)) => {
                // Rescale so the tightest target is met exactly; this often
                // lands well below the trial power.
                let x = x.into_iter().next().expect("one block");
                let h = harvest_of(&grams, &x);
                let c = q.iter().zip(&h).map(|(&qj, &hj)| if hj > 0.0 { qj / hj } else { f64::INFINITY }).fold(0.0, f64::max);
                s_hi = x.scale(c);
                hi = linalg::trace_re(&s_hi).max(lo).min(mid);
            }
            // An undecided trial keeps the certified upper end of the bracket.
            Ok(ProjectionOutcome::Infeasible) | Err(Error::ProjectionNonConvergence { .. }) => lo = mid,
            Err(e) => return Err(e),
        }
    }

    // Remove the residual projection tolerance so every target holds exactly.
    let h = harvest_of(&grams, &s_hi);
    let boost = q.iter().zip(&h).map(|(&qj, &hj)| if hj > 0.0 { qj / hj } else { 1.0 }).fold(1.0, f64::max);
    let covariance = s_hi.scale(boost);
    let min_power = linalg::trace_re(&covariance);
    Ok(HarvestFeasibility { feasible: min_power <= power_budget * (1.0 + 1e-12), min_power, covariance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, from_real};

    #[test]
    fn necessary_condition_boundary() {
        let h = vec![diag_real(&[2.0, 1.0])];
        assert_eq!(necessary_condition_check(&h, &[40.0], 10.0), vec![true]);
        assert_eq!(necessary_condition_check(&h, &[41.0], 10.0), vec![false]);
        assert_eq!(necessary_condition_check(&h, &[0.0], 0.0), vec![true]);
    }

    #[test]
    fn single_user_closed_form() {
        let h = from_real(2, 2, &[1.0, 0.5, 0.2, 1.5]);
        let lmax = linalg::lambda_max(&linalg::gram(&h));
        let r = harvest_feasibility(std::slice::from_ref(&h), &[3.0], 10.0, &SolverConfig::default()).unwrap();
        assert!((r.min_power - 3.0 / lmax).abs() < 1e-12);
        assert!(r.feasible);
        assert!(linalg::inner(&linalg::gram(&h), &r.covariance) >= 3.0 - 1e-12);
    }

    #[test]
    fn zero_targets_need_no_power() {
        let r = harvest_feasibility(&[diag_real(&[1.0, 1.0])], &[0.0], 1.0, &SolverConfig::default()).unwrap();
        assert_eq!(r.min_power, 0.0);
        assert!(r.feasible);
    }

    #[test]
    fn orthogonal_users_add_up() {
        let c = vec![from_real(1, 2, &[1.0, 0.0]), from_real(1, 2, &[0.0, 2.0])];
        let r = harvest_feasibility(&c, &[1.0, 4.0], 10.0, &SolverConfig::default()).unwrap();
        assert!((r.min_power - 2.0).abs() < 1e-6, "{}", r.min_power);
    }

    #[test]
    fn overlapping_users_share_power() {
        let c = vec![from_real(1, 2, &[1.0, 0.0]), from_real(1, 2, &[1.0, 1.0])];
        // a single beam along e1 delivers to both users
        let r = harvest_feasibility(&c, &[1.0, 1.0], 10.0, &SolverConfig::default()).unwrap();
        assert!(r.min_power <= 1.0 + 1e-4, "{}", r.min_power);
        assert!(r.min_power >= 0.5);
    }

    #[test]
    fn identical_users_match_single_user() {
        let h = from_real(2, 3, &[1.0, 0.4, -0.3, 0.2, 0.9, 0.5]);
        let cfg = SolverConfig::default();
        let one = harvest_feasibility(std::slice::from_ref(&h), &[2.0], 10.0, &cfg).unwrap();
        let two = harvest_feasibility(&[h.clone(), h], &[2.0, 2.0], 10.0, &cfg).unwrap();
        assert!((two.min_power - one.min_power).abs() <= 1e-4 * one.min_power, "{} vs {}", two.min_power, one.min_power);
    }
}
