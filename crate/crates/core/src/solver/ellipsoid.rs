//! Ellipsoid method on the dual of the weighted-sum-rate problem with
//! harvesting constraints.
//!
//! The search variable is `x = (lambda_1, ..., lambda_M, mu)`. Centers outside
//! the dual domain (`lambda >= 0`, `mu > 0`, every `A_i` positive definite)
//! receive feasibility cuts; centers inside it are evaluated in closed form
//! and cut with the dual supergradient. Weights are normalized to a maximum of
//! one internally so that tolerances do not depend on the weight scale.
//!
//! When the optimal dual point lies on the boundary of the domain (an info
//! user with spare antennas must carry energy it cannot see), the closed-form
//! minimizer at interior points never meets the harvesting targets. After the
//! ellipsoid collapses, a covariance with the same received signals that does
//! meet them is recovered by alternating projections, and accepted when the
//! duality gap certifies it.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use crate::bd::{assemble_precoder, EffectiveChannels};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::solver::projection::{Halfspace, ProjectionOutcome, ProjectionProblem};
use crate::solver::waterfill::{self, UserWaterfill};
use crate::solver::{precoder_from_covariance, Allocation, DualVariables, KktResiduals, SolverConfig};

/// Smallest admissible power price.
const MU_FLOOR: f64 = 1e-9;
/// Largest depth used for deep cuts; shallower cuts are always valid.
const MAX_CUT_DEPTH: f64 = 0.5;
/// Restarts stop once the radius grows this much beyond the initial one.
const MAX_RADIUS_GROWTH: f64 = 1e9;
/// Relative eigenvalue below which a direction of `A_i` counts as null, and
/// relative price above which a harvesting constraint counts as active.
const FACE_REL_TOL: f64 = 1e-6;

struct Problem<'a> {
    eff: &'a EffectiveChannels,
    /// Weights divided by their maximum.
    w: Vec<f64>,
    w_scale: f64,
    q: Vec<f64>,
    budget: f64,
    cfg: SolverConfig,
}

#[derive(Clone)]
struct PointEval {
    x: DVector<f64>,
    users: Vec<UserWaterfill>,
    /// Dual function value.
    g: f64,
    subgradient: DVector<f64>,
    kkt: KktResiduals,
}

enum Evaluation {
    Cut { a: DVector<f64>, violation: f64 },
    Point(Box<PointEval>),
}

impl<'a> Problem<'a> {
    fn m(&self) -> usize {
        self.q.len()
    }

    fn duals_at(&self, x: &DVector<f64>) -> DualVariables {
        DualVariables { lambdas: x.rows(0, self.m()).iter().copied().collect(), mu: x[self.m()] }
    }

    fn kkt(&self, x: &DVector<f64>, harvested: &[f64], total_power: f64, objective: f64) -> KktResiduals {
        let m = self.m();
        let mut primal = (total_power - self.budget).max(0.0) / (1.0 + self.budget);
        let mut comp = x[m] * (total_power - self.budget).abs() / (1.0 + self.budget);
        let mut dual_minus_primal = x[m] * (self.budget - total_power);
        for j in 0..m {
            let slack = harvested[j] - self.q[j];
            primal = primal.max((-slack).max(0.0) / (1.0 + self.q[j]));
            comp = comp.max(x[j] * slack.abs() / (1.0 + self.q[j]));
            dual_minus_primal += x[j] * slack;
        }
        KktResiduals { primal, complementarity: comp, gap: dual_minus_primal.abs() / (1.0 + objective.abs()) }
    }

    fn evaluate(&self, x: &DVector<f64>) -> Evaluation {
        let m = self.m();
        let n = m + 1;
        // Sign constraints first.
        let mut worst: Option<(usize, f64)> = None;
        for j in 0..m {
            if x[j] < 0.0 && worst.is_none_or(|(_, v)| -x[j] > v) {
                worst = Some((j, -x[j]));
            }
        }
        if x[m] < MU_FLOOR && worst.is_none_or(|(_, v)| MU_FLOOR - x[m] > v) {
            worst = Some((m, MU_FLOOR - x[m]));
        }
        if let Some((k, violation)) = worst {
            let mut a = DVector::zeros(n);
            a[k] = -1.0;
            return Evaluation::Cut { a, violation };
        }

        let duals = self.duals_at(x);
        let mut eigs = Vec::with_capacity(self.eff.n_info());
        let mut worst_user: Option<(usize, f64)> = None;
        for i in 0..self.eff.n_info() {
            let a_i = waterfill::form_a(&duals, self.eff, i);
            let eig = linalg::herm_eig(&a_i);
            if !linalg::is_pd(&eig) && worst_user.is_none_or(|(_, v)| eig.min() < v) {
                worst_user = Some((i, eig.min()));
            }
            eigs.push((a_i, eig));
        }
        if let Some((i, min_eig)) = worst_user {
            let v = eigs[i].1.vectors.column(eigs[i].1.values.len() - 1).into_owned();
            let mut a = DVector::zeros(n);
            for j in 0..m {
                a[j] = (v.adjoint() * &self.eff.cross_gram[j][i] * &v)[(0, 0)].re;
            }
            a[m] = -1.0;
            return Evaluation::Cut { a, violation: (-min_eig).max(0.0) };
        }

        let users: Vec<UserWaterfill> = eigs
            .iter()
            .enumerate()
            .map(|(i, (a_i, eig))| waterfill::waterfill_from_eig(a_i, eig, &self.eff.eff_info[i], self.w[i]))
            .collect();
        let covs: Vec<CMat> = users.iter().map(|u| u.covariance.clone()).collect();
        let harvested = waterfill::harvested_by(self.eff, &covs);
        let total_power: f64 = covs.iter().map(linalg::trace_re).sum();
        let objective: f64 = users.iter().zip(&self.w).map(|(u, w)| w * u.rate).sum();
        let mut subgradient = DVector::zeros(n);
        let mut g = -objective + x[m] * (total_power - self.budget);
        for j in 0..m {
            subgradient[j] = self.q[j] - harvested[j];
            g += x[j] * subgradient[j];
        }
        subgradient[m] = total_power - self.budget;
        let kkt = self.kkt(x, &harvested, total_power, objective);
        Evaluation::Point(Box::new(PointEval { x: x.clone(), users, g, subgradient, kkt }))
    }

    /// Positive dual value proves the harvesting targets unreachable.
    fn certifies_infeasible(&self, pe: &PointEval) -> bool {
        let m = self.m();
        let scale = 1.0 + pe.x[m] * self.budget + (0..m).map(|j| pe.x[j] * self.q[j]).sum::<f64>();
        pe.g > 1e-9 * scale
    }

    fn build(&self, pe: &PointEval, iterations: usize) -> Result<Allocation> {
        let eff = self.eff;
        let mut precoders = Vec::with_capacity(eff.n_info());
        for (i, u) in pe.users.iter().enumerate() {
            precoders.push(assemble_precoder(&u.a, &u.v_hat, &u.d_hat, &eff.null_basis[i])?);
        }
        let reduced: Vec<CMat> = pe.users.iter().map(|u| u.covariance.clone()).collect();
        let rates = pe.users.iter().map(|u| u.rate).collect();
        Ok(self.assemble(pe, reduced, rates, precoders, iterations))
    }

    fn assemble(&self, pe: &PointEval, reduced: Vec<CMat>, rates: Vec<f64>, precoders: Vec<CMat>, iterations: usize) -> Allocation {
        let eff = self.eff;
        let harvested = waterfill::harvested_by(eff, &reduced);
        let total: f64 = reduced.iter().map(linalg::trace_re).sum();
        let rates: Vec<f64> = rates;
        let objective_norm: f64 = rates.iter().zip(&self.w).map(|(r, w)| r * w).sum();
        let mut kkt = self.kkt(&pe.x, &harvested, total, objective_norm);
        // The gap is measured against the dual bound of the evaluated point.
        kkt.gap = kkt.gap.max(((-pe.g) - objective_norm).abs() / (1.0 + objective_norm.abs()));
        let duals = self.duals_at(&pe.x);
        Allocation {
            info_users: eff.info_users.clone(),
            harvest_users: eff.harvest_users.clone(),
            covariances: reduced.iter().enumerate().map(|(i, s)| eff.lift(i, s)).collect(),
            reduced_covariances: reduced,
            precoders,
            objective: objective_norm * self.w_scale,
            rates,
            harvested,
            duals: DualVariables {
                lambdas: duals.lambdas.iter().map(|l| l * self.w_scale).collect(),
                mu: duals.mu * self.w_scale,
            },
            feasible: true,
            iterations,
            kkt,
            diagnostic: None,
        }
    }

    /// Search for a primal point matching the dual point `pe` when it sits on
    /// the boundary of the dual domain.
    ///
    /// Each `A_i` is split into its range and its (near) null space. The
    /// range part is water-filled, and the search runs over covariances
    /// supported on the water-filled subspace plus the null space, starting
    /// from the water-filled point. Targets with a positive price become
    /// equalities.
    fn recover_face(&self, pe: &PointEval, iterations: usize) -> Option<Allocation> {
        let eff = self.eff;
        let n_info = eff.n_info();
        let m = self.m();
        let mut frames = Vec::with_capacity(n_info);
        let mut start = Vec::with_capacity(n_info);
        let mut shapes = Vec::with_capacity(n_info);
        for i in 0..n_info {
            let eig = linalg::herm_eig(&pe.users[i].a);
            let cutoff = FACE_REL_TOL * eig.max();
            let range: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > cutoff).collect();
            let null: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] <= cutoff).collect();
            let pi = eig.vectors.select_columns(&range);
            let a_pi = pi.adjoint() * &pe.users[i].a * &pi;
            let wf = waterfill::waterfill_user(&a_pi, &(&eff.eff_info[i] * &pi), self.w[i]).ok()?;
            let s_w = &pi * &wf.covariance * pi.adjoint();
            let s_eig = linalg::herm_eig(&s_w);
            let floor = 1e-12 * s_eig.max().max(f64::MIN_POSITIVE);
            let info_cols: Vec<usize> = (0..s_eig.values.len()).filter(|&k| s_eig.values[k] > floor).collect();
            let f_w = s_eig.vectors.select_columns(&info_cols);
            let r = f_w.ncols();
            let null_basis = eig.vectors.select_columns(&null);
            let dim = r + null_basis.ncols();
            let mut f = linalg::zeros(f_w.nrows(), dim);
            f.columns_mut(0, r).copy_from(&f_w);
            f.columns_mut(r, null_basis.ncols()).copy_from(&null_basis);
            let d = f_w.adjoint() * &s_w * &f_w;
            let mut z0 = linalg::zeros(dim, dim);
            z0.view_mut((0, 0), (r, r)).copy_from(&d);
            start.push(z0);
            frames.push(f);
            shapes.push(s_w);
        }
        let x_scale = pe.x.max().max(f64::MIN_POSITIVE);
        let mut halfspaces: Vec<Halfspace> = (0..m)
            .map(|j| {
                let normal: Vec<CMat> = frames.iter().enumerate().map(|(i, f)| f.adjoint() * &eff.cross_gram[j][i] * f).collect();
                if pe.x[j] > FACE_REL_TOL * x_scale {
                    Halfspace::eq(normal, self.q[j])
                } else {
                    Halfspace::le(normal.into_iter().map(|n| -n).collect(), -self.q[j])
                }
            })
            .collect();
        // The fixed information block inherits the small error of the dual
        // point, so the power bound gets half of the accepted residual as slack.
        let power_slack = 0.5 * self.cfg.kkt_tol * (1.0 + self.budget);
        halfspaces.push(Halfspace::le(frames.iter().map(|f| linalg::identity(f.ncols())).collect(), self.budget + power_slack));
        let problem = ProjectionProblem { halfspaces, tol: 0.1 * self.cfg.kkt_tol, max_iters: self.cfg.projection_max_iters };
        let Ok(ProjectionOutcome::Feasible(z)) = problem.solve(&start) else {
            return None;
        };
        let mut x: Vec<CMat> = frames.iter().zip(&z).map(|(f, z)| linalg::hermitian_part(&(f * z * f.adjoint()))).collect();
        // Settle the power bound along the water-filled information shape:
        // unused power raises rates and harvested power, and a small excess
        // is removed when the result stays positive semidefinite.
        let spare = self.budget - x.iter().map(linalg::trace_re).sum::<f64>();
        let shape_power: f64 = shapes.iter().map(linalg::trace_re).sum();
        if shape_power > 0.0 {
            let adjusted: Vec<CMat> = x.iter().zip(&shapes).map(|(xi, s_w)| xi + s_w.scale(spare / shape_power)).collect();
            if spare > 0.0 || adjusted.iter().all(|a| linalg::herm_eig(a).min() >= 0.0) {
                x = adjusted;
            }
        }
        let rates: Vec<f64> = (0..n_info).map(|i| linalg::log2_det_i_plus(&eff.eff_info[i], &x[i])).collect();
        let precoders = (0..n_info).map(|i| precoder_from_covariance(&eff.null_basis[i], &x[i])).collect();
        let alloc = self.assemble(pe, x, rates, precoders, iterations);
        (alloc.kkt.primal <= self.cfg.kkt_tol && alloc.kkt.gap <= self.cfg.kkt_tol).then_some(alloc)
    }

    fn infeasible(&self, iterations: usize, pe: Option<&PointEval>, reason: &str) -> Allocation {
        let culprit = pe.and_then(|pe| {
            (0..self.m()).max_by(|&a, &b| (pe.x[a] * self.q[a]).total_cmp(&(pe.x[b] * self.q[b])))
        });
        let who = culprit.map_or(String::new(), |j| format!(" (harvest user {})", self.eff.harvest_users[j]));
        Allocation::infeasible(self.eff, iterations, format!("{reason}{who}"))
    }
}

struct Ellipsoid {
    c: DVector<f64>,
    p: DMatrix<f64>,
}

impl Ellipsoid {
    fn new(c: DVector<f64>, radius: f64) -> Self {
        let n = c.len();
        Self { c, p: DMatrix::identity(n, n) * (radius * radius) }
    }

    fn size(&self) -> f64 {
        self.p.trace().max(0.0).sqrt()
    }

    /// Keep `{x : a^T (x - c) <= -depth * sqrt(a^T P a)}` with `depth` in
    /// `[0, MAX_CUT_DEPTH]`; the depth is given as an absolute offset.
    fn cut(&mut self, a: &DVector<f64>, offset: f64) -> bool {
        let n = self.c.len() as f64;
        let pa = &self.p * a;
        let denom = a.dot(&pa);
        if !(denom > 0.0) || !denom.is_finite() {
            return false;
        }
        let s = denom.sqrt();
        let alpha = (offset / s).clamp(0.0, MAX_CUT_DEPTH);
        let b = pa / s;
        if self.c.len() == 1 {
            self.c -= &b * ((1.0 + alpha) / 2.0);
            self.p *= ((1.0 - alpha) / 2.0).powi(2);
        } else {
            self.c -= &b * ((1.0 + n * alpha) / (n + 1.0));
            let factor = n * n / (n * n - 1.0) * (1.0 - alpha * alpha);
            let shrink = 2.0 * (1.0 + n * alpha) / ((n + 1.0) * (1.0 + alpha));
            self.p = (&self.p - (&b * b.transpose()) * shrink) * factor;
            self.p = (&self.p + self.p.transpose()) * 0.5;
        }
        true
    }
}

/// Maximize `sum_i w_i R_i` subject to the power budget and harvesting
/// targets `q_targets` (pre-efficiency power at each harvest user).
///
/// Returns an allocation with `feasible = false` when the targets cannot be
/// met, and [`Error::IterationBudget`] when `cfg.max_iters` runs out first.
pub fn solve_wsr_harvest(
    eff: &EffectiveChannels,
    weights: &[f64],
    q_targets: &[f64],
    power_budget: f64,
    cfg: &SolverConfig,
) -> Result<Allocation> {
    cfg.validate()?;
    if eff.n_info() == 0 {
        return Err(Error::InvalidInput("at least one information user is required".into()));
    }
    if weights.len() != eff.n_info() || q_targets.len() != eff.n_harvest() {
        return Err(Error::DimensionMismatch("weights or targets do not match the user sets".into()));
    }
    if !(power_budget > 0.0) || !power_budget.is_finite() {
        return Err(Error::InvalidInput("power budget must be positive".into()));
    }
    if weights.iter().chain(q_targets).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput("weights and targets must be finite and nonnegative".into()));
    }
    let w_scale = weights.iter().cloned().fold(0.0, f64::max);
    if w_scale <= 0.0 {
        return Err(Error::InvalidInput("at least one weight must be positive".into()));
    }
    let problem = Problem {
        eff,
        w: weights.iter().map(|w| w / w_scale).collect(),
        w_scale,
        q: q_targets.to_vec(),
        budget: power_budget,
        cfg: *cfg,
    };
    let m = problem.m();

    // Cheap reject: no covariance in the BD subspaces can reach the target.
    for j in 0..m {
        let reach = (0..eff.n_info()).map(|i| linalg::lambda_max(&eff.cross_gram[j][i])).fold(0.0, f64::max) * power_budget;
        if q_targets[j] > reach * (1.0 + 1e-12) {
            return Ok(Allocation::infeasible(
                eff,
                0,
                format!("harvest user {} needs {:.6e} but at most {:.6e} is reachable", eff.harvest_users[j], q_targets[j], reach),
            ));
        }
    }

    let mu_info = (0..eff.n_info())
        .map(|i| problem.w[i] * linalg::lambda_max(&linalg::gram(&eff.eff_info[i])))
        .fold(0.0, f64::max)
        / LN_2;
    let mu0 = 2.0 * mu_info + 1.0;
    let r0 = cfg.initial_radius.unwrap_or(10.0 * mu0);

    let mut center = DVector::zeros(m + 1);
    center[m] = mu0;
    let mut radius = r0;
    let mut iterations = 0;
    let mut best_merit: Option<PointEval> = None;
    let mut best_dual: Option<PointEval> = None;
    let mut recovered_at: Option<f64> = None;

    'phases: loop {
        let mut ell = Ellipsoid::new(center.clone(), radius);
        loop {
            if iterations >= cfg.max_iters {
                break 'phases;
            }
            iterations += 1;
            match problem.evaluate(&ell.c) {
                Evaluation::Cut { a, violation } => {
                    if !ell.cut(&a, violation) {
                        break;
                    }
                }
                Evaluation::Point(pe) => {
                    if problem.certifies_infeasible(&pe) {
                        return Ok(problem.infeasible(iterations, Some(&pe), "harvesting targets are jointly infeasible"));
                    }
                    if pe.kkt.max() <= cfg.kkt_tol || pe.subgradient.iter().all(|&t| t == 0.0) {
                        return problem.build(&pe, iterations);
                    }
                    if best_merit.as_ref().is_none_or(|b| pe.kkt.max() < b.kkt.max()) {
                        best_merit = Some((*pe).clone());
                    }
                    if best_dual.as_ref().is_none_or(|b| pe.g > b.g) {
                        best_dual = Some((*pe).clone());
                    }
                    let g_best = best_dual.as_ref().map_or(pe.g, |b| b.g);
                    let a = -&pe.subgradient;
                    if !ell.cut(&a, g_best - pe.g) {
                        break;
                    }
                }
            }
            if ell.size() < cfg.ellipsoid_tol * radius {
                break;
            }
        }

        if let Some(pe) = &best_dual {
            // A restart that did not improve the dual bound leaves nothing new to recover.
            if recovered_at.is_none_or(|g| pe.g > g) {
                if let Some(alloc) = problem.recover_face(pe, iterations) {
                    return Ok(alloc);
                }
                recovered_at = Some(pe.g);
            }
        }
        if radius >= r0 * MAX_RADIUS_GROWTH {
            return Ok(problem.infeasible(iterations, best_dual.as_ref(), "dual search diverged; harvesting targets are not attainable"));
        }
        center = best_dual.as_ref().map_or(ell.c.clone(), |b| b.x.clone());
        radius *= 10.0;
    }

    let best = match best_merit {
        Some(pe) => Some(Box::new(problem.build(&pe, iterations)?)),
        None => None,
    };
    Err(Error::IterationBudget { iterations, best })
}

/// Outcome of [`solve_with_restoration`].
#[derive(Debug, Clone)]
pub struct Restored {
    pub allocation: Allocation,
    /// Common scaling applied to every harvesting target.
    pub beta: f64,
}

/// Solve, and when the targets are infeasible scale all of them by a common
/// `beta` in `[0, 1]`, found by bisection to within `1e-3`, until they are.
pub fn solve_with_restoration(
    eff: &EffectiveChannels,
    weights: &[f64],
    q_targets: &[f64],
    power_budget: f64,
    cfg: &SolverConfig,
) -> Result<Restored> {
    let full = solve_wsr_harvest(eff, weights, q_targets, power_budget, cfg)?;
    if full.feasible {
        return Ok(Restored { allocation: full, beta: 1.0 });
    }
    let scaled = |beta: f64| -> Vec<f64> { q_targets.iter().map(|q| q * beta).collect() };
    let mut best = solve_wsr_harvest(eff, weights, &scaled(0.0), power_budget, cfg)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        match solve_wsr_harvest(eff, weights, &scaled(mid), power_budget, cfg) {
            Ok(a) if a.feasible => {
                lo = mid;
                best = a;
            }
            Ok(_) | Err(Error::IterationBudget { .. }) => hi = mid,
            Err(e) => return Err(e),
        }
    }
    Ok(Restored { allocation: best, beta: lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bd::build_effective_channels;
    use crate::linalg::{diag_real, from_real, identity};
    use crate::model::ChannelSet;

    fn eff(mats: Vec<CMat>, n_t: usize, info: &[usize], harvest: &[usize]) -> EffectiveChannels {
        build_effective_channels(&ChannelSet::from_matrices(n_t, mats).unwrap(), info, harvest).unwrap()
    }

    #[test]
    fn identity_channel_without_harvesters() {
        let e = eff(vec![identity(2)], 2, &[0], &[]);
        let a = solve_wsr_harvest(&e, &[1.0], &[], 2.0, &SolverConfig::default()).unwrap();
        assert!(a.feasible);
        assert!((a.rates[0] - 2.0).abs() < 1e-7, "{}", a.rates[0]);
        assert!((a.total_power() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn unreachable_target_is_rejected_upfront() {
        let e = eff(vec![identity(2), diag_real(&[2.0, 1.0])], 2, &[0], &[1]);
        let a = solve_wsr_harvest(&e, &[1.0], &[41.0], 10.0, &SolverConfig::default()).unwrap();
        assert!(!a.feasible);
        assert!(a.diagnostic.unwrap().contains("harvest user 1"));
    }

    #[test]
    fn energy_in_a_direction_the_info_user_cannot_see() {
        // Info user listens on e1 only, the harvester on e2 only: the optimum
        // splits the budget and its dual point sits on the domain boundary.
        let e = eff(vec![from_real(1, 2, &[1.0, 0.0]), from_real(1, 2, &[0.0, 1.0])], 2, &[0], &[1]);
        let a = solve_wsr_harvest(&e, &[1.0], &[3.0], 10.0, &SolverConfig::default()).unwrap();
        assert!(a.feasible);
        assert!((a.harvested[0] - 3.0).abs() < 1e-6, "{}", a.harvested[0]);
        assert!((a.rates[0] - 8f64.log2()).abs() < 1e-6, "{}", a.rates[0]);
    }

    #[test]
    fn coherent_energy_steering() {
        let e = eff(vec![from_real(1, 2, &[1.0, 0.0]), from_real(1, 2, &[1.0, 1.0])], 2, &[0], &[1]);
        let a = solve_wsr_harvest(&e, &[1.0], &[15.0], 10.0, &SolverConfig::default()).unwrap();
        assert!(a.feasible);
        assert!(a.harvested[0] >= 15.0 - 1e-6);
        // rate from x = (sqrt(a), sqrt(b)), a + b = 10, (sqrt a + sqrt b)^2 = 15
        let s = (15f64).sqrt();
        let disc = (20.0 - 15.0f64).sqrt();
        let xa = ((s + disc) / 2.0).powi(2);
        assert!((a.rates[0] - (1.0 + xa).log2()).abs() < 1e-5, "{} vs {}", a.rates[0], (1.0 + xa).log2());
    }

    #[test]
    fn jointly_infeasible_targets() {
        // Each target alone is reachable, both together are not.
        let e = eff(
            vec![from_real(1, 3, &[1.0, 0.0, 0.0]), from_real(1, 3, &[0.0, 1.0, 0.0]), from_real(1, 3, &[0.0, 0.0, 1.0])],
            3,
            &[0],
            &[1, 2],
        );
        let a = solve_wsr_harvest(&e, &[1.0], &[6.0, 6.0], 10.0, &SolverConfig::default()).unwrap();
        assert!(!a.feasible);
    }

    #[test]
    fn restoration_scales_targets() {
        let e = eff(
            vec![from_real(1, 3, &[1.0, 0.0, 0.0]), from_real(1, 3, &[0.0, 1.0, 0.0]), from_real(1, 3, &[0.0, 0.0, 1.0])],
            3,
            &[0],
            &[1, 2],
        );
        let r = solve_with_restoration(&e, &[1.0], &[6.0, 6.0], 10.0, &SolverConfig::default()).unwrap();
        assert!(r.allocation.feasible);
        // 12 beta <= 10 leaves beta just below 5/6
        assert!(r.beta <= 5.0 / 6.0 && r.beta > 5.0 / 6.0 - 2e-3, "{}", r.beta);
    }
}
