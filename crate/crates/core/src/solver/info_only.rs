//! Weighted sum rate without harvesting constraints: multi-level
//! water-filling across all users' eigenmodes with a shared power price.

use std::f64::consts::LN_2;

use crate::bd::{assemble_precoder, EffectiveChannels};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::solver::{waterfill, Allocation, DualVariables, KktResiduals, SolverConfig};

/// Solve with the power budget as the only constraint.
///
/// The water level is found exactly by walking the sorted breakpoints
/// `1 / (w_i sigma_ik)`: with `nu = 1 / (mu ln 2)` each mode receives
/// `max(w_i nu - 1 / sigma_ik, 0)`.
pub fn solve_wsr_info_only(eff: &EffectiveChannels, weights: &[f64], power_budget: f64, _cfg: &SolverConfig) -> Result<Allocation> {
    if weights.len() != eff.n_info() {
        return Err(Error::DimensionMismatch("one weight per information user required".into()));
    }
    if !(power_budget > 0.0) || !power_budget.is_finite() {
        return Err(Error::InvalidInput("power budget must be positive".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }

    struct Mode {
        user: usize,
        idx: usize,
        sigma: f64,
        breakpoint: f64,
    }
    let eigs: Vec<_> = eff.eff_info.iter().map(|h| linalg::herm_eig(&linalg::gram(h))).collect();
    let gain_floor = eigs.iter().map(|e| e.max()).fold(0.0, f64::max) * 1e-14;
    let mut modes = Vec::new();
    for (i, eig) in eigs.iter().enumerate() {
        let streams = eff.eff_info[i].nrows().min(eff.reduced_dim(i));
        for (k, &sigma) in eig.values.iter().take(streams).enumerate() {
            if weights[i] > 0.0 && sigma > gain_floor {
                modes.push(Mode { user: i, idx: k, sigma, breakpoint: 1.0 / (weights[i] * sigma) });
            }
        }
    }
    modes.sort_by(|a, b| a.breakpoint.total_cmp(&b.breakpoint).then(a.user.cmp(&b.user)).then(a.idx.cmp(&b.idx)));

    let mut nu = 0.0;
    let (mut sum_w, mut sum_inv) = (0.0, 0.0);
    for (m, mode) in modes.iter().enumerate() {
        sum_w += weights[mode.user];
        sum_inv += 1.0 / mode.sigma;
        nu = (power_budget + sum_inv) / sum_w;
        if modes.get(m + 1).is_none_or(|next| nu <= next.breakpoint) {
            break;
        }
    }

    let mu = if nu > 0.0 { 1.0 / (nu * LN_2) } else { 0.0 };
    let mut allocation_power = vec![Vec::new(); eff.n_info()];
    for (i, eig) in eigs.iter().enumerate() {
        let streams = eff.eff_info[i].nrows().min(eff.reduced_dim(i));
        allocation_power[i] = eig
            .values
            .iter()
            .take(streams)
            .map(|&s| if s > gain_floor && weights[i] > 0.0 { (weights[i] * nu - 1.0 / s).max(0.0) } else { 0.0 })
            .collect();
    }

    let mut reduced = Vec::with_capacity(eff.n_info());
    let mut covariances = Vec::with_capacity(eff.n_info());
    let mut precoders = Vec::with_capacity(eff.n_info());
    let mut rates = Vec::with_capacity(eff.n_info());
    for (i, eig) in eigs.iter().enumerate() {
        let d = &allocation_power[i];
        let v = eig.vectors.columns(0, d.len()).into_owned();
        let mut scaled = v.clone();
        for (k, &dk) in d.iter().enumerate() {
            scaled.column_mut(k).scale_mut(dk.sqrt());
        }
        let s: CMat = &scaled * scaled.adjoint();
        let rate = eig.values.iter().zip(d).map(|(&sig, &dk)| (sig.max(0.0) * dk).ln_1p() / LN_2).sum();
        // With A = mu I the general precoder formula reduces to V0 V D^{1/2}.
        let precoder = if mu > 0.0 {
            let a = linalg::identity(eff.reduced_dim(i)).scale(mu);
            let d_scaled: Vec<f64> = d.iter().map(|x| x * mu).collect();
            assemble_precoder(&a, &v, &d_scaled, &eff.null_basis[i])?
        } else {
            linalg::zeros(eff.n_t, 0)
        };
        covariances.push(eff.lift(i, &s));
        reduced.push(s);
        precoders.push(precoder);
        rates.push(rate);
    }

    let harvested = waterfill::harvested_by(eff, &reduced);
    let objective = weights.iter().zip(&rates).map(|(w, r)| w * r).sum();
    let total: f64 = reduced.iter().map(linalg::trace_re).sum();
    let w_scale = weights.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let kkt = KktResiduals {
        primal: (total - power_budget).max(0.0) / (1.0 + power_budget),
        complementarity: mu / w_scale * (total - power_budget).abs() / (1.0 + power_budget),
        gap: 0.0,
    };
    Ok(Allocation {
        info_users: eff.info_users.clone(),
        harvest_users: eff.harvest_users.clone(),
        reduced_covariances: reduced,
        covariances,
        precoders,
        rates,
        harvested,
        duals: DualVariables { lambdas: vec![0.0; eff.n_harvest()], mu },
        feasible: true,
        iterations: modes.len(),
        objective,
        kkt,
        diagnostic: None,
    })
}
