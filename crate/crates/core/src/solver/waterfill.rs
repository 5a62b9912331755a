//! Closed-form Lagrangian minimizer at a fixed dual point.
//!
//! For `A = mu I - sum_j lambda_j C_j` positive definite, the best covariance
//! of an information user is `A^{-1/2} V diag(d) V^H A^{-1/2}` where `V` and
//! `sigma` come from the eigendecomposition of `(H A^{-1/2})^H (H A^{-1/2})`
//! and `d_k = max(w / ln 2 - 1 / sigma_k, 0)`.

use std::f64::consts::LN_2;

use crate::bd::EffectiveChannels;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, HermEig};
use crate::solver::DualVariables;

/// Water-filling outcome for one information user.
#[derive(Debug, Clone)]
pub struct UserWaterfill {
    pub a: CMat,
    pub a_inv_sqrt: CMat,
    /// Right singular vectors of the whitened channel, one per stream slot.
    pub v_hat: CMat,
    pub sigma_hat: Vec<f64>,
    pub d_hat: Vec<f64>,
    /// Reduced covariance.
    pub covariance: CMat,
    /// Rate in bit/s/Hz.
    pub rate: f64,
}

/// `A_i = mu I - sum_j lambda_j C_ji`.
pub fn form_a(duals: &DualVariables, eff: &EffectiveChannels, i: usize) -> CMat {
    let mut a = linalg::identity(eff.reduced_dim(i)).scale(duals.mu);
    for (j, &lam) in duals.lambdas.iter().enumerate() {
        if lam != 0.0 {
            a -= eff.cross_gram[j][i].scale(lam);
        }
    }
    a
}

/// Water-fill one user given `A` and its effective channel.
pub fn waterfill_user(a: &CMat, h_eff: &CMat, weight: f64) -> Result<UserWaterfill> {
    let eig = linalg::herm_eig(a);
    if !linalg::is_pd(&eig) {
        return Err(Error::NotPositiveDefinite { min_eig: eig.min(), max_eig: eig.max() });
    }
    Ok(waterfill_from_eig(a, &eig, h_eff, weight))
}

pub(crate) fn waterfill_from_eig(a: &CMat, eig: &HermEig, h_eff: &CMat, weight: f64) -> UserWaterfill {
    let a_inv_sqrt = eig.map(|x| 1.0 / x.sqrt());
    let g = h_eff * &a_inv_sqrt;
    let g_eig = linalg::herm_eig(&linalg::gram(&g));
    let streams = h_eff.nrows().min(a.nrows());
    let level = weight / LN_2;

    let v_hat = g_eig.vectors.columns(0, streams).into_owned();
    let sigma_hat: Vec<f64> = g_eig.values[..streams].iter().map(|&s| s.max(0.0)).collect();
    let d_hat: Vec<f64> = sigma_hat.iter().map(|&s| if s > 0.0 { (level - 1.0 / s).max(0.0) } else { 0.0 }).collect();
    let rate = sigma_hat.iter().zip(&d_hat).map(|(&s, &d)| (s * d).ln_1p() / LN_2).sum();

    let mut scaled = a_inv_sqrt.clone() * &v_hat;
    for (k, &d) in d_hat.iter().enumerate() {
        scaled.column_mut(k).scale_mut(d.sqrt());
    }
    let covariance = &scaled * scaled.adjoint();

    UserWaterfill { a: a.clone(), a_inv_sqrt, v_hat, sigma_hat, d_hat, covariance, rate }
}

/// Lagrangian-minimizing covariances of all information users.
pub fn waterfill_covariance(duals: &DualVariables, eff: &EffectiveChannels, weights: &[f64]) -> Result<Vec<UserWaterfill>> {
    if weights.len() != eff.n_info() || duals.lambdas.len() != eff.n_harvest() {
        return Err(Error::DimensionMismatch("weights or duals do not match the user sets".into()));
    }
    (0..eff.n_info())
        .map(|i| {
            waterfill_user(&form_a(duals, eff, i), &eff.eff_info[i], weights[i])
                .map_err(|_| Error::DualOutsideDomain { info_index: i })
        })
        .collect()
}

/// Power reaching each harvest user from the reduced covariances.
pub fn harvested_by(eff: &EffectiveChannels, covariances: &[CMat]) -> Vec<f64> {
    (0..eff.n_harvest())
        .map(|j| covariances.iter().enumerate().map(|(i, s)| linalg::inner(&eff.cross_gram[j][i], s)).sum())
        .collect()
}

/// Supergradient of the dual function: `Q_j - h_j` per harvest user, then
/// `sum_i Tr(S_i) - budget`.
pub fn dual_subgradient(covariances: &[CMat], eff: &EffectiveChannels, q_targets: &[f64], power_budget: f64) -> Vec<f64> {
    let h = harvested_by(eff, covariances);
    let mut t: Vec<f64> = q_targets.iter().zip(&h).map(|(q, h)| q - h).collect();
    t.push(covariances.iter().map(linalg::trace_re).sum::<f64>() - power_budget);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bd::build_effective_channels;
    use crate::linalg::{frob, identity};
    use crate::model::ChannelSet;

    #[test]
    fn single_unit_stream() {
        let wf = waterfill_user(&identity(1), &identity(1), 1.0).unwrap();
        assert!((wf.d_hat[0] - (1.0 / LN_2 - 1.0)).abs() < 1e-15);
        assert!((wf.d_hat[0] - 0.442_695_040_888_963_4).abs() < 1e-12);
    }

    #[test]
    fn weak_stream_is_switched_off() {
        let h = identity(1).scale((0.5 * LN_2).sqrt());
        let wf = waterfill_user(&identity(1), &h, 1.0).unwrap();
        assert_eq!(wf.d_hat[0], 0.0);
        assert_eq!(wf.rate, 0.0);
    }

    #[test]
    fn identity_channel_without_harvesters() {
        let set = ChannelSet::from_matrices(2, vec![identity(2)]).unwrap();
        let eff = build_effective_channels(&set, &[0], &[]).unwrap();
        let duals = DualVariables { lambdas: vec![], mu: 1.0 };
        let wf = waterfill_covariance(&duals, &eff, &[1.0]).unwrap();
        assert!(frob(&(&wf[0].covariance - identity(2).scale(1.0 / LN_2 - 1.0))) < 1e-14);
    }

    #[test]
    fn outside_domain_is_reported() {
        let set = ChannelSet::from_matrices(2, vec![identity(2), identity(2)]).unwrap();
        let eff = build_effective_channels(&set, &[0], &[1]).unwrap();
        let duals = DualVariables { lambdas: vec![2.0], mu: 1.0 };
        assert!(matches!(waterfill_covariance(&duals, &eff, &[1.0]), Err(Error::DualOutsideDomain { info_index: 0 })));
    }

    #[test]
    fn subgradient_of_silence() {
        let set = ChannelSet::from_matrices(2, vec![identity(2), identity(2), identity(2)]).unwrap();
        let eff = build_effective_channels(&set, &[0], &[1, 2]).unwrap();
        let t = dual_subgradient(&[linalg::zeros(2, 2)], &eff, &[50.0, 50.0], 10.0);
        assert_eq!(t, vec![50.0, 50.0, -10.0]);
    }
}
