//! Block diagonalization: null-space bases of the other information users,
//! effective channels seen through those bases, and precoder assembly.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::ChannelSet;

/// Singular values at or below this fraction of the largest count as zero.
pub const NULL_SPACE_REL_TOL: f64 = 1e-10;

/// Orthonormal basis of the right null space of `stacked_others`.
///
/// `n_t` is the transmit dimension; an empty stack (no other users) yields
/// the identity.
pub fn null_space_basis(stacked_others: &CMat, n_t: usize, user: usize) -> Result<CMat> {
    if stacked_others.ncols() != n_t && stacked_others.nrows() > 0 {
        return Err(Error::DimensionMismatch(format!(
            "stacked channels have {} columns, expected {n_t}",
            stacked_others.ncols()
        )));
    }
    if stacked_others.nrows() == 0 {
        return Ok(linalg::identity(n_t));
    }
    let basis = linalg::right_null_space(stacked_others, NULL_SPACE_REL_TOL);
    if basis.ncols() == 0 {
        return Err(Error::BdInfeasible { user });
    }
    Ok(basis)
}

/// Stack the channels of `users` vertically.
pub fn stack_channels(channels: &ChannelSet, users: &[usize]) -> CMat {
    let rows: usize = users.iter().map(|&u| channels.n_rx(u)).sum();
    let mut out = linalg::zeros(rows, channels.n_t);
    let mut r = 0;
    for &u in users {
        let h = channels.get(u);
        out.view_mut((r, 0), (h.nrows(), h.ncols())).copy_from(h);
        r += h.nrows();
    }
    out
}

/// `n_T > n_R - min_k n_Rk` for the given receive-antenna counts.
pub fn bd_dimension_ok(n_t: usize, rx_antennas: &[usize]) -> bool {
    let Some(&min_rx) = rx_antennas.iter().min() else {
        return true;
    };
    let n_r: usize = rx_antennas.iter().sum();
    n_t + min_rx > n_r
}

/// Effective channels for one choice of information and harvesting users.
///
/// Per-info-user vectors follow the order of `info_users`; `eff_cross[j][i]`
/// is harvest user `harvest_users[j]` seen through info user `i`'s basis and
/// `cross_gram[j][i]` its Gram matrix.
#[derive(Debug, Clone)]
pub struct EffectiveChannels {
    pub n_t: usize,
    pub info_users: Vec<usize>,
    pub harvest_users: Vec<usize>,
    pub null_basis: Vec<CMat>,
    pub eff_info: Vec<CMat>,
    pub eff_cross: Vec<Vec<CMat>>,
    pub cross_gram: Vec<Vec<CMat>>,
    /// Raw harvest-user channels, kept for reporting lifted covariances.
    pub harvest_channels: Vec<CMat>,
}

impl EffectiveChannels {
    pub fn n_info(&self) -> usize {
        self.info_users.len()
    }

    pub fn n_harvest(&self) -> usize {
        self.harvest_users.len()
    }

    /// Reduced dimension `L_i` of info user `i`.
    pub fn reduced_dim(&self, i: usize) -> usize {
        self.null_basis[i].ncols()
    }

    /// Lift a reduced covariance into transmit space.
    pub fn lift(&self, i: usize, reduced: &CMat) -> CMat {
        let v = &self.null_basis[i];
        v * reduced * v.adjoint()
    }
}

/// Build null bases and effective channels for an info/harvest split.
pub fn build_effective_channels(channels: &ChannelSet, info: &[usize], harvest: &[usize]) -> Result<EffectiveChannels> {
    let n_t = channels.n_t;
    for &u in info.iter().chain(harvest) {
        if u >= channels.len() {
            return Err(Error::InvalidInput(format!("user {u} has no channel")));
        }
    }
    if info.iter().any(|u| harvest.contains(u)) {
        return Err(Error::InvalidInput("info and harvest groups overlap".into()));
    }
    let rx: Vec<usize> = info.iter().map(|&u| channels.n_rx(u)).collect();
    if !bd_dimension_ok(n_t, &rx) {
        return Err(Error::BdDimension { n_t, n_r: rx.iter().sum(), min_rx: *rx.iter().min().unwrap_or(&0) });
    }

    let mut null_basis = Vec::with_capacity(info.len());
    let mut eff_info = Vec::with_capacity(info.len());
    for (idx, &u) in info.iter().enumerate() {
        let others: Vec<usize> = info.iter().enumerate().filter(|&(k, _)| k != idx).map(|(_, &o)| o).collect();
        let basis = null_space_basis(&stack_channels(channels, &others), n_t, u)?;
        eff_info.push(channels.get(u) * &basis);
        null_basis.push(basis);
    }

    let mut eff_cross = Vec::with_capacity(harvest.len());
    let mut cross_gram = Vec::with_capacity(harvest.len());
    for &j in harvest {
        let row: Vec<CMat> = null_basis.iter().map(|v| channels.get(j) * v).collect();
        cross_gram.push(row.iter().map(linalg::gram).collect());
        eff_cross.push(row);
    }

    Ok(EffectiveChannels {
        n_t,
        info_users: info.to_vec(),
        harvest_users: harvest.to_vec(),
        null_basis,
        eff_info,
        eff_cross,
        cross_gram,
        harvest_channels: harvest.iter().map(|&j| channels.get(j).clone()).collect(),
    })
}

/// Precoder `B = V0 A^{-1/2} V_hat D_hat^{1/2}`.
pub fn assemble_precoder(a_i: &CMat, v_hat: &CMat, d_hat: &[f64], null_basis: &CMat) -> Result<CMat> {
    if v_hat.ncols() != d_hat.len() || a_i.nrows() != v_hat.nrows() || null_basis.ncols() != a_i.nrows() {
        return Err(Error::DimensionMismatch("precoder factors do not chain".into()));
    }
    if d_hat.iter().any(|&d| !(d >= 0.0)) {
        return Err(Error::InvalidInput("power allocation entries must be nonnegative".into()));
    }
    let a_is = linalg::inv_sqrt_pd(a_i)?;
    let mut right = v_hat.clone();
    for (k, &d) in d_hat.iter().enumerate() {
        right.column_mut(k).scale_mut(d.sqrt());
    }
    Ok(null_basis * a_is * right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, frob, from_real, identity};

    #[test]
    fn empty_stack_gives_identity() {
        let b = null_space_basis(&linalg::zeros(0, 3), 3, 0).unwrap();
        assert!(frob(&(b - identity(3))) < 1e-15);
    }

    #[test]
    fn single_row_null_space() {
        let b = null_space_basis(&from_real(1, 2, &[1.0, 0.0]), 2, 0).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!(b[(0, 0)].norm() < 1e-14);
        assert!((b[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_stack() {
        let b = null_space_basis(&from_real(2, 2, &[1.0, 0.0, 1.0, 0.0]), 2, 0).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!((b[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn full_rank_square_stack_is_infeasible() {
        let err = null_space_basis(&identity(2), 2, 7).unwrap_err();
        assert!(matches!(err, Error::BdInfeasible { user: 7 }));
    }

    #[test]
    fn single_info_user_sees_raw_channel() {
        let h1 = from_real(1, 2, &[1.0, 2.0]);
        let h2 = from_real(1, 2, &[0.5, -1.0]);
        let set = ChannelSet::from_matrices(2, vec![h1.clone(), h2.clone()]).unwrap();
        let eff = build_effective_channels(&set, &[0], &[1]).unwrap();
        assert!(frob(&(&eff.eff_info[0] - &h1)) < 1e-14);
        assert!(frob(&(&eff.eff_cross[0][0] - &h2)) < 1e-14);
    }

    #[test]
    fn orthogonal_users_lose_nothing() {
        let set = ChannelSet::from_matrices(2, vec![from_real(1, 2, &[1.0, 0.0]), from_real(1, 2, &[0.0, 1.0])]).unwrap();
        let eff = build_effective_channels(&set, &[0, 1], &[]).unwrap();
        assert_eq!(eff.eff_info[0].shape(), (1, 1));
        assert!((eff.eff_info[0][(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(eff.eff_cross.is_empty());
    }

    #[test]
    fn dimension_constraint_is_enforced() {
        assert!(bd_dimension_ok(4, &[2, 2]));
        assert!(!bd_dimension_ok(4, &[2, 2, 2]));
        assert!(bd_dimension_ok(2, &[]));
        let set = ChannelSet::from_matrices(2, vec![identity(2), identity(2)]).unwrap();
        assert!(matches!(build_effective_channels(&set, &[0, 1], &[]), Err(Error::BdDimension { .. })));
    }

    #[test]
    fn precoder_examples() {
        let v = identity(2);
        let zero = assemble_precoder(&identity(2), &v, &[0.0, 0.0], &identity(2)).unwrap();
        assert_eq!(frob(&zero), 0.0);
        let b = assemble_precoder(&identity(2).scale(4.0), &v, &[1.0, 1.0], &identity(2)).unwrap();
        assert!(frob(&(b - identity(2).scale(0.5))) < 1e-14);
        assert!(assemble_precoder(&diag_real(&[1.0, 0.0]), &v, &[1.0, 1.0], &identity(2)).is_err());
    }
}
