use crate::linalg::{self, CMat};

/// Rank-one transmission along the strongest eigenmode of `h^H h`.
///
/// Returns the maximum harvestable (pre-efficiency) power and the covariance
/// `budget * u u^H` that attains it.
pub fn energy_beamforming_max(h: &CMat, power_budget: f64) -> (f64, CMat) {
    let n_t = h.ncols();
    if power_budget <= 0.0 || n_t == 0 {
        return (0.0, linalg::zeros(n_t, n_t));
    }
    let eig = linalg::herm_eig(&linalg::gram(h));
    let u = eig.vectors.column(0).into_owned();
    let s = (&u * u.adjoint()).scale(power_budget);
    (power_budget * eig.max().max(0.0), s)
}
