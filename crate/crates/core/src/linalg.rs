//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Every matrix in this crate is tiny (a handful of antennas), so the helpers
//! favour clarity over allocation-free tricks.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;

/// Eigenvalues at or below this fraction of the largest one make a matrix
/// "not positive definite" for the purpose of `A^{-1/2}`.
pub const PD_RELATIVE_FLOOR: f64 = 1e-12;

/// Real scalar as a complex number.
#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Build a complex matrix from row-major real entries.
pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
    CMat::from_row_iterator(rows, cols, entries.iter().map(|&x| re(x)))
}

/// Build a diagonal complex matrix from real entries.
pub fn diag_real(entries: &[f64]) -> CMat {
    let n = entries.len();
    let mut m = zeros(n, n);
    for (k, &x) in entries.iter().enumerate() {
        m[(k, k)] = re(x);
    }
    m
}

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `h^H h`.
pub fn gram(h: &CMat) -> CMat {
    h.adjoint() * h
}

/// Real part of the trace.
pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Frobenius inner product `Re Tr(a^H b)`.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Frobenius norm.
pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// decreasing order; `vectors` holds the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermEig {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Rebuild `V f(Λ) V^H` for a scalar map on the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let s = f(self.values[k]);
            scaled.column_mut(k).scale_mut(s);
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn herm_eig(m: &CMat) -> HermEig {
    let n = m.nrows();
    if n == 0 {
        return HermEig { values: Vec::new(), vectors: zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermEig { values, vectors }
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(m: &CMat) -> f64 {
    herm_eig(m).max()
}

/// Inverse square root of a Hermitian positive definite matrix.
///
/// Rejects the matrix when its smallest eigenvalue is not strictly positive
/// or sits below `PD_RELATIVE_FLOOR` times the largest one.
pub fn inv_sqrt_pd(a: &CMat) -> Result<CMat> {
    let eig = herm_eig(a);
    if !is_pd(&eig) {
        return Err(Error::NotPositiveDefinite { min_eig: eig.min(), max_eig: eig.max() });
    }
    Ok(eig.map(|x| 1.0 / x.sqrt()))
}

pub(crate) fn is_pd(eig: &HermEig) -> bool {
    let (lo, hi) = (eig.min(), eig.max());
    lo > 0.0 && lo > PD_RELATIVE_FLOOR * hi
}

/// Euclidean projection onto the PSD cone (negative eigenvalues clipped).
pub fn psd_clip(m: &CMat) -> CMat {
    herm_eig(m).map(|x| x.max(0.0))
}

/// Right singular vectors of `m` spanning its numerical null space.
///
/// Singular values at or below `rel_tol * sigma_max` count as zero. The
/// returned matrix has `m.ncols()` rows and orthonormal columns; it has zero
/// columns when the null space is trivial.
pub fn right_null_space(m: &CMat, rel_tol: f64) -> CMat {
    let n = m.ncols();
    if m.nrows() == 0 {
        return identity(n);
    }
    // Pad wide matrices with zero rows so the SVD returns a full V.
    let padded = if m.nrows() < n {
        let mut p = zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("SVD computed with V");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * sigma_max;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| sigma_max == 0.0 || svd.singular_values[k] <= cutoff)
        .collect();
    let mut basis = zeros(n, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        let row = v_t.row(k);
        for r in 0..n {
            basis[(r, dst)] = row[r].conj();
        }
    }
    basis
}

/// `log2 det(I + h s h^H)` evaluated through a Hermitian eigendecomposition.
pub fn log2_det_i_plus(h: &CMat, s: &CMat) -> f64 {
    let n = h.nrows();
    let m = identity(n) + h * s * h.adjoint();
    herm_eig(&m).values.iter().map(|&x| x.max(f64::MIN_POSITIVE).log2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herm_eig_sorts_descending_and_reconstructs() {
        let m = from_real(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0]);
        let eig = herm_eig(&m);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        let back = eig.map(|x| x);
        assert!(frob(&(back - &m)) < 1e-12);
    }

    #[test]
    fn inv_sqrt_of_scaled_identity() {
        let a = identity(3).scale(4.0);
        let r = inv_sqrt_pd(&a).unwrap();
        assert!(frob(&(r - identity(3).scale(0.5))) < 1e-14);
    }

    #[test]
    fn inv_sqrt_rejects_singular() {
        let a = diag_real(&[1.0, 0.0]);
        assert!(matches!(inv_sqrt_pd(&a), Err(Error::NotPositiveDefinite { .. })));
        let b = diag_real(&[1.0, -1e-3]);
        assert!(inv_sqrt_pd(&b).is_err());
    }

    #[test]
    fn psd_clip_drops_negative_part() {
        let m = diag_real(&[2.0, -3.0]);
        let p = psd_clip(&m);
        assert!(frob(&(p - diag_real(&[2.0, 0.0]))) < 1e-14);
    }

    #[test]
    fn null_space_of_wide_and_tall_inputs() {
        let wide = from_real(1, 3, &[1.0, 0.0, 0.0]);
        let ns = right_null_space(&wide, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!(frob(&(&wide * &ns)) < 1e-14);

        let tall = from_real(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(right_null_space(&tall, 1e-10).ncols(), 0);
    }

    #[test]
    fn log_det_matches_diagonal_closed_form() {
        let h = diag_real(&[1.0, 2.0]);
        let s = diag_real(&[1.0, 0.5]);
        // (1 + 1)(1 + 4 * 0.5) = 6
        assert!((log2_det_i_plus(&h, &s) - 6f64.log2()).abs() < 1e-13);
    }
}
