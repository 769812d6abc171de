//! Small complex linear-algebra toolkit on top of `nalgebra`.
//!
//! Everything here works on dynamically sized complex matrices. The helpers
//! add what the estimators need beyond the raw decompositions: ordering
//! guarantees, Hermitian symmetrisation and pseudo-inverse fallbacks.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RVec = DVector<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const J: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `exp(j * phase)`.
#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::new(phase.cos(), phase.sin())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted
/// ascending. Ties keep the solver's index order (stable sort).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: RVec,
    pub vectors: CMat,
}

pub fn hermitian_eigen(m: &CMat) -> HermitianEigen {
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// `(M + M^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

/// Thin SVD with singular values in descending order.
#[derive(Debug, Clone)]
pub struct OrderedSvd {
    pub u: CMat,
    pub singular_values: RVec,
    pub v_t: Option<CMat>,
}

pub fn svd_descending(m: &CMat, want_v: bool) -> OrderedSvd {
    let svd = SVD::new(m.clone(), true, want_v);
    let u = svd.u.expect("left vectors requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values = RVec::from_iterator(k, order.iter().map(|&i| svd.singular_values[i]));
    let u_sorted = CMat::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]);
    let v_t = svd
        .v_t
        .map(|vt| CMat::from_fn(k, vt.ncols(), |r, c| vt[(order[r], c)]));
    OrderedSvd {
        u: u_sorted,
        singular_values,
        v_t,
    }
}

/// Orthonormal basis of the left null space of `m` (rows × cols, rows > rank).
/// Returns the trailing `rows - rank` left singular vectors of a full SVD.
pub fn left_null_space(m: &CMat, rank: usize) -> CMat {
    let rows = m.nrows();
    // Pad with zero columns so the SVD yields a full set of left vectors.
    let mut padded = CMat::zeros(rows, rows.max(m.ncols()));
    padded.view_mut((0, 0), (rows, m.ncols())).copy_from(m);
    let svd = svd_descending(&padded, false);
    svd.u.columns(rank, rows - rank).into_owned()
}

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pinv(m: &CMat) -> CMat {
    let svd = SVD::new(m.clone(), true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            out += vt.row(k).adjoint() * u.column(k).adjoint() * cr(1.0 / s);
        }
    }
    out
}

/// Solves the Hermitian positive (semi-)definite system `A x = b`.
/// Falls back to the pseudo-inverse when Cholesky fails; the flag reports it.
pub fn solve_hpd(a: &CMat, b: &CVec) -> (CVec, bool) {
    let h = hermitian_part(a);
    if let Some(ch) = h.clone().cholesky() {
        let x = ch.solve(b);
        if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return (x, false);
        }
    }
    (pinv(&h) * b, true)
}

/// Inverse of a Hermitian positive-definite matrix; `None` if not PD.
pub fn inverse_hpd(a: &CMat) -> Option<CMat> {
    hermitian_part(a).cholesky().map(|c| c.inverse())
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// `diag(d) * m`, scaling row `i` by `d[i]`.
pub fn scale_rows(m: &CMat, d: &[f64]) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * d[r])
}

/// `diag(d) * m * diag(d)`.
pub fn scale_both(m: &CMat, d: &[f64]) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * (d[r] * d[c]))
}

/// Exchange matrix `J_n` applied from the left: reverses row order.
pub fn flip_rows(m: &CMat) -> CMat {
    let n = m.nrows();
    CMat::from_fn(n, m.ncols(), |r, c| m[(n - 1 - r, c)])
}

/// `J_M * conj(m) * J_N`.
pub fn exchange_conj(m: &CMat) -> CMat {
    let (r, c) = m.shape();
    CMat::from_fn(r, c, |i, j| m[(r - 1 - i, c - 1 - j)].conj())
}

/// Gram-Schmidt orthonormalisation via thin QR; column span is preserved.
pub fn orthonormalize(m: &CMat) -> CMat {
    let qr = m.clone().qr();
    qr.q().columns(0, m.ncols()).into_owned()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Cosines of the principal angles between the column spans of two
/// matrices, descending.
pub fn principal_cosines(a: &CMat, b: &CMat) -> Vec<f64> {
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    let svd = svd_descending(&(qa.adjoint() * qb), false);
    svd.singular_values.iter().cloned().collect()
}

/// Hermitian square root of a positive semi-definite matrix; negative
/// eigenvalues from rounding are clipped to zero.
pub fn hermitian_sqrt(m: &CMat) -> CMat {
    let eig = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let s = eig.values[k].max(0.0).sqrt();
        let v = eig.vectors.column(k);
        out += v * v.adjoint() * cr(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, seed: u64) -> CMat {
        let mut s = seed;
        CMat::from_fn(n, m, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
            C64::new(a, b)
        })
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let a = sample(5, 5, 3);
        let h = &a * a.adjoint();
        let e = hermitian_eigen(&h);
        for k in 1..5 {
            assert!(e.values[k] >= e.values[k - 1]);
        }
        let d = CMat::from_diagonal(&e.values.map(cr));
        let back = &e.vectors * d * e.vectors.adjoint();
        assert!(max_abs_diff(&back, &h) < 1e-12);
    }

    #[test]
    fn svd_descending_orders() {
        let a = sample(4, 7, 9);
        let s = svd_descending(&a, true);
        for k in 1..s.singular_values.len() {
            assert!(s.singular_values[k] <= s.singular_values[k - 1]);
        }
        let sig = CMat::from_diagonal(&s.singular_values.map(cr));
        let back = &s.u * sig * s.v_t.unwrap();
        assert!(max_abs_diff(&back, &a) < 1e-12);
    }

    #[test]
    fn null_space_is_orthogonal() {
        let a = sample(7, 2, 1);
        let b = left_null_space(&a, 2);
        assert_eq!(b.shape(), (7, 5));
        assert!(frobenius(&(b.adjoint() * &a)) < 1e-12);
        assert!(max_abs_diff(&(b.adjoint() * &b), &CMat::identity(5, 5)) < 1e-12);
    }

    #[test]
    fn pinv_of_full_rank_is_inverse() {
        let a = sample(3, 3, 5);
        let p = pinv(&a);
        assert!(max_abs_diff(&(p * a), &CMat::identity(3, 3)) < 1e-10);
    }

    #[test]
    fn exchange_conj_is_involution() {
        let a = sample(3, 4, 2);
        assert_eq!(exchange_conj(&exchange_conj(&a)), a);
    }
}
