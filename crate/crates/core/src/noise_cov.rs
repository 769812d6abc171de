//! Iterative estimation of a diagonal (nonuniform) noise covariance.
//!
//! Each iteration whitens the sample covariance with the current noise
//! estimate, takes the noise subspace from a generalized eigendecomposition
//! of `(R, Q)` and refits `Q` in closed form by least squares:
//! `q_m = Re(v_m^H r_m) / tau_m` where `v_m` is column `m` of the projector
//! `U U^H`, `r_m` column `m` of `R` and `tau_m = [U U^H]_mm`.

use crate::array::DiagonalNoiseCovariance;
use crate::error::{DoaError, Result};
use crate::linalg::{cr, hermitian_eigen, orthonormalize, scale_both, scale_rows, trace_re, CMat, RVec};

/// Projectors with a diagonal entry below this are treated as degenerate.
pub const DEGENERATE_TAU: f64 = 1e-12;

/// Default number of GED/LS alternations.
pub const DEFAULT_ITERATIONS: usize = 5;

/// Orthonormal basis of the noise subspace of the pair `(R, Q)`.
#[derive(Debug, Clone)]
pub struct NoiseSubspaceBasis {
    /// `M x (M - L)` with orthonormal columns.
    pub basis: CMat,
    /// The `M - L` smallest generalized eigenvalues, ascending.
    pub gen_eigenvalues: RVec,
    /// `U^H Q^-1 R U`. Equals `diag(gen_eigenvalues)` up to the rotation
    /// introduced by orthonormalizing the generalized eigenvectors.
    pub link: CMat,
}

impl NoiseSubspaceBasis {
    /// Wraps an externally supplied orthonormal basis (no eigenvalues).
    pub fn from_basis(basis: CMat) -> Self {
        let k = basis.ncols();
        Self {
            basis,
            gen_eigenvalues: RVec::zeros(k),
            link: CMat::zeros(k, k),
        }
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// `||R U - Q U K||_F / ||R||_F`, the generalized-eigen residual.
    pub fn residual(&self, scm: &CMat, q: &DiagonalNoiseCovariance) -> f64 {
        let ru = scm * &self.basis;
        let quk = scale_rows(&(&self.basis * &self.link), q.powers());
        crate::linalg::frobenius(&(ru - quk)) / crate::linalg::frobenius(scm)
    }
}

/// Result of the alternating estimator.
#[derive(Debug, Clone)]
pub struct NoiseCovEstimate {
    pub q_hat: DiagonalNoiseCovariance,
    pub iterations_run: usize,
    /// Starting point followed by every iterate.
    pub per_iteration_q: Vec<Vec<f64>>,
    /// Diagonal of the multiplicative link between the last two iterates.
    pub weight_matrix_last: Vec<f64>,
    /// Largest relative mismatch between each iterate and the link
    /// prediction `W_Q * q_prev`, one entry per iteration.
    pub link_residuals: Vec<f64>,
    /// Set when some least-squares power came out non-positive and was clamped.
    pub clamped: bool,
}

fn check_dims(scm: &CMat, num_sources: usize) -> Result<usize> {
    let m = scm.nrows();
    if scm.ncols() != m {
        return Err(DoaError::domain(format!("covariance must be square, got {:?}", scm.shape())));
    }
    if num_sources >= m {
        return Err(DoaError::domain(format!(
            "need fewer sources than sensors (L = {num_sources}, M = {m})"
        )));
    }
    Ok(m)
}

/// Noise subspace of `(scm, q)`: eigenvectors of `Q^-1/2 R Q^-1/2` for the
/// `M - L` smallest eigenvalues, mapped back by `Q^-1/2` and orthonormalized.
pub fn ged_noise_subspace(scm: &CMat, q: &DiagonalNoiseCovariance, num_sources: usize) -> Result<NoiseSubspaceBasis> {
    let m = check_dims(scm, num_sources)?;
    if q.len() != m {
        return Err(DoaError::domain(format!("noise covariance has {} entries for {m} sensors", q.len())));
    }
    let inv_sqrt = q.inv_sqrt();
    let whitened = scale_both(scm, &inv_sqrt);
    let eig = hermitian_eigen(&whitened);
    let k = m - num_sources;
    let gen_vectors = scale_rows(&eig.vectors.columns(0, k).into_owned(), &inv_sqrt);
    let basis = orthonormalize(&gen_vectors);
    let link = basis.adjoint() * scale_rows(&(scm * &basis), &q.inv());
    Ok(NoiseSubspaceBasis {
        basis,
        gen_eigenvalues: RVec::from_iterator(k, eig.values.iter().take(k).cloned()),
        link,
    })
}

fn projector_diagonal(proj: &CMat) -> Result<Vec<f64>> {
    (0..proj.nrows())
        .map(|m| {
            let tau = proj[(m, m)].re;
            if tau < DEGENERATE_TAU {
                Err(DoaError::DegenerateProjection { sensor: m, tau })
            } else {
                Ok(tau)
            }
        })
        .collect()
}

/// Unconstrained least-squares powers for a fixed basis; may be non-positive.
pub fn ls_q_raw(scm: &CMat, basis: &NoiseSubspaceBasis) -> Result<Vec<f64>> {
    let proj = basis.projector();
    let tau = projector_diagonal(&proj)?;
    let pr = &proj * scm;
    Ok((0..scm.nrows()).map(|m| pr[(m, m)].re / tau[m]).collect())
}

/// Closed-form least-squares noise powers for a fixed noise subspace.
/// Non-positive entries are an error here; [`estimate_noise_cov`] clamps them.
pub fn ls_q_update(scm: &CMat, basis: &NoiseSubspaceBasis) -> Result<DiagonalNoiseCovariance> {
    DiagonalNoiseCovariance::new(ls_q_raw(scm, basis)?)
}

/// Least-squares objective `||(R - Q) U||_F^2` minimized by the update.
pub fn ls_objective(scm: &CMat, q: &[f64], basis: &CMat) -> f64 {
    let mut d = scm.clone();
    for (m, &p) in q.iter().enumerate() {
        d[(m, m)] -= cr(p);
    }
    crate::linalg::frobenius(&(d * basis)).powi(2)
}

/// Diagonal link `W_Q = Re D{U K U^H} D{U U^H}^-1` with `K = U^H Q^-1 R U`;
/// the next least-squares iterate equals `W_Q * q` entrywise.
pub fn link_weights(basis: &NoiseSubspaceBasis) -> Result<Vec<f64>> {
    let proj = basis.projector();
    let tau = projector_diagonal(&proj)?;
    let uku = &basis.basis * &basis.link * basis.basis.adjoint();
    Ok((0..tau.len()).map(|m| uku[(m, m)].re / tau[m]).collect())
}

/// Alternates [`ged_noise_subspace`] and the least-squares refit, starting
/// from the diagonal of `scm`, for exactly `max_iter` rounds.
pub fn estimate_noise_cov(scm: &CMat, num_sources: usize, max_iter: usize) -> Result<NoiseCovEstimate> {
    let m = check_dims(scm, num_sources)?;
    let diag: Vec<f64> = (0..m).map(|i| scm[(i, i)].re).collect();
    if let Some((i, d)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0 && d.is_finite())) {
        return Err(DoaError::domain(format!("covariance diagonal entry {i} is {d}, must be positive")));
    }
    let floor = 1e-8 * trace_re(scm) / m as f64;
    let mut q = DiagonalNoiseCovariance::new(diag)?;
    let mut history = vec![q.powers().to_vec()];
    let mut weights = vec![1.0; m];
    let mut link_residuals = Vec::with_capacity(max_iter);
    let mut clamped = false;
    for _ in 0..max_iter {
        let basis = ged_noise_subspace(scm, &q, num_sources)?;
        let raw = ls_q_raw(scm, &basis)?;
        weights = link_weights(&basis)?;
        let mismatch = raw
            .iter()
            .zip(&weights)
            .zip(q.powers())
            .map(|((&r, &w), &p)| (r - w * p).abs() / r.abs().max(floor))
            .fold(0.0, f64::max);
        link_residuals.push(mismatch);
        let next: Vec<f64> = raw
            .into_iter()
            .map(|p| {
                if p > 0.0 {
                    p
                } else {
                    clamped = true;
                    floor
                }
            })
            .collect();
        q = DiagonalNoiseCovariance::new(next)?;
        history.push(q.powers().to_vec());
    }
    Ok(NoiseCovEstimate {
        q_hat: q,
        iterations_run: max_iter,
        per_iteration_q: history,
        weight_matrix_last: weights,
        link_residuals,
        clamped,
    })
}

fn variance_terms(true_r: &CMat, basis: &NoiseSubspaceBasis, n: usize) -> Result<(CMat, Vec<f64>)> {
    if n == 0 {
        return Err(DoaError::domain("snapshot count must be at least 1"));
    }
    let proj = basis.projector();
    let tau = projector_diagonal(&proj)?;
    if true_r.shape() != proj.shape() {
        return Err(DoaError::domain("covariance and basis dimensions differ"));
    }
    Ok((proj, tau))
}

/// Asymptotic variance of each least-squares power for a fixed basis, as
/// `([R]_mm / (2 N tau_m^2)) Re{v_m^H R (v_m + N conj(v_m))}`.
///
/// This expression does not match Monte Carlo; see
/// [`q_asymptotic_variance_gaussian`] for the exact one-step variance.
pub fn q_asymptotic_variance(true_r: &CMat, basis: &NoiseSubspaceBasis, n: usize) -> Result<Vec<f64>> {
    let (proj, tau) = variance_terms(true_r, basis, n)?;
    let nf = n as f64;
    Ok((0..proj.nrows())
        .map(|m| {
            let v = proj.column(m);
            let w = v + v.map(|z| z.conj()) * cr(nf);
            let val = (v.adjoint() * true_r * w)[(0, 0)].re;
            true_r[(m, m)].re / (2.0 * nf * tau[m] * tau[m]) * val
        })
        .collect())
}

/// Exact variance of one least-squares update under circular Gaussian
/// snapshots: `(R_mm v_m^H R v_m + Re[(v_m^H r_m)^2]) / (2 N tau_m^2)`.
pub fn q_asymptotic_variance_gaussian(true_r: &CMat, basis: &NoiseSubspaceBasis, n: usize) -> Result<Vec<f64>> {
    let (proj, tau) = variance_terms(true_r, basis, n)?;
    let nf = n as f64;
    Ok((0..proj.nrows())
        .map(|m| {
            let v = proj.column(m);
            let quad = (v.adjoint() * true_r * v)[(0, 0)].re;
            let cross = (v.adjoint() * true_r.column(m))[(0, 0)];
            (true_r[(m, m)].re * quad + (cross * cross).re) / (2.0 * nf * tau[m] * tau[m])
        })
        .collect())
}
