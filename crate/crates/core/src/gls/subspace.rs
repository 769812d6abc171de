use serde::{Deserialize, Serialize};

use crate::array::DiagonalNoiseCovariance;
use crate::error::{DoaError, Result};
use crate::linalg::{exchange_conj, scale_rows, svd_descending, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Forward,
    Fba,
}

/// Dominant left singular vectors of whitened data.
#[derive(Debug, Clone)]
pub struct SignalSubspace {
    /// `M x L`, orthonormal columns.
    pub left_vectors: CMat,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub flavor: Flavor,
    /// Set when fewer than `L` singular values are numerically nonzero.
    pub rank_deficient: bool,
}

/// `Q^-1/2 X`: row `m` divided by `sigma_m`.
pub fn prewhiten(x: &CMat, q_hat: &DiagonalNoiseCovariance) -> Result<CMat> {
    if q_hat.len() != x.nrows() {
        return Err(DoaError::domain(format!(
            "noise covariance has {} entries for {} sensors",
            q_hat.len(),
            x.nrows()
        )));
    }
    Ok(scale_rows(x, &q_hat.inv_sqrt()))
}

/// Top-`L` left singular vectors and values of `xbar`.
pub fn signal_subspace(xbar: &CMat, num_sources: usize, flavor: Flavor) -> Result<SignalSubspace> {
    let (m, n) = xbar.shape();
    if num_sources == 0 || num_sources > m.min(n) {
        return Err(DoaError::domain(format!(
            "cannot extract {num_sources} singular vectors from a {m}x{n} matrix"
        )));
    }
    let svd = svd_descending(xbar, false);
    let s = &svd.singular_values;
    let tol = s[0] * (m.max(n) as f64) * f64::EPSILON;
    Ok(SignalSubspace {
        left_vectors: svd.u.columns(0, num_sources).into_owned(),
        singular_values: s.iter().take(num_sources).cloned().collect(),
        flavor,
        rank_deficient: s[0] == 0.0 || s[num_sources - 1] <= tol,
    })
}

/// Forward-backward data `[Q~^-1/2 X, J Q~^-1/2 conj(X) J]` with
/// `Q~ = Q + J Q J`. Returns the `M x 2N` matrix and `Q~`.
pub fn fba_embed(x: &CMat, q_hat: &DiagonalNoiseCovariance) -> Result<(CMat, DiagonalNoiseCovariance)> {
    let q_tilde = q_hat.mirrored_sum();
    let fwd = prewhiten(x, &q_tilde)?;
    let bwd = exchange_conj(&fwd);
    let (m, n) = x.shape();
    let mut out = CMat::zeros(m, 2 * n);
    out.columns_mut(0, n).copy_from(&fwd);
    out.columns_mut(n, n).copy_from(&bwd);
    Ok((out, q_tilde))
}
