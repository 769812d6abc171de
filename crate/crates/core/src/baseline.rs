//! Root-MUSIC reference estimator, optionally prewhitened by a noise estimate.

use crate::array::{DiagonalNoiseCovariance, UlaGeometry};
use crate::error::{DoaError, Result};
use crate::linalg::{hermitian_eigen, scale_both, scale_rows, CMat, C64};
use crate::poly;

#[derive(Debug, Clone, PartialEq)]
pub struct RootMusicEstimate {
    /// `L` angles, ascending.
    pub angles_deg: Vec<f64>,
    /// Roots used, in the same order as the angles.
    pub roots: Vec<C64>,
    /// Fewer than `L` roots lay strictly inside the unit circle.
    pub padded: bool,
    pub clamped: bool,
}

/// Coefficients of `z^(M-1) a^T(1/z) C a(z)`, highest power first:
/// the coefficient of `z^(M-1+k)` is the sum of the `k`-th diagonal of `C`.
pub fn music_polynomial(c: &CMat) -> Vec<C64> {
    let m = c.nrows() as isize;
    ((-(m - 1))..m)
        .rev()
        .map(|k| {
            (0..m)
                .filter_map(|i| {
                    let j = i + k;
                    (0..m).contains(&j).then(|| c[(i as usize, j as usize)])
                })
                .sum()
        })
        .collect()
}

/// Root-MUSIC on `scm`. With `q_hat` the covariance is whitened first and the
/// polynomial is built from `Q^-1/2 E_n E_n^H Q^-1/2`, so its roots still sit
/// at the raw steering phases.
pub fn root_music(
    scm: &CMat,
    q_hat: Option<&DiagonalNoiseCovariance>,
    num_sources: usize,
    geom: &UlaGeometry,
) -> Result<RootMusicEstimate> {
    let m = geom.num_sensors();
    if scm.shape() != (m, m) {
        return Err(DoaError::domain(format!("covariance must be {m}x{m}")));
    }
    if num_sources == 0 || num_sources >= m {
        return Err(DoaError::domain(format!("need 0 < L < M (L = {num_sources}, M = {m})")));
    }
    let w = match q_hat {
        Some(q) if q.len() == m => q.inv_sqrt(),
        Some(q) => {
            return Err(DoaError::domain(format!("noise covariance has {} entries for {m} sensors", q.len())));
        }
        None => vec![1.0; m],
    };
    let eig = hermitian_eigen(&scale_both(scm, &w));
    let en = scale_rows(&eig.vectors.columns(0, m - num_sources).into_owned(), &w);
    let c = &en * en.adjoint();
    let mut roots = poly::roots(&music_polynomial(&c))?;
    roots.sort_by(|a, b| (1.0 - a.norm()).abs().total_cmp(&(1.0 - b.norm()).abs()));
    let inside: Vec<C64> = roots.iter().cloned().filter(|z| z.norm() < 1.0).collect();
    let padded = inside.len() < num_sources;
    let mut chosen: Vec<C64> = inside.into_iter().take(num_sources).collect();
    if padded {
        for z in roots.iter().filter(|z| z.norm() >= 1.0) {
            if chosen.len() == num_sources {
                break;
            }
            chosen.push(*z);
        }
    }
    let mut clamped = false;
    let mut pairs: Vec<(f64, C64)> = chosen
        .into_iter()
        .map(|z| {
            let (t, c) = geom.angle_from_phase(z.arg());
            clamped |= c;
            (t.to_degrees(), z)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(RootMusicEstimate {
        angles_deg: pairs.iter().map(|p| p.0).collect(),
        roots: pairs.iter().map(|p| p.1).collect(),
        padded,
        clamped,
    })
}
