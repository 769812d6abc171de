use crate::array::UlaGeometry;
use crate::error::{DoaError, Result};
use crate::linalg::{hermitian_part, inverse_hpd, pinv, CMat, CVec, C64, ONE};
use crate::poly;

/// First-order DOA variance (rad^2) of the GLS rooting estimator, one entry
/// per root in ascending-angle order:
/// `1/2 (lambda / (2 pi d cos theta))^2 g^T (H^H W H)^-1 conj(g) / |p'(gamma)|^2`
/// with `g = [gamma^(L-1), ..., 1]`. Applies to both flavors given the
/// matching `H` and `W`.
pub fn doa_asymptotic_variance(a: &CVec, weight: &CMat, h_mat: &CMat, geom: &UlaGeometry) -> Result<Vec<f64>> {
    let coeffs: Vec<C64> = std::iter::once(ONE).chain(a.iter().cloned()).collect();
    let normal = hermitian_part(&(h_mat.adjoint() * weight * h_mat));
    let cov = inverse_hpd(&normal).unwrap_or_else(|| pinv(&normal));
    let mut rooted: Vec<(f64, C64)> = poly::roots(&coeffs)?
        .into_iter()
        .map(|z| (geom.angle_from_phase(z.arg()).0, z))
        .collect();
    rooted.sort_by(|x, y| x.0.total_cmp(&y.0));
    rooted
        .iter()
        .enumerate()
        .map(|(i, &(theta, gamma))| variance_at_root(&coeffs, &cov, gamma, theta, geom).map_err(|e| match e {
            DoaError::DegenerateRoot { magnitude, .. } => DoaError::DegenerateRoot { index: i, magnitude },
            other => other,
        }))
        .collect()
}

pub(crate) fn variance_at_root(coeffs: &[C64], cov: &CMat, gamma: C64, theta_rad: f64, geom: &UlaGeometry) -> Result<f64> {
    let l = coeffs.len() - 1;
    let (_, phi) = poly::eval_with_derivative(coeffs, gamma);
    if phi.norm() < 1e-10 {
        return Err(DoaError::DegenerateRoot {
            index: 0,
            magnitude: phi.norm(),
        });
    }
    let g = CVec::from_fn(l, |i, _| gamma.powi((l - 1 - i) as i32));
    let quad = (g.transpose() * cov * g.map(|z| z.conj()))[(0, 0)].re;
    let scale = 1.0 / (2.0 * std::f64::consts::PI * geom.spacing_over_wavelength() * theta_rad.cos());
    Ok(0.5 * scale * scale * quad / phi.norm_sqr())
}
