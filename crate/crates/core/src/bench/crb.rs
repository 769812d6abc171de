//! Numerical Cramér-Rao bound for the directions under the Gaussian
//! snapshot model `x ~ CN(0, A P A^H + Q)`.
//!
//! Unknowns are the directions, the entries of the Hermitian source
//! covariance (diagonal, real and imaginary off-diagonal parts) and the `M`
//! noise powers. The Fisher information is `N Re tr(R^-1 R_i R^-1 R_j)` where
//! the direction derivatives use central differences.

use crate::array::{steering_matrix_unchecked, ArrayScenario};
use crate::error::{DoaError, Result};
use crate::linalg::{cr, inverse_hpd, CMat, J};

pub const CRB_STEP_RAD: f64 = 1e-5;

/// Per-source bound in deg^2.
pub fn numeric_crb(scenario: &ArrayScenario) -> Result<Vec<f64>> {
    let geom = &scenario.geometry;
    let doas = scenario.sources.doas_deg();
    let p = scenario.sources.source_cov();
    let l = doas.len();
    let m = geom.num_sensors();
    let n = scenario.sources.num_snapshots() as f64;
    let a = steering_matrix_unchecked(geom, doas);
    let r = scenario.covariance();
    let r_inv = inverse_hpd(&r).ok_or_else(|| DoaError::Numerical("model covariance is not positive definite".into()))?;

    let mut derivs: Vec<CMat> = Vec::new();
    let step_deg = CRB_STEP_RAD.to_degrees();
    for k in 0..l {
        let mut plus = doas.to_vec();
        let mut minus = doas.to_vec();
        plus[k] += step_deg;
        minus[k] -= step_deg;
        let ap = steering_matrix_unchecked(geom, &plus);
        let am = steering_matrix_unchecked(geom, &minus);
        let rp = &ap * p * ap.adjoint();
        let rm = &am * p * am.adjoint();
        derivs.push((rp - rm) * cr(0.5 / CRB_STEP_RAD));
    }
    for i in 0..l {
        let ai = a.column(i);
        derivs.push(ai * ai.adjoint());
        for j in i + 1..l {
            let aj = a.column(j);
            let outer = ai * aj.adjoint();
            derivs.push(&outer + outer.adjoint());
            derivs.push((&outer - outer.adjoint()) * J);
        }
    }
    for k in 0..m {
        let mut e = CMat::zeros(m, m);
        e[(k, k)] = cr(1.0);
        derivs.push(e);
    }

    let products: Vec<CMat> = derivs.iter().map(|d| &r_inv * d).collect();
    let dim = products.len();
    let mut fim = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = n * (products[i].transpose().component_mul(&products[j])).iter().map(|z| z.re).sum::<f64>();
            fim[(i, j)] = v;
            fim[(j, i)] = v;
        }
    }
    let inv = fim
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| DoaError::Numerical("Fisher information matrix is singular".into()))?;
    let rad2_to_deg2 = (180.0 / std::f64::consts::PI).powi(2);
    let out: Vec<f64> = (0..l).map(|k| inv[(k, k)] * rad2_to_deg2).collect();
    if out.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(DoaError::Numerical("non-positive bound from Fisher information".into()));
    }
    Ok(out)
}
