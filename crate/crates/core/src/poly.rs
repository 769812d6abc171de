//! Complex polynomial utilities. Coefficients are stored highest power first.

use nalgebra::Schur;

use crate::error::{DoaError, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};

/// Roots of `c[0] z^n + c[1] z^(n-1) + ... + c[n]` as eigenvalues of the
/// companion matrix. Leading zero coefficients are stripped first.
pub fn roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let start = coeffs
        .iter()
        .position(|c| c.norm() > 0.0)
        .ok_or_else(|| DoaError::domain("zero polynomial has no roots"))?;
    let c = &coeffs[start..];
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[0];
    if n == 1 {
        return Ok(vec![-c[1] / lead]);
    }
    let mut comp = CMat::zeros(n, n);
    for k in 0..n {
        comp[(0, k)] = -c[k + 1] / lead;
    }
    for k in 1..n {
        comp[(k, k - 1)] = ONE;
    }
    let schur = Schur::try_new(comp, 1e-15, 10_000)
        .ok_or_else(|| DoaError::Numerical("companion Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut out: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    for r in out.iter_mut() {
        *r = polish(c, *r);
    }
    Ok(out)
}

/// Two Newton steps on the original polynomial; kept only if they reduce
/// the residual.
fn polish(c: &[C64], mut z: C64) -> C64 {
    for _ in 0..2 {
        let (p, dp) = eval_with_derivative(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        if eval(c, cand).norm() < p.norm() {
            z = cand;
        } else {
            break;
        }
    }
    z
}

/// Horner evaluation.
pub fn eval(c: &[C64], z: C64) -> C64 {
    c.iter().fold(ZERO, |acc, &k| acc * z + k)
}

pub fn eval_with_derivative(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &k in c {
        dp = dp * z + p;
        p = p * z + k;
    }
    (p, dp)
}

/// Coefficients of the monic polynomial `prod (z - r_l)`, highest power first.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![ONE];
    for &r in roots {
        let mut next = vec![ZERO; c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 1] -= ck * r;
        }
        c = next;
    }
    c
}
