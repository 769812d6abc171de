use crate::array::{DiagonalNoiseCovariance, UlaGeometry};
use crate::error::{DoaError, Result};
use crate::linalg::{cr, hermitian_part, inverse_hpd, pinv, solve_hpd, svd_descending, trace_re, CMat, CVec, C64, ONE};
use crate::poly;

use super::subspace::{fba_embed, prewhiten, signal_subspace, Flavor, SignalSubspace};
use super::system::{assemble_system, build_dft_system, DftSystem};
use super::variance::doa_asymptotic_variance;

pub const DEFAULT_GLS_ITERATIONS: usize = 5;

/// Coefficients `a` of `z^L + a_1 z^(L-1) + ... + a_L` and every iterate.
#[derive(Debug, Clone)]
pub struct PolynomialCoefficients {
    pub a: CVec,
    /// Least-squares start followed by each reweighted solution.
    pub iterate_history: Vec<CVec>,
}

impl PolynomialCoefficients {
    /// Full coefficient list, highest power first, with the leading 1.
    pub fn monic(&self) -> Vec<C64> {
        std::iter::once(ONE).chain(self.a.iter().cloned()).collect()
    }
}

/// One candidate set: `L` angles ascending with their polynomial roots.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaCandidates {
    pub angles_deg: Vec<f64>,
    pub roots: Vec<C64>,
    /// `|I|` used to produce this set.
    pub card: usize,
    /// A root phase mapped outside the visible region and was clamped to +-90.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GlsFlags {
    pub rank_deficient_subspace: bool,
    pub ridge_applied: bool,
    pub pinv_fallback: bool,
    pub angle_clamped: bool,
}

impl GlsFlags {
    pub fn any(&self) -> bool {
        self.rank_deficient_subspace || self.ridge_applied || self.pinv_fallback || self.angle_clamped
    }

    fn merge(&mut self, other: GlsFlags) {
        self.rank_deficient_subspace |= other.rank_deficient_subspace;
        self.ridge_applied |= other.ridge_applied;
        self.pinv_fallback |= other.pinv_fallback;
        self.angle_clamped |= other.angle_clamped;
    }
}

/// Everything produced by one estimator run, kept for diagnostics and the
/// variance predictor.
#[derive(Debug, Clone)]
pub struct GlsRun {
    pub candidates: DoaCandidates,
    pub coeffs: PolynomialCoefficients,
    pub subspace: SignalSubspace,
    pub system: DftSystem,
    pub h_mat: CMat,
    pub h_vec: CVec,
    /// Weight evaluated at the final coefficients.
    pub weight: CMat,
    pub flags: GlsFlags,
}

impl GlsRun {
    /// Predicted DOA variances in rad^2, in the order of `candidates`.
    pub fn predicted_variance(&self, geom: &UlaGeometry) -> Result<Vec<f64>> {
        doa_asymptotic_variance(&self.coeffs.a, &self.weight, &self.h_mat, geom)
    }
}

/// GLS weight `Sigma^2 (x) (C C^H)^-1` with
/// `C(a) = B^H (I + diag(Z W_a a)) Z W_D diag(q_half)`.
/// Returns the weight and whether a ridge had to be added to `C C^H`.
pub fn gls_weight(sys: &DftSystem, subspace: &SignalSubspace, a: &CVec, q_half: &[f64]) -> (CMat, bool) {
    let zwa_a = sys.select_rows(&sys.wa) * a;
    let zwd = sys.select_rows(&sys.dft_matrix);
    let inner = CMat::from_fn(zwd.nrows(), zwd.ncols(), |r, c| zwd[(r, c)] * (ONE + zwa_a[r]) * q_half[c]);
    let c = sys.null_basis.adjoint() * inner;
    let cch = hermitian_part(&(&c * c.adjoint()));
    let k = cch.nrows();
    let (inv, ridged) = match inverse_hpd(&cch) {
        Some(inv) if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => (inv, false),
        _ => {
            let ridge = 1e-10 * trace_re(&cch) / k as f64;
            let reg = &cch + CMat::identity(k, k) * cr(ridge.max(f64::MIN_POSITIVE));
            (inverse_hpd(&reg).unwrap_or_else(|| pinv(&reg)), true)
        }
    };
    let inv = hermitian_part(&inv);
    let l = subspace.singular_values.len();
    let mut w = CMat::zeros(l * k, l * k);
    for (p, s) in subspace.singular_values.iter().enumerate() {
        w.view_mut((p * k, p * k), (k, k)).copy_from(&(&inv * cr(s * s)));
    }
    (w, ridged)
}

fn least_squares(h_mat: &CMat, h_vec: &CVec) -> (CVec, bool) {
    let s = svd_descending(h_mat, false).singular_values;
    let tol = s[0] * (h_mat.nrows().max(h_mat.ncols()) as f64) * f64::EPSILON;
    let deficient = s.len() < h_mat.ncols() || s[s.len() - 1] <= tol;
    (pinv(h_mat) * h_vec, deficient)
}

/// Least-squares start followed by `iterations` reweighted solves
/// `a = (H^H W H)^-1 H^H W h` with `W` rebuilt from the previous `a`.
/// Returns the coefficients, the weight at the final iterate, and flags.
pub fn solve_gls(
    h_mat: &CMat,
    h_vec: &CVec,
    sys: &DftSystem,
    subspace: &SignalSubspace,
    q_half: &[f64],
    iterations: usize,
) -> (PolynomialCoefficients, CMat, GlsFlags) {
    let mut flags = GlsFlags::default();
    let (mut a, deficient) = least_squares(h_mat, h_vec);
    flags.pinv_fallback |= deficient;
    let mut history = vec![a.clone()];
    for _ in 0..iterations {
        let (w, ridged) = gls_weight(sys, subspace, &a, q_half);
        flags.ridge_applied |= ridged;
        let hw = h_mat.adjoint() * &w;
        let (next, fallback) = solve_hpd(&(&hw * h_mat), &(&hw * h_vec));
        flags.pinv_fallback |= fallback;
        a = next;
        history.push(a.clone());
    }
    let (w, ridged) = gls_weight(sys, subspace, &a, q_half);
    flags.ridge_applied |= ridged;
    (
        PolynomialCoefficients {
            a,
            iterate_history: history,
        },
        w,
        flags,
    )
}

/// Roots of the monic polynomial mapped to angles through their phases,
/// sorted ascending.
pub fn roots_to_doas(a: &CVec, geom: &UlaGeometry, card: usize) -> Result<DoaCandidates> {
    let coeffs: Vec<C64> = std::iter::once(ONE).chain(a.iter().cloned()).collect();
    if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(DoaError::Numerical("non-finite polynomial coefficients".into()));
    }
    let roots = poly::roots(&coeffs)?;
    let mut clamped = false;
    let mut pairs: Vec<(f64, C64)> = roots
        .into_iter()
        .map(|z| {
            let (theta, c) = geom.angle_from_phase(z.arg());
            clamped |= c;
            (theta.to_degrees(), z)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(DoaCandidates {
        angles_deg: pairs.iter().map(|p| p.0).collect(),
        roots: pairs.iter().map(|p| p.1).collect(),
        card,
        clamped,
    })
}

/// Configurable runner for either flavor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlsEstimator {
    pub flavor: Flavor,
    pub card: usize,
    pub iterations: usize,
}

impl GlsEstimator {
    pub fn forward(card: usize) -> Self {
        Self {
            flavor: Flavor::Forward,
            card,
            iterations: DEFAULT_GLS_ITERATIONS,
        }
    }

    pub fn fba(card: usize) -> Self {
        Self {
            flavor: Flavor::Fba,
            card,
            iterations: DEFAULT_GLS_ITERATIONS,
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn run(&self, geom: &UlaGeometry, x: &CMat, q_hat: &DiagonalNoiseCovariance, num_sources: usize) -> Result<GlsRun> {
        let m = geom.num_sensors();
        if x.nrows() != m {
            return Err(DoaError::domain(format!("data has {} rows for {m} sensors", x.nrows())));
        }
        if num_sources == 0 || num_sources >= m {
            return Err(DoaError::domain(format!(
                "need 0 < L < M (L = {num_sources}, M = {m})"
            )));
        }
        let (xbar, q_used) = match self.flavor {
            Flavor::Forward => (prewhiten(x, q_hat)?, q_hat.clone()),
            Flavor::Fba => fba_embed(x, q_hat)?,
        };
        let subspace = signal_subspace(&xbar, num_sources, self.flavor)?;
        let q_half = q_used.sqrt();
        let u_tilde = crate::linalg::scale_rows(&subspace.left_vectors, &q_half);
        let ubar1 = super::system::dft_matrix(m) * u_tilde.column(0);
        let system = build_dft_system(m, num_sources, self.card, &ubar1)?;
        let (h_mat, h_vec) = assemble_system(&system, &u_tilde);
        let (coeffs, weight, mut flags) = solve_gls(&h_mat, &h_vec, &system, &subspace, &q_half, self.iterations);
        let candidates = roots_to_doas(&coeffs.a, geom, self.card)?;
        flags.merge(GlsFlags {
            rank_deficient_subspace: subspace.rank_deficient,
            angle_clamped: candidates.clamped,
            ..GlsFlags::default()
        });
        Ok(GlsRun {
            candidates,
            coeffs,
            subspace,
            system,
            h_mat,
            h_vec,
            weight,
            flags,
        })
    }
}

/// Forward-only estimate from raw snapshots and a noise-power estimate.
pub fn estimate_forward(
    geom: &UlaGeometry,
    x: &CMat,
    q_hat: &DiagonalNoiseCovariance,
    num_sources: usize,
    card: usize,
) -> Result<DoaCandidates> {
    Ok(GlsEstimator::forward(card).run(geom, x, q_hat, num_sources)?.candidates)
}

/// Forward-backward estimate from raw snapshots and a noise-power estimate.
pub fn estimate_fba(
    geom: &UlaGeometry,
    x: &CMat,
    q_hat: &DiagonalNoiseCovariance,
    num_sources: usize,
    card: usize,
) -> Result<DoaCandidates> {
    Ok(GlsEstimator::fba(card).run(geom, x, q_hat, num_sources)?.candidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{complex_gaussian, steering_matrix, synthesize, ArrayScenario, SourceConfig};
    use crate::linalg::{cis, max_abs_diff};
    use crate::poly::from_roots;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const Q_EX1: [f64; 8] = [10.0, 1.2, 3.5, 18.0, 2.0, 8.5, 24.0, 6.5];

    fn noiseless(m: usize, doas: &[f64], rho: f64, n: usize, seed: u64) -> (UlaGeometry, CMat) {
        let g = UlaGeometry::half_wavelength(m).unwrap();
        let s = SourceConfig::correlated(doas.to_vec(), 1.0, C64::new(rho, 0.0), n).unwrap();
        let p_half = crate::linalg::hermitian_sqrt(s.source_cov());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = p_half * complex_gaussian(&mut rng, doas.len(), n);
        (g, steering_matrix(&g, doas).unwrap() * sig)
    }

    fn run_setup(m: usize, doas: &[f64], seed: u64) -> (GlsRun, Vec<f64>) {
        let g = UlaGeometry::half_wavelength(m).unwrap();
        let q = DiagonalNoiseCovariance::new(Q_EX1[..m].to_vec()).unwrap();
        let s = SourceConfig::uncorrelated(doas.to_vec(), 20.0, 40).unwrap();
        let sc = ArrayScenario::new(g, s, q.clone()).unwrap();
        let x = synthesize(&sc, seed);
        let run = GlsEstimator::forward(m - 1).run(&g, x.data(), &q, doas.len()).unwrap();
        (run, q.sqrt())
    }

    #[test]
    fn noiseless_forward_is_exact() {
        let q = DiagonalNoiseCovariance::new(Q_EX1.to_vec()).unwrap();
        let (g, x) = noiseless(8, &[-2.0, 7.0], 0.0, 40, 1);
        for card in [3, 7, 8] {
            let run = GlsEstimator::forward(card).run(&g, &x, &q, 2).unwrap();
            assert!((run.candidates.angles_deg[0] + 2.0).abs() < 1e-6);
            assert!((run.candidates.angles_deg[1] - 7.0).abs() < 1e-6);
            let first = &run.coeffs.iterate_history[0];
            for it in &run.coeffs.iterate_history {
                assert!((it - first).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn noiseless_fba_is_exact() {
        let q = DiagonalNoiseCovariance::new(Q_EX1.to_vec()).unwrap();
        let (g, x) = noiseless(8, &[-20.0, 3.0], 0.0, 30, 2);
        let c = estimate_fba(&g, &x, &q, 2, 8).unwrap();
        assert!((c.angles_deg[0] + 20.0).abs() < 1e-6);
        assert!((c.angles_deg[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_pair_needs_fba() {
        let q = DiagonalNoiseCovariance::identity(8);
        let (g, x) = noiseless(8, &[10.0, 25.0], 1.0, 30, 3);
        let fwd = GlsEstimator::forward(8).run(&g, &x, &q, 2).unwrap();
        assert!(fwd.subspace.rank_deficient);
        let fba = estimate_fba(&g, &x, &q, 2, 8).unwrap();
        assert!((fba.angles_deg[0] - 10.0).abs() < 1e-6);
        assert!((fba.angles_deg[1] - 25.0).abs() < 1e-6);
    }

    #[test]
    fn uniform_unit_noise_skips_whitening() {
        let (g, x) = noiseless(6, &[15.0], 0.0, 10, 4);
        let c = estimate_forward(&g, &x, &DiagonalNoiseCovariance::identity(6), 1, 6).unwrap();
        assert!((c.angles_deg[0] - 15.0).abs() < 1e-6);
    }

    #[test]
    fn root_mapping_cases() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let c = roots_to_doas(&CVec::from_vec(vec![C64::new(-1.0, 0.0)]), &g, 2).unwrap();
        assert!(c.angles_deg[0].abs() < 1e-12);

        let gamma = cis(-std::f64::consts::PI * 0.5);
        let c = roots_to_doas(&CVec::from_vec(vec![-gamma]), &g, 2).unwrap();
        assert!((c.angles_deg[0] - 30.0).abs() < 1e-10);

        let truth = [-47.3, 12.9, 61.0];
        let roots: Vec<C64> = truth.iter().map(|t| cis(g.phase_step(f64::to_radians(*t)))).collect();
        let coeffs = from_roots(&roots);
        let a = CVec::from_iterator(3, coeffs[1..].iter().cloned());
        let c = roots_to_doas(&a, &g, 8).unwrap();
        for (e, t) in c.angles_deg.iter().zip(truth) {
            assert!((e - t).abs() < 1e-8);
        }
        let back = from_roots(&c.roots);
        for (x, y) in back.iter().zip(&coeffs) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn out_of_range_phase_is_clamped() {
        let g = UlaGeometry::new(4, 0.25).unwrap();
        let c = roots_to_doas(&CVec::from_vec(vec![-cis(2.5)]), &g, 2).unwrap();
        assert!(c.clamped);
        assert_eq!(c.angles_deg[0], -90.0);
    }

    #[test]
    fn weight_structure() {
        let (run, q_half) = run_setup(8, &[-2.0, 7.0], 5);
        let w = &run.weight;
        assert!(max_abs_diff(w, &w.adjoint()) < 1e-10 * w.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let min_eig = crate::linalg::hermitian_eigen(w).values[0];
        assert!(min_eig > -1e-10);

        let k = run.system.card() - 2;
        let (w0, ridged) = gls_weight(&run.system, &run.subspace, &CVec::zeros(2), &q_half);
        assert!(!ridged);
        let zwd = run.system.select_rows(&run.system.dft_matrix);
        let c0 = run.system.null_basis.adjoint() * crate::linalg::scale_rows(&zwd.transpose(), &q_half).transpose();
        let inv = (&c0 * c0.adjoint()).try_inverse().unwrap();
        for p in 0..2 {
            let s2 = run.subspace.singular_values[p].powi(2);
            let block = w0.view((p * k, p * k), (k, k)).into_owned();
            assert!(max_abs_diff(&block, &(&inv * cr(s2))) < 1e-8 * s2);
        }
        assert!(w0.view((0, k), (k, k)).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn zero_iterations_is_least_squares() {
        let (run, q_half) = run_setup(8, &[-2.0, 7.0], 6);
        let (ls, _, _) = solve_gls(&run.h_mat, &run.h_vec, &run.system, &run.subspace, &q_half, 0);
        let direct = pinv(&run.h_mat) * &run.h_vec;
        assert!((ls.a - direct).norm() < 1e-12);
    }

    #[test]
    fn normal_equations_hold() {
        let (run, q_half) = run_setup(8, &[-2.0, 7.0], 7);
        let a_prev = &run.coeffs.iterate_history[run.coeffs.iterate_history.len() - 2];
        let (w, _) = gls_weight(&run.system, &run.subspace, a_prev, &q_half);
        let hw = run.h_mat.adjoint() * &w;
        let resid = &hw * (&run.h_mat * &run.coeffs.a - &run.h_vec);
        assert!(resid.norm() < 1e-8 * (&hw * &run.h_vec).norm());
    }

    #[test]
    fn residual_equals_weighted_subspace() {
        let (run, q_half) = run_setup(8, &[-2.0, 7.0], 8);
        let a = &run.coeffs.a;
        let sys = &run.system;
        let zwa_a = sys.select_rows(&sys.wa) * a;
        let zwd = sys.select_rows(&sys.dft_matrix);
        let inner = CMat::from_fn(zwd.nrows(), 8, |r, c| zwd[(r, c)] * (ONE + zwa_a[r]) * q_half[c]);
        let c = sys.null_basis.adjoint() * inner;
        let k = sys.card() - 2;
        let e = &run.h_mat * a - &run.h_vec;
        for p in 0..2 {
            let cu = &c * run.subspace.left_vectors.column(p);
            assert!((e.rows(p * k, k) - cu).norm() < 1e-10);
        }
    }
}
