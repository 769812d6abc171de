use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use doa_lab::array::{
    complex_gaussian, steering_matrix, steering_vector, synthesize, ArrayScenario, DiagonalNoiseCovariance,
    SourceConfig, UlaGeometry,
};
use doa_lab::bench::rmse_db;
use doa_lab::gls::{estimate_fba, estimate_forward};
use doa_lab::linalg::{cis, hermitian_eigen, max_abs_diff, C64};
use doa_lab::poly::{eval, from_roots, roots};
use doa_lab::select::SelectionContext;

fn doas_strategy(max_l: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-60.0..60.0f64, 1..=max_l).prop_filter("sources at least 4 deg apart", |d| {
        let mut s = d.clone();
        s.sort_by(f64::total_cmp);
        s.windows(2).all(|w| w[1] - w[0] >= 4.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steering_entries_have_unit_modulus(m in 2usize..16, theta in -89.0..89.0f64, d in 0.05..=0.5f64) {
        let g = UlaGeometry::new(m, d).unwrap();
        let a = steering_vector(&g, theta).unwrap();
        prop_assert!((a[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        for z in a.iter() {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_covariance_is_hermitian_psd(m in 3usize..10, n in 1usize..30, seed in any::<u64>()) {
        let g = UlaGeometry::half_wavelength(m).unwrap();
        let s = SourceConfig::uncorrelated(vec![10.0], 2.0, n).unwrap();
        let sc = ArrayScenario::new(g, s, DiagonalNoiseCovariance::uniform(m, 1.0).unwrap()).unwrap();
        let r = synthesize(&sc, seed).scm().clone();
        prop_assert!(max_abs_diff(&r, &r.adjoint()) < 1e-12);
        let scale = r.diagonal().iter().map(|z| z.re).sum::<f64>();
        prop_assert!(hermitian_eigen(&r).values[0] > -1e-10 * scale);
    }

    #[test]
    fn polynomial_roots_round_trip(phases in prop::collection::vec(-3.0..3.0f64, 1..6), radius in 0.5..1.5f64) {
        let true_roots: Vec<C64> = phases.iter().enumerate().map(|(i, p)| cis(*p) * (radius + 0.1 * i as f64)).collect();
        let coeffs = from_roots(&true_roots);
        let found = roots(&coeffs).unwrap();
        prop_assert_eq!(found.len(), true_roots.len());
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for z in &found {
            prop_assert!(eval(&coeffs, *z).norm() < 1e-8 * scale);
        }
        let rebuilt = from_roots(&found);
        for (a, b) in rebuilt.iter().zip(&coeffs) {
            prop_assert!((a - b).norm() < 1e-7 * scale);
        }
    }

    #[test]
    fn noiseless_data_gives_exact_directions(
        doas in doas_strategy(3),
        m in 6usize..11,
        seed in any::<u64>(),
        fba in any::<bool>(),
    ) {
        let l = doas.len();
        let g = UlaGeometry::half_wavelength(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = steering_matrix(&g, &doas).unwrap() * complex_gaussian(&mut rng, l, 3 * m);
        let q = DiagonalNoiseCovariance::new((0..m).map(|k| 1.0 + k as f64).collect()).unwrap();
        let est = if fba { estimate_fba(&g, &x, &q, l, m) } else { estimate_forward(&g, &x, &q, l, m) }.unwrap();
        let mut truth = doas.clone();
        truth.sort_by(f64::total_cmp);
        for (e, t) in est.angles_deg.iter().zip(&truth) {
            prop_assert!((e - t).abs() < 1e-6, "{e} vs {t}");
        }
    }

    #[test]
    fn mirrored_noise_is_palindromic(powers in prop::collection::vec(0.1..20.0f64, 2..12)) {
        let q = DiagonalNoiseCovariance::new(powers.clone()).unwrap();
        let t = q.mirrored_sum();
        let p = t.powers();
        let m = p.len();
        for k in 0..m {
            prop_assert_eq!(p[k], p[m - 1 - k]);
            prop_assert!((p[k] - powers[k] - powers[m - 1 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_returns_l_of_the_candidates(
        doas in doas_strategy(3),
        extra in prop::collection::vec(-80.0..80.0f64, 0..4),
        snr in -5.0..25.0f64,
        seed in any::<u64>(),
    ) {
        let l = doas.len();
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let q = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0]).unwrap();
        let s = SourceConfig::uncorrelated(doas.clone(), 1.0, 20).unwrap();
        let sc = ArrayScenario::new(g, s, q.clone()).unwrap().with_snr_db(snr);
        let x = synthesize(&sc, seed);
        let ctx = SelectionContext::new(x.scm().clone(), q, g, l).unwrap();
        let pool: Vec<f64> = doas.iter().map(|d| d + 0.3).chain(extra.iter().cloned()).collect();
        let trace = ctx.select(&pool).unwrap();
        prop_assert_eq!(trace.final_doas.len(), l);
        prop_assert!(trace.final_doas.windows(2).all(|w| w[0] <= w[1]));
        for d in &trace.final_doas {
            prop_assert!(pool.contains(d));
        }

        let mut reversed = pool.clone();
        reversed.reverse();
        let again = ctx.select(&reversed).unwrap();
        prop_assert_eq!(trace.final_doas, again.final_doas);
    }

    #[test]
    fn rmse_ignores_estimate_order(errs in prop::collection::vec(-3.0..3.0f64, 2..4), trials in 1usize..5) {
        let truth: Vec<f64> = (0..errs.len()).map(|k| -40.0 + 30.0 * k as f64).collect();
        let est: Vec<f64> = truth.iter().zip(&errs).map(|(t, e)| t + e).collect();
        let mut rev = est.clone();
        rev.reverse();
        let a = rmse_db(&vec![est; trials], &truth);
        let b = rmse_db(&vec![rev; trials], &truth);
        prop_assert!(a == b || (a - b).abs() < 1e-12);
    }
}
