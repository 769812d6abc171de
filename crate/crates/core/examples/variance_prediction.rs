//! First-order variance predictions against Monte Carlo: noise powers after
//! one refit from the exact subspace, and GLS DOA estimates.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::gls::GlsEstimator;
use doa_lab::noise_cov::{ged_noise_subspace, ls_q_raw, q_asymptotic_variance, q_asymptotic_variance_gaussian};

fn sample_var(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

fn main() -> doa_lab::error::Result<()> {
    let trials = 2000;
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0])?;
    let sc = ArrayScenario::new(geom, SourceConfig::uncorrelated(vec![33.0, 36.0], 1.0, 500)?, noise)?
        .with_snr_db(10.0);
    let r = sc.covariance();
    let basis = ged_noise_subspace(&r, &sc.noise, 2)?;
    let stated = q_asymptotic_variance(&r, &basis, 500)?;
    let gaussian = q_asymptotic_variance_gaussian(&r, &basis, 500)?;
    let draws: Vec<Vec<f64>> = (0..trials).map(|t| ls_q_raw(synthesize(&sc, t).scm(), &basis)).collect::<Result<_, _>>()?;
    println!("sensor  empirical   stated     gaussian");
    for m in 0..8 {
        let col: Vec<f64> = draws.iter().map(|d| d[m]).collect();
        println!("{m:>6}  {:.3e}  {:.3e}  {:.3e}", sample_var(&col), stated[m], gaussian[m]);
    }

    let q_ex1 = DiagonalNoiseCovariance::new(vec![10.0, 1.2, 3.5, 18.0, 2.0, 8.5, 24.0, 6.5])?;
    let sc = ArrayScenario::new(geom, SourceConfig::uncorrelated(vec![-2.0, 7.0], 1.0, 40)?, q_ex1.clone())?
        .with_snr_db(30.0);
    for est in [GlsEstimator::forward(8), GlsEstimator::fba(8)] {
        let mut angles = [Vec::new(), Vec::new()];
        let mut predicted = [0.0; 2];
        for t in 0..trials {
            let run = est.run(&geom, synthesize(&sc, 10_000 + t).data(), &q_ex1, 2)?;
            let var = run.predicted_variance(&geom)?;
            for k in 0..2 {
                angles[k].push(run.candidates.angles_deg[k]);
                predicted[k] += var[k] / trials as f64;
            }
        }
        for k in 0..2 {
            println!(
                "{:?} source {k}: empirical std {:.4} deg, predicted {:.4} deg",
                est.flavor,
                sample_var(&angles[k]).sqrt(),
                predicted[k].sqrt().to_degrees()
            );
        }
    }
    Ok(())
}
