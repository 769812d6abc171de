//! Iterative noise-power estimation, on the exact covariance and on samples.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::noise_cov::estimate_noise_cov;

fn main() -> doa_lab::error::Result<()> {
    let q = vec![10.0, 1.2, 3.5, 18.0, 2.0, 8.5, 24.0, 6.5];
    let geom = UlaGeometry::half_wavelength(8)?;
    let sources = SourceConfig::uncorrelated(vec![-2.0, 7.0], 1.0, 40)?;
    let scenario = ArrayScenario::new(geom, sources, DiagonalNoiseCovariance::new(q.clone())?)?.with_snr_db(10.0);

    let exact = estimate_noise_cov(&scenario.covariance(), 2, 30)?;
    println!("exact covariance, worst relative error per iteration:");
    for (k, it) in exact.per_iteration_q.iter().enumerate().step_by(5) {
        let err = it.iter().zip(&q).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
        println!("  {k:>2}: {err:.2e}");
    }
    let worst_link = exact.link_residuals.iter().cloned().fold(0.0, f64::max);
    println!("largest link-identity mismatch {worst_link:.1e}");

    let x = synthesize(&scenario, 7);
    let est = estimate_noise_cov(x.scm(), 2, 5)?;
    println!("from 40 snapshots: {:.2?}", est.q_hat.powers());
    println!("true:              {q:.2?}");
    Ok(())
}
