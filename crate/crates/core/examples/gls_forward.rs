//! Forward-only GLS rooting with the two index-set sizes.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::gls::GlsEstimator;
use doa_lab::noise_cov::estimate_noise_cov;

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![10.0, 1.2, 3.5, 18.0, 2.0, 8.5, 24.0, 6.5])?;
    let sources = SourceConfig::uncorrelated(vec![-2.0, 7.0], 1.0, 40)?;
    let scenario = ArrayScenario::new(geom, sources, noise)?.with_snr_db(15.0);
    let x = synthesize(&scenario, 3);
    let q_hat = estimate_noise_cov(x.scm(), 2, 5)?.q_hat;

    for card in [3, 7, 8] {
        let run = GlsEstimator::forward(card).run(&geom, x.data(), &q_hat, 2)?;
        let var = run.predicted_variance(&geom)?;
        let std: Vec<f64> = var.iter().map(|v| v.sqrt().to_degrees()).collect();
        println!(
            "|I| = {card}: {:8.4?} deg, predicted std {:.3?} deg, flags {:?}",
            run.candidates.angles_deg, std, run.flags
        );
        for (k, a) in run.coeffs.iterate_history.iter().enumerate() {
            println!("    iterate {k}: a = [{:.4}, {:.4}]", a[0], a[1]);
        }
    }
    Ok(())
}
