//! The complete estimator on one data set, with its intermediate products.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::gls::Flavor;
use doa_lab::pipeline::{estimate_proposed, PipelineConfig};

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0])?;
    let sc = ArrayScenario::new(geom, SourceConfig::uncorrelated(vec![-10.0, 34.0, 40.0], 1.0, 10)?, noise)?
        .with_snr_db(15.0);
    let x = synthesize(&sc, 5);

    for flavor in [Flavor::Forward, Flavor::Fba] {
        let est = estimate_proposed(&geom, &x, 3, flavor, &PipelineConfig::default())?;
        println!("{flavor:?}");
        println!("  noise powers {:.2?}", est.noise.q_hat.powers());
        for c in &est.candidates {
            println!("  |I| = {}: {:.3?}", c.card, c.angles_deg);
        }
        println!("  selected {:.3?} (truth [-10, 34, 40])", est.doas_deg);
    }
    Ok(())
}
