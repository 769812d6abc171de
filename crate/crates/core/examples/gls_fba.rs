//! Forward-backward averaging against forward-only on a correlated pair.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::bench::rmse_db;
use doa_lab::gls::{estimate_fba, estimate_forward};
use doa_lab::linalg::C64;

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0])?;
    let truth = [33.0, 38.0];
    let sources = SourceConfig::correlated(truth.to_vec(), 1.0, C64::new(0.95, 0.0), 10)?;
    let scenario = ArrayScenario::new(geom, sources, noise.clone())?.with_snr_db(20.0);

    let (mut fwd, mut fba) = (Vec::new(), Vec::new());
    for t in 0..300 {
        let x = synthesize(&scenario, t);
        fwd.push(estimate_forward(&geom, x.data(), &noise, 2, 8)?.angles_deg);
        fba.push(estimate_fba(&geom, x.data(), &noise, 2, 8)?.angles_deg);
    }
    println!("rho = 0.95, known noise, 300 trials");
    println!("forward RMSE {:6.2} dB", rmse_db(&fwd, &truth));
    println!("FBA     RMSE {:6.2} dB", rmse_db(&fba, &truth));
    Ok(())
}
