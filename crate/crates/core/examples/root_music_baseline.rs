//! Root-MUSIC with and without noise whitening.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::baseline::root_music;
use doa_lab::bench::rmse_db;
use doa_lab::noise_cov::estimate_noise_cov;

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0])?;
    let truth = [33.0, 36.0];
    let scenario =
        ArrayScenario::new(geom, SourceConfig::uncorrelated(truth.to_vec(), 1.0, 10)?, noise.clone())?;

    println!(" snr   raw   est-Q  true-Q  (RMSE dB, 300 trials)");
    for snr in [10.0, 15.0, 20.0, 25.0] {
        let sc = scenario.with_snr_db(snr);
        let mut rows = [Vec::new(), Vec::new(), Vec::new()];
        for t in 0..300 {
            let x = synthesize(&sc, t);
            let q_hat = estimate_noise_cov(x.scm(), 2, 5)?.q_hat;
            rows[0].push(root_music(x.scm(), None, 2, &geom)?.angles_deg);
            rows[1].push(root_music(x.scm(), Some(&q_hat), 2, &geom)?.angles_deg);
            rows[2].push(root_music(x.scm(), Some(&noise), 2, &geom)?.angles_deg);
        }
        let r: Vec<f64> = rows.iter().map(|e| rmse_db(e, &truth)).collect();
        println!("{snr:4} {:6.2} {:6.2} {:6.2}", r[0], r[1], r[2]);
    }
    Ok(())
}
