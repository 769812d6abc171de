//! Build a two-source scenario in nonuniform noise and draw snapshots.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0])?;
    let sources = SourceConfig::uncorrelated(vec![33.0, 36.0], 1.0, 10)?;
    let scenario = ArrayScenario::new(geom, sources, noise)?.with_snr_db(10.0);

    println!("WNPR {:.1}, SNR {:.2} dB", scenario.noise.wnpr(), scenario.snr_db());
    let x = synthesize(&scenario, 42);
    println!("{} sensors x {} snapshots", x.num_sensors(), x.num_snapshots());
    let model = scenario.covariance();
    for m in 0..x.num_sensors() {
        println!("sensor {m}: sample power {:7.3}  model {:7.3}", x.scm()[(m, m)].re, model[(m, m)].re);
    }
    Ok(())
}
