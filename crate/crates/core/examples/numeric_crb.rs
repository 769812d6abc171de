//! Numeric Cramer-Rao bound across SNR and source separation.

use doa_lab::array::{ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::bench::numeric_crb;

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0])?;
    let base = ArrayScenario::new(geom, SourceConfig::uncorrelated(vec![33.0, 36.0], 1.0, 10)?, noise)?;

    for snr in [0.0, 10.0, 20.0] {
        let crb = numeric_crb(&base.with_snr_db(snr))?;
        println!("SNR {snr:>4} dB: bound std {:.3?} deg", crb.iter().map(|v| v.sqrt()).collect::<Vec<_>>());
    }
    for gap in [1.0, 3.0, 6.0, 12.0] {
        let sc = base.with_snr_db(10.0).with_doas(vec![33.0, 33.0 + gap])?;
        let crb = numeric_crb(&sc)?;
        println!("gap {gap:>4} deg: bound std {:.3?} deg", crb.iter().map(|v| v.sqrt()).collect::<Vec<_>>());
    }
    Ok(())
}
