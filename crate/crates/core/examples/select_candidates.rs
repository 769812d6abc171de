//! Candidate selection: threshold, GLR pick, then subset search.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::select::{CbSpectrum, SelectionContext};

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let noise = DiagonalNoiseCovariance::new(vec![6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0])?;
    let sources = SourceConfig::uncorrelated(vec![-20.0, 15.0, 40.0], 1.0, 50)?;
    let scenario = ArrayScenario::new(geom, sources, noise.clone())?.with_snr_db(10.0);
    let x = synthesize(&scenario, 11);

    let pool = [-20.4, -5.0, 14.7, 15.6, 40.2, 62.0];
    for spectrum in [CbSpectrum::Classic, CbSpectrum::Whitened] {
        let ctx = SelectionContext::new(x.scm().clone(), noise.clone(), geom, 3)?.with_spectrum(spectrum);
        let trace = ctx.select(&pool)?;
        println!("{spectrum:?} spectrum");
        println!("  threshold {:.3}, survivors {:?}", trace.threshold_eta, trace.survivors);
        println!("  first pick {}, {} subsets scored", trace.first_doa, trace.evaluated_subsets);
        println!("  selected {:?}", trace.final_doas);
    }
    Ok(())
}
