//! Write snapshots in both file formats and read them back.

use doa_lab::array::{synthesize, ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use doa_lab::io::{read_snapshots, write_snapshots_binary, write_snapshots_csv};

fn main() -> doa_lab::error::Result<()> {
    let geom = UlaGeometry::half_wavelength(6)?;
    let sc = ArrayScenario::new(
        geom,
        SourceConfig::uncorrelated(vec![-10.0, 25.0], 4.0, 64)?,
        DiagonalNoiseCovariance::uniform(6, 1.0)?,
    )?;
    let x = synthesize(&sc, 1);
    let dir = std::env::temp_dir();
    let csv = dir.join("doa-lab-snapshots.csv");
    let bin = dir.join("doa-lab-snapshots.bin");
    write_snapshots_csv(&csv, x.data())?;
    write_snapshots_binary(&bin, x.data())?;

    for path in [&csv, &bin] {
        let back = read_snapshots(path)?;
        let err = (back.data() - x.data()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let bytes = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
        println!("{}: {} x {}, {bytes} bytes, max error {err:.1e}", path.display(), back.num_sensors(), back.num_snapshots());
    }
    println!("try: doa-lab estimate --input {} --L 2 --method proposed-fba", bin.display());
    Ok(())
}
