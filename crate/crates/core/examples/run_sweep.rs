//! A small Monte Carlo sweep written to CSV and SVG.
//!
//! `cargo run --release --example run_sweep -- [out_dir]`

use doa_lab::bench::{emit_report, run_experiment, ExperimentConfig, ScenarioFile};

const CONFIG: &str = r#"
seed = 2024
[geometry]
M = 8
[sources]
doas_deg = [33.0, 36.0]
[noise]
mode = "nonuniform"
powers = [6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0]
[snapshots]
N = 10
[sweep]
axis = "snr_db"
values = [0, 10, 20]
[experiment]
methods = ["proposed-forward", "proposed-fba", "root-music"]
trials = 50
"#;

fn main() -> doa_lab::error::Result<()> {
    let out = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("doa-lab-sweep"));
    let cfg = ExperimentConfig::from_file(&ScenarioFile::parse(CONFIG)?)?;
    let report = run_experiment(&cfg, None)?;
    for p in &report.points {
        print!("SNR {:>4}:", p.value);
        for m in &p.methods {
            print!("  {} {:6.2}", m.method, m.rmse_db);
        }
        println!("  | crb {:6.2}", p.crb_db.unwrap_or(f64::NAN));
    }
    for path in emit_report(&report, &out, true)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
