use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use doa_lab::array::UlaGeometry;
use doa_lab::bench::{self, ExperimentConfig, ScenarioFile};
use doa_lab::error::{DoaError, Result};
use doa_lab::io::read_snapshots;
use doa_lab::noise_cov::{estimate_noise_cov, ged_noise_subspace, q_asymptotic_variance, q_asymptotic_variance_gaussian};
use doa_lab::pipeline::{run_method, Method, PipelineConfig};

#[derive(Parser)]
#[command(name = "doa-lab", version, about = "DOA estimation in nonuniform sensor noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate directions from a snapshot file (CSV or binary).
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Number of sources.
        #[arg(long = "L")]
        num_sources: usize,
        /// proposed-forward, proposed-fba, root-music, root-music-raw.
        #[arg(long, default_value = "proposed-forward")]
        method: String,
        /// Run a single GLS pass with this index-set size instead of two passes plus selection.
        #[arg(long)]
        card: Option<usize>,
        #[arg(long = "q-iters", default_value_t = 5)]
        q_iters: usize,
        #[arg(long = "d-over-lambda", default_value_t = 0.5)]
        d_over_lambda: f64,
    },
    /// Run a Monte Carlo sweep and write rmse.csv and rmse.svg.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Skip the SVG plot.
        #[arg(long)]
        no_plot: bool,
    },
    /// Print the numeric CRB for a scenario or each point of its sweep.
    Crb {
        #[arg(long)]
        config: PathBuf,
    },
    /// Estimate per-sensor noise powers with their predicted variances.
    QEstimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "L")]
        num_sources: usize,
        #[arg(long = "q-iters", default_value_t = 5)]
        q_iters: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Estimate {
            input,
            num_sources,
            method,
            card,
            q_iters,
            d_over_lambda,
        } => {
            let x = read_snapshots(&input)?;
            let geom = UlaGeometry::new(x.num_sensors(), d_over_lambda).map_err(|e| DoaError::config(e.to_string()))?;
            let method: Method = method.parse()?;
            let cfg = PipelineConfig {
                q_iterations: q_iters,
                ..PipelineConfig::default()
            };
            let method = match (method, card) {
                (m, None) => m,
                (Method::ProposedForward, Some(c)) => Method::GlsForward { card: c },
                (Method::ProposedFba, Some(c)) => Method::GlsFba { card: c },
                (m, Some(_)) => return Err(DoaError::config(format!("--card does not apply to {m}"))),
            };
            if let Method::GlsForward { card } | Method::GlsFba { card } = method {
                if card <= num_sources || card > geom.num_sensors() {
                    return Err(DoaError::config(format!(
                        "--card must satisfy L < card <= M (L = {num_sources}, M = {})",
                        geom.num_sensors()
                    )));
                }
            }
            if num_sources == 0 || num_sources >= geom.num_sensors() {
                return Err(DoaError::config(format!("--L must satisfy 0 < L < M = {}", geom.num_sensors())));
            }
            let out = run_method(method, &geom, &x, num_sources, &cfg)?;
            if out.flagged {
                eprintln!("warning: a numerical safeguard was triggered");
            }
            for d in out.doas_deg {
                println!("{d:.6}");
            }
            Ok(())
        }
        Command::Sweep {
            config,
            out,
            trials,
            seed,
            jobs,
            no_plot,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if jobs == Some(0) {
                return Err(DoaError::config("--jobs must be at least 1"));
            }
            let report = bench::run_experiment(&cfg, jobs)?;
            let paths = bench::emit_report(&report, &out, !no_plot)?;
            print!("{}", bench::report_csv(&report)?);
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Crb { config } => {
            let file = ScenarioFile::load(&config)?;
            let base = file.scenario()?;
            println!("sweep_value,crb_deg2,crb_db");
            let points: Vec<(String, _)> = match &file.sweep {
                Some(_) => {
                    let cfg = ExperimentConfig::from_file(&file)?;
                    cfg.values
                        .iter()
                        .map(|&v| cfg.scenario_at(v).map(|s| (v.to_string(), s)))
                        .collect::<Result<_>>()?
                }
                None => vec![(String::new(), base)],
            };
            for (label, sc) in points {
                let (per_source, db) = bench::experiment::crb_summary(&sc);
                let per_source = per_source
                    .ok_or_else(|| DoaError::Numerical(format!("singular Fisher information at {label}")))?;
                let joined: Vec<String> = per_source.iter().map(|v| format!("{v:.6e}")).collect();
                println!("{label},{},{:.4}", joined.join(" "), db.unwrap_or(f64::NAN));
            }
            Ok(())
        }
        Command::QEstimate {
            input,
            num_sources,
            q_iters,
        } => {
            let x = read_snapshots(&input)?;
            if num_sources >= x.num_sensors() {
                return Err(DoaError::config(format!("--L must be below M = {}", x.num_sensors())));
            }
            let est = estimate_noise_cov(x.scm(), num_sources, q_iters)?;
            let basis = ged_noise_subspace(x.scm(), &est.q_hat, num_sources)?;
            let stated = q_asymptotic_variance(x.scm(), &basis, x.num_snapshots())?;
            let gaussian = q_asymptotic_variance_gaussian(x.scm(), &basis, x.num_snapshots())?;
            if est.clamped {
                eprintln!("warning: some noise powers were clamped to stay positive");
            }
            println!("sensor,q_hat,var_stated,var_gaussian");
            for (m, q) in est.q_hat.powers().iter().enumerate() {
                println!("{},{q:.6},{:.6e},{:.6e}", m + 1, stated[m], gaussian[m]);
            }
            Ok(())
        }
    }
}
