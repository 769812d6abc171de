//! Monte Carlo harness: RMSE statistics, a numerical Cramér-Rao bound,
//! TOML experiment files, a seeded parallel runner and CSV/SVG reports.

pub mod config;
pub mod crb;
pub mod experiment;
pub mod report;
pub mod rmse;

pub use config::{ExperimentConfig, ScenarioFile, SweepAxis};
pub use crb::numeric_crb;
pub use experiment::{run_experiment, trial_seed, MethodResult, PointResult, RmseReport};
pub use report::{emit_report, report_csv, write_csv, write_plot};
pub use rmse::{error_stats, rmse_db};
