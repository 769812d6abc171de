use rayon::prelude::*;

use crate::array::synthesize;
use crate::error::{DoaError, Result};
use crate::pipeline::{run_method, Method};

use super::config::{ExperimentConfig, SweepAxis};
use super::crb::numeric_crb;
use super::rmse::{error_stats, variance_db};

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub rmse_db: f64,
    pub mean_error_deg: f64,
    pub std_error_deg: f64,
    pub trials: usize,
    /// Trials where the estimator errored or a numerical safeguard fired.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub value: f64,
    pub truth_deg: Vec<f64>,
    /// Numeric bound per source in deg^2; `None` when the Fisher matrix is singular.
    pub crb_deg2: Option<Vec<f64>>,
    pub crb_db: Option<f64>,
    pub methods: Vec<MethodResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub axis: SweepAxis,
    pub points: Vec<PointResult>,
}

impl RmseReport {
    pub fn result(&self, point: usize, method: Method) -> Option<&MethodResult> {
        self.points.get(point)?.methods.iter().find(|m| m.method == method)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-trial seed derived from the base seed and the trial coordinates.
pub fn trial_seed(base_seed: u64, point: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ point as u64) ^ trial as u64)
}

struct Outcome {
    estimate: Vec<f64>,
    failed: bool,
}

/// Numeric bound for one scenario, averaged over sources.
pub fn crb_summary(scenario: &crate::array::ArrayScenario) -> (Option<Vec<f64>>, Option<f64>) {
    match numeric_crb(scenario) {
        Ok(v) => {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (Some(v), Some(variance_db(mean)))
        }
        Err(_) => (None, None),
    }
}

/// Runs every method on every trial of every sweep point. Each trial draws
/// one snapshot matrix shared by all methods. `jobs` bounds the worker count
/// (default: all cores); results do not depend on it.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<RmseReport> {
    cfg.validate()?;
    let scenarios = cfg
        .values
        .iter()
        .map(|&v| cfg.scenario_at(v))
        .collect::<Result<Vec<_>>>()?;
    let l = cfg.scenario.num_sources();
    let work: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let run_all = || -> Vec<Vec<Outcome>> {
        work.par_iter()
            .map(|&(p, t)| {
                let sc = &scenarios[p];
                let x = synthesize(sc, trial_seed(cfg.base_seed, p, t));
                cfg.methods
                    .iter()
                    .map(|&method| match run_method(method, &sc.geometry, &x, l, &cfg.pipeline) {
                        Ok(out) => Outcome {
                            estimate: out.doas_deg,
                            failed: out.flagged,
                        },
                        Err(_) => Outcome {
                            estimate: vec![0.0; l],
                            failed: true,
                        },
                    })
                    .collect()
            })
            .collect()
    };
    let outcomes = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| DoaError::config(format!("cannot start {j} workers: {e}")))?
            .install(run_all),
        None => run_all(),
    };

    let mut points = Vec::with_capacity(scenarios.len());
    for (p, sc) in scenarios.iter().enumerate() {
        let truth = sc.sources.doas_deg().to_vec();
        let rows = &outcomes[p * cfg.trials..(p + 1) * cfg.trials];
        let methods = cfg
            .methods
            .iter()
            .enumerate()
            .map(|(k, &method)| {
                let estimates: Vec<Vec<f64>> = rows.iter().map(|r| r[k].estimate.clone()).collect();
                let stats = error_stats(&estimates, &truth);
                MethodResult {
                    method,
                    rmse_db: stats.rmse_db,
                    mean_error_deg: stats.mean_error_deg,
                    std_error_deg: stats.std_error_deg,
                    trials: cfg.trials,
                    failures: rows.iter().filter(|r| r[k].failed).count(),
                }
            })
            .collect();
        let (crb_deg2, crb_db) = crb_summary(sc);
        points.push(PointResult {
            value: cfg.values[p],
            truth_deg: truth,
            crb_deg2,
            crb_db,
            methods,
        });
    }
    Ok(RmseReport { axis: cfg.axis, points })
}
