//! Scenario and experiment files (TOML).
//!
//! ```toml
//! seed = 7
//!
//! [geometry]
//! M = 8
//! d_over_lambda = 0.5
//!
//! [sources]
//! doas_deg = [33.0, 36.0]
//! rho = 0.0          # correlation of the last two sources
//! power = 1.0        # or snr_db = 10.0, not both
//!
//! [noise]
//! mode = "nonuniform"            # or "uniform" with sigma2 = 1.0
//! powers = [6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0]
//!
//! [snapshots]
//! N = 10
//!
//! [sweep]                        # optional for `crb`
//! axis = "snr_db"                # or "num_snapshots", "delta_theta_deg"
//! values = [0, 5, 10, 15, 20]
//!
//! [experiment]                   # optional
//! methods = ["proposed-forward", "root-music"]
//! trials = 200
//!
//! [pipeline]                     # optional estimator tuning
//! q_iterations = 5
//! gls_iterations = 5
//! spectrum = "classic"           # or "whitened"
//! grid_step_deg = 0.1
//! ```
//!
//! A `delta_theta_deg` sweep places the last source at the second-to-last
//! direction plus the swept offset.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::{ArrayScenario, DiagonalNoiseCovariance, SourceConfig, UlaGeometry};
use crate::error::{DoaError, Result};
use crate::linalg::C64;
use crate::pipeline::{Method, PipelineConfig};

pub const DEFAULT_TRIALS: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub geometry: GeometrySection,
    pub sources: SourcesSection,
    pub noise: NoiseSection,
    pub snapshots: SnapshotsSection,
    #[serde(default)]
    pub seed: u64,
    pub sweep: Option<SweepSection>,
    pub experiment: Option<ExperimentSection>,
    pub pipeline: Option<PipelineConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default = "half")]
    pub d_over_lambda: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesSection {
    pub doas_deg: Vec<f64>,
    #[serde(default)]
    pub rho: f64,
    pub power: Option<f64>,
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    Uniform,
    Nonuniform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub mode: NoiseMode,
    pub powers: Option<Vec<f64>>,
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotsSection {
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    NumSnapshots,
    DeltaThetaDeg,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "SNR (dB)",
            SweepAxis::NumSnapshots => "snapshots",
            SweepAxis::DeltaThetaDeg => "angular separation (deg)",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_methods() -> Vec<Method> {
    vec![Method::ProposedForward, Method::ProposedFba, Method::RootMusic]
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| DoaError::config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = crate::io::read_text(path)?;
        Self::parse(&text).map_err(|e| DoaError::config(format!("{}: {e}", path.display())))
    }

    /// The ground-truth scenario described by the file.
    pub fn scenario(&self) -> Result<ArrayScenario> {
        let cfg = |e: DoaError| DoaError::config(e.to_string());
        let m = self.geometry.m;
        let geom = UlaGeometry::new(m, self.geometry.d_over_lambda).map_err(cfg)?;
        let noise = match (self.noise.mode, &self.noise.powers, self.noise.sigma2) {
            (NoiseMode::Uniform, None, Some(s)) => DiagonalNoiseCovariance::uniform(m, s),
            (NoiseMode::Uniform, None, None) => Ok(DiagonalNoiseCovariance::identity(m)),
            (NoiseMode::Nonuniform, Some(p), None) => {
                if p.len() != m {
                    return Err(DoaError::config(format!("noise.powers has {} entries for M = {m}", p.len())));
                }
                DiagonalNoiseCovariance::new(p.clone())
            }
            (NoiseMode::Uniform, Some(_), _) => {
                return Err(DoaError::config("uniform noise takes sigma2, not powers"));
            }
            (NoiseMode::Nonuniform, _, _) => {
                return Err(DoaError::config("nonuniform noise needs powers (and no sigma2)"));
            }
        }
        .map_err(cfg)?;
        let power = match (self.sources.power, self.sources.snr_db) {
            (Some(_), Some(_)) => return Err(DoaError::config("give sources.power or sources.snr_db, not both")),
            (Some(p), None) => p,
            (None, Some(snr)) => crate::array::source_power_for_snr(&noise, snr),
            (None, None) => 1.0,
        };
        let sources = SourceConfig::correlated(
            self.sources.doas_deg.clone(),
            power,
            C64::new(self.sources.rho, 0.0),
            self.snapshots.n,
        )
        .map_err(cfg)?;
        ArrayScenario::new(geom, sources, noise).map_err(cfg)
    }
}

/// A validated Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: ArrayScenario,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub base_seed: u64,
    pub pipeline: PipelineConfig,
}

impl ExperimentConfig {
    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        let scenario = file.scenario()?;
        let sweep = file
            .sweep
            .as_ref()
            .ok_or_else(|| DoaError::config("a [sweep] section is required for experiments"))?;
        let exp = file.experiment.clone().unwrap_or(ExperimentSection {
            methods: default_methods(),
            trials: DEFAULT_TRIALS,
        });
        let cfg = Self {
            scenario,
            axis: sweep.axis,
            values: sweep.values.clone(),
            methods: exp.methods,
            trials: exp.trials,
            base_seed: file.seed,
            pipeline: file.pipeline.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(&ScenarioFile::load(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(DoaError::config("trials must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(DoaError::config("at least one method is required"));
        }
        for &v in &self.values {
            self.scenario_at(v)?;
        }
        let m = self.scenario.num_sensors();
        let l = self.scenario.num_sources();
        for method in &self.methods {
            if let Method::GlsForward { card } | Method::GlsFba { card } = method {
                if *card <= l || *card > m {
                    return Err(DoaError::config(format!("method {method}: need L < card <= M")));
                }
            }
        }
        Ok(())
    }

    /// Scenario at one sweep value.
    pub fn scenario_at(&self, value: f64) -> Result<ArrayScenario> {
        let cfg = |e: DoaError| DoaError::config(e.to_string());
        match self.axis {
            SweepAxis::SnrDb => {
                if !value.is_finite() {
                    return Err(DoaError::config(format!("bad SNR value {value}")));
                }
                Ok(self.scenario.with_snr_db(value))
            }
            SweepAxis::NumSnapshots => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(DoaError::config(format!("snapshot count must be a positive integer, got {value}")));
                }
                self.scenario.with_snapshots(value as usize).map_err(cfg)
            }
            SweepAxis::DeltaThetaDeg => {
                let mut doas = self.scenario.sources.doas_deg().to_vec();
                let l = doas.len();
                if l < 2 {
                    return Err(DoaError::config("an angular-separation sweep needs at least two sources"));
                }
                doas[l - 1] = doas[l - 2] + value;
                self.scenario.with_doas(doas).map_err(cfg)
            }
        }
    }
}
