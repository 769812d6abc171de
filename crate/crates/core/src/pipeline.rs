//! End-to-end estimators: noise estimation, two GLS runs, selection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::array::{DiagonalNoiseCovariance, SnapshotMatrix, UlaGeometry};
use crate::baseline::root_music;
use crate::error::{DoaError, Result};
use crate::gls::{DoaCandidates, Flavor, GlsEstimator, GlsFlags, DEFAULT_GLS_ITERATIONS};
use crate::noise_cov::{estimate_noise_cov, NoiseCovEstimate, DEFAULT_ITERATIONS};
use crate::select::{CbSpectrum, SelectionContext, SelectionTrace, DEFAULT_GRID_STEP_DEG};

/// Estimator selectable from configs and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Noise estimate, forward GLS with `|I| = M-1` and `M`, selection.
    ProposedForward,
    /// As above with the forward-backward GLS.
    ProposedFba,
    /// Root-MUSIC whitened by the estimated noise powers.
    RootMusic,
    /// Root-MUSIC on the raw covariance.
    RootMusicRaw,
    /// A single forward GLS run with a fixed `|I|`, no selection.
    GlsForward { card: usize },
    /// A single forward-backward GLS run with a fixed `|I|`, no selection.
    GlsFba { card: usize },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::ProposedForward => write!(f, "proposed-forward"),
            Method::ProposedFba => write!(f, "proposed-fba"),
            Method::RootMusic => write!(f, "root-music"),
            Method::RootMusicRaw => write!(f, "root-music-raw"),
            Method::GlsForward { card } => write!(f, "gls-forward@{card}"),
            Method::GlsFba { card } => write!(f, "gls-fba@{card}"),
        }
    }
}

impl FromStr for Method {
    type Err = DoaError;

    fn from_str(s: &str) -> Result<Self> {
        let parse_card = |c: &str| {
            c.parse::<usize>()
                .map_err(|_| DoaError::config(format!("bad index-set size in method '{s}'")))
        };
        match s {
            "proposed-forward" => Ok(Method::ProposedForward),
            "proposed-fba" => Ok(Method::ProposedFba),
            "root-music" => Ok(Method::RootMusic),
            "root-music-raw" => Ok(Method::RootMusicRaw),
            _ => {
                if let Some(c) = s.strip_prefix("gls-forward@") {
                    Ok(Method::GlsForward { card: parse_card(c)? })
                } else if let Some(c) = s.strip_prefix("gls-fba@") {
                    Ok(Method::GlsFba { card: parse_card(c)? })
                } else {
                    Err(DoaError::config(format!(
                        "unknown method '{s}' (expected proposed-forward, proposed-fba, root-music, \
                         root-music-raw, gls-forward@<card> or gls-fba@<card>)"
                    )))
                }
            }
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Tuning shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub q_iterations: usize,
    pub gls_iterations: usize,
    pub spectrum: CbSpectrum,
    pub grid_step_deg: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            q_iterations: DEFAULT_ITERATIONS,
            gls_iterations: DEFAULT_GLS_ITERATIONS,
            spectrum: CbSpectrum::default(),
            grid_step_deg: DEFAULT_GRID_STEP_DEG,
        }
    }
}

/// Output of the full three-phase estimator.
#[derive(Debug, Clone)]
pub struct ProposedEstimate {
    pub doas_deg: Vec<f64>,
    pub noise: NoiseCovEstimate,
    pub candidates: Vec<DoaCandidates>,
    pub selection: SelectionTrace,
    pub flags: GlsFlags,
}

/// Output of any [`Method`].
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutput {
    /// Ascending.
    pub doas_deg: Vec<f64>,
    /// A numerical safeguard fired (clamped angle, ridge, pseudo-inverse,
    /// padded roots, clamped noise power).
    pub flagged: bool,
}

/// Runs the complete estimator for one flavor.
pub fn estimate_proposed(
    geom: &UlaGeometry,
    x: &SnapshotMatrix,
    num_sources: usize,
    flavor: Flavor,
    cfg: &PipelineConfig,
) -> Result<ProposedEstimate> {
    let m = geom.num_sensors();
    let noise = estimate_noise_cov(x.scm(), num_sources, cfg.q_iterations)?;
    let cards: Vec<usize> = [m - 1, m].into_iter().filter(|&c| c > num_sources).collect();
    let mut flags = GlsFlags::default();
    let mut candidates = Vec::with_capacity(cards.len());
    for card in cards {
        let est = GlsEstimator {
            flavor,
            card,
            iterations: cfg.gls_iterations,
        };
        let run = est.run(geom, x.data(), &noise.q_hat, num_sources)?;
        flags.ridge_applied |= run.flags.ridge_applied;
        flags.pinv_fallback |= run.flags.pinv_fallback;
        flags.angle_clamped |= run.flags.angle_clamped;
        flags.rank_deficient_subspace |= run.flags.rank_deficient_subspace;
        candidates.push(run.candidates);
    }
    let pool: Vec<f64> = candidates.iter().flat_map(|c| c.angles_deg.iter().cloned()).collect();
    let ctx = SelectionContext::new(x.scm().clone(), noise.q_hat.clone(), *geom, num_sources)?
        .with_spectrum(cfg.spectrum)
        .with_grid_step(cfg.grid_step_deg);
    let selection = ctx.select(&pool)?;
    Ok(ProposedEstimate {
        doas_deg: selection.final_doas.clone(),
        noise,
        candidates,
        selection,
        flags,
    })
}

fn numeric_flags(f: &GlsFlags) -> bool {
    f.ridge_applied || f.pinv_fallback || f.angle_clamped
}

/// Runs `method` on one snapshot matrix.
pub fn run_method(
    method: Method,
    geom: &UlaGeometry,
    x: &SnapshotMatrix,
    num_sources: usize,
    cfg: &PipelineConfig,
) -> Result<MethodOutput> {
    match method {
        Method::ProposedForward | Method::ProposedFba => {
            let flavor = if method == Method::ProposedFba { Flavor::Fba } else { Flavor::Forward };
            let est = estimate_proposed(geom, x, num_sources, flavor, cfg)?;
            Ok(MethodOutput {
                doas_deg: est.doas_deg,
                flagged: numeric_flags(&est.flags) || est.noise.clamped,
            })
        }
        Method::GlsForward { card } | Method::GlsFba { card } => {
            let flavor = if matches!(method, Method::GlsFba { .. }) { Flavor::Fba } else { Flavor::Forward };
            let noise = estimate_noise_cov(x.scm(), num_sources, cfg.q_iterations)?;
            let run = GlsEstimator {
                flavor,
                card,
                iterations: cfg.gls_iterations,
            }
            .run(geom, x.data(), &noise.q_hat, num_sources)?;
            Ok(MethodOutput {
                doas_deg: run.candidates.angles_deg,
                flagged: numeric_flags(&run.flags) || noise.clamped,
            })
        }
        Method::RootMusic => {
            let noise = estimate_noise_cov(x.scm(), num_sources, cfg.q_iterations)?;
            let est = root_music(x.scm(), Some(&noise.q_hat), num_sources, geom)?;
            Ok(MethodOutput {
                doas_deg: est.angles_deg,
                flagged: est.padded || est.clamped || noise.clamped,
            })
        }
        Method::RootMusicRaw => {
            let est = root_music(x.scm(), None, num_sources, geom)?;
            Ok(MethodOutput {
                doas_deg: est.angles_deg,
                flagged: est.padded || est.clamped,
            })
        }
    }
}

/// Noise estimate wrapped for callers that only need the powers.
pub fn estimate_noise_powers(x: &SnapshotMatrix, num_sources: usize, iterations: usize) -> Result<DiagonalNoiseCovariance> {
    Ok(estimate_noise_cov(x.scm(), num_sources, iterations)?.q_hat)
}
