//! Reduction of `2L` candidate directions to the final `L`.
//!
//! 1. Scan a beamformer spectrum over `[-90, 90]` and drop candidates whose
//!    response is not above the `(L+1)`-th highest peak.
//! 2. Pick the survivor with the largest whitened likelihood ratio.
//! 3. Complete it with the `L - 1` survivors minimizing the deterministic ML
//!    cost over all subsets.

use serde::{Deserialize, Serialize};

use crate::array::{steering_vector_rad, DiagonalNoiseCovariance, UlaGeometry};
use crate::error::{DoaError, Result};
use crate::linalg::{cr, scale_both, scale_rows, svd_descending, trace_re, CMat, CVec};

pub const DEFAULT_GRID_STEP_DEG: f64 = 0.1;

/// Spectrum used for the step-1 threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CbSpectrum {
    /// `a^H R a / M`.
    #[default]
    Classic,
    /// `a^H Q^-1 R Q^-1 a / (a^H Q^-1 a)`.
    Whitened,
}

#[derive(Debug, Clone)]
pub struct SelectionContext {
    pub scm: CMat,
    pub q_hat: DiagonalNoiseCovariance,
    pub geom: UlaGeometry,
    pub num_sources: usize,
    pub grid_step_deg: f64,
    pub spectrum: CbSpectrum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace {
    pub threshold_eta: f64,
    pub survivors: Vec<f64>,
    /// Step 1 kept fewer than `L` candidates, so all were passed on.
    pub fallback_all: bool,
    pub first_doa: f64,
    pub evaluated_subsets: usize,
    /// Some subset had a rank-deficient manifold and used the pseudo-inverse.
    pub pinv_used: bool,
    /// `L` angles, ascending.
    pub final_doas: Vec<f64>,
}

impl SelectionContext {
    pub fn new(scm: CMat, q_hat: DiagonalNoiseCovariance, geom: UlaGeometry, num_sources: usize) -> Result<Self> {
        let m = geom.num_sensors();
        if scm.shape() != (m, m) || q_hat.len() != m {
            return Err(DoaError::domain(format!("covariance and noise must be sized for {m} sensors")));
        }
        if num_sources == 0 || num_sources >= m {
            return Err(DoaError::domain(format!("need 0 < L < M (L = {num_sources}, M = {m})")));
        }
        Ok(Self {
            scm,
            q_hat,
            geom,
            num_sources,
            grid_step_deg: DEFAULT_GRID_STEP_DEG,
            spectrum: CbSpectrum::default(),
        })
    }

    pub fn with_spectrum(mut self, spectrum: CbSpectrum) -> Self {
        self.spectrum = spectrum;
        self
    }

    pub fn with_grid_step(mut self, step_deg: f64) -> Self {
        self.grid_step_deg = step_deg;
        self
    }

    fn steer(&self, theta_deg: f64) -> CVec {
        steering_vector_rad(&self.geom, theta_deg.to_radians())
    }

    fn whitened_ratio(&self, a: &CVec) -> f64 {
        let qa = CVec::from_iterator(a.len(), a.iter().zip(self.q_hat.inv()).map(|(z, w)| z * w));
        let num = (qa.adjoint() * &self.scm * &qa)[(0, 0)].re;
        let den = (a.adjoint() * &qa)[(0, 0)].re;
        num / den
    }

    /// Step-1 spectrum at one angle.
    pub fn cb_spectrum(&self, theta_deg: f64) -> f64 {
        let a = self.steer(theta_deg);
        match self.spectrum {
            CbSpectrum::Classic => (a.adjoint() * &self.scm * &a)[(0, 0)].re / a.len() as f64,
            CbSpectrum::Whitened => self.whitened_ratio(&a),
        }
    }

    /// Likelihood-ratio spectrum used to pick the first direction.
    pub fn glr(&self, theta_deg: f64) -> f64 {
        self.whitened_ratio(&self.steer(theta_deg))
    }

    /// Grid angles covering `[-90, 90]` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let n = (180.0 / self.grid_step_deg).round() as usize;
        (0..=n).map(|i| -90.0 + 180.0 * i as f64 / n as f64).collect()
    }

    /// Interior grid samples strictly greater than both neighbours, as
    /// `(angle, value)` sorted by value descending.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let grid = self.grid();
        let vals: Vec<f64> = grid.iter().map(|&t| self.cb_spectrum(t)).collect();
        let mut peaks: Vec<(f64, f64)> = (1..grid.len() - 1)
            .filter(|&i| vals[i] > vals[i - 1] && vals[i] > vals[i + 1])
            .map(|i| (grid[i], vals[i]))
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        peaks
    }

    /// Threshold at the `(L+1)`-th highest peak (the lowest peak when there
    /// are fewer) and the candidates strictly above it.
    pub fn step1_threshold(&self, candidates: &[f64]) -> (f64, Vec<f64>, bool) {
        let peaks = self.peaks();
        let eta = match peaks.get(self.num_sources).or(peaks.last()) {
            Some(p) => p.1,
            None => f64::INFINITY,
        };
        let survivors: Vec<f64> = candidates
            .iter()
            .cloned()
            .filter(|&c| self.cb_spectrum(c) > eta)
            .collect();
        if survivors.len() < self.num_sources {
            (eta, candidates.to_vec(), true)
        } else {
            (eta, survivors, false)
        }
    }

    /// Survivor maximizing the likelihood ratio (lowest index on ties) and
    /// the remaining survivors.
    pub fn step2_glr_pick(&self, survivors: &[f64]) -> Result<(f64, Vec<f64>)> {
        if survivors.is_empty() {
            return Err(DoaError::domain("no candidates to choose from"));
        }
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &c) in survivors.iter().enumerate() {
            let v = self.glr(c);
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        let mut rest = survivors.to_vec();
        let first = rest.remove(best);
        Ok((first, rest))
    }

    /// Cost `tr[(P - nu nu^H) R_w]` of completing `first` with `subset`,
    /// where `P` projects off the whitened subset manifold and `nu` is the
    /// normalized projection of the whitened first steering vector.
    /// Returns the cost and whether the pseudo-inverse path was needed.
    pub fn ml_cost(&self, first: f64, subset: &[f64]) -> (f64, bool) {
        let m = self.geom.num_sensors();
        let w = self.q_hat.inv_sqrt();
        let rw = scale_both(&self.scm, &w);
        let mut a = CMat::zeros(m, subset.len());
        for (j, &t) in subset.iter().enumerate() {
            a.set_column(j, &self.steer(t));
        }
        let at = scale_rows(&a, &w);
        let (proj, deficient) = orth_complement(&at);
        let a1 = scale_rows(&CMat::from_columns(&[self.steer(first)]), &w);
        let nu = &proj * a1;
        let norm = nu.norm();
        let mut cost = trace_re(&(&proj * &rw));
        if norm > 1e-12 * (m as f64).sqrt() {
            let nu = nu / cr(norm);
            cost -= (nu.adjoint() * &rw * &nu)[(0, 0)].re;
        }
        (cost, deficient)
    }

    /// Best `L - 1` completion of `first` out of `remainder` (lowest subset
    /// index on ties). Returns the final angles ascending, the number of
    /// subsets evaluated and whether any needed the pseudo-inverse.
    pub fn step3_ml_subsets(&self, first: f64, remainder: &[f64]) -> Result<(Vec<f64>, usize, bool)> {
        let need = self.num_sources - 1;
        if remainder.len() < need {
            return Err(DoaError::domain(format!(
                "need at least {need} remaining candidates, got {}",
                remainder.len()
            )));
        }
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut count = 0;
        let mut pinv_used = false;
        if need > 0 {
            for subset in Combinations::new(remainder.len(), need) {
                let angles: Vec<f64> = subset.iter().map(|&i| remainder[i]).collect();
                let (cost, deficient) = self.ml_cost(first, &angles);
                pinv_used |= deficient;
                count += 1;
                if best.as_ref().is_none_or(|b| cost < b.0) {
                    best = Some((cost, subset));
                }
            }
        }
        let mut out = vec![first];
        if let Some((_, idx)) = best {
            out.extend(idx.iter().map(|&i| remainder[i]));
        }
        out.sort_by(f64::total_cmp);
        Ok((out, count, pinv_used))
    }

    /// All three steps.
    pub fn select(&self, candidates: &[f64]) -> Result<SelectionTrace> {
        if candidates.len() < self.num_sources {
            return Err(DoaError::domain(format!(
                "need at least L = {} candidates, got {}",
                self.num_sources,
                candidates.len()
            )));
        }
        let (eta, survivors, fallback_all) = self.step1_threshold(candidates);
        let (first, rest) = self.step2_glr_pick(&survivors)?;
        let (final_doas, evaluated_subsets, pinv_used) = self.step3_ml_subsets(first, &rest)?;
        Ok(SelectionTrace {
            threshold_eta: eta,
            survivors,
            fallback_all,
            first_doa: first,
            evaluated_subsets,
            pinv_used,
            final_doas,
        })
    }
}

/// `I - A A^+` and whether `A` is numerically rank deficient.
fn orth_complement(a: &CMat) -> (CMat, bool) {
    let m = a.nrows();
    let k = a.ncols();
    if k == 0 {
        return (CMat::identity(m, m), false);
    }
    let svd = svd_descending(a, false);
    let s = &svd.singular_values;
    let tol = s[0] * (m.max(k) as f64) * f64::EPSILON * 1e3;
    let rank = s.iter().filter(|&&v| v > tol).count();
    let u = svd.u.columns(0, rank);
    let proj = CMat::identity(m, m) - u * u.adjoint();
    (proj, rank < k)
}

/// Lexicographic `k`-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{ArrayScenario, SourceConfig};

    const Q_SEC5: [f64; 8] = [6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0];

    fn ctx(doas: &[f64], power: f64, q: &[f64]) -> SelectionContext {
        let g = UlaGeometry::half_wavelength(q.len()).unwrap();
        let s = SourceConfig::uncorrelated(doas.to_vec(), power, 10).unwrap();
        let noise = DiagonalNoiseCovariance::new(q.to_vec()).unwrap();
        let sc = ArrayScenario::new(g, s, noise.clone()).unwrap();
        SelectionContext::new(sc.covariance(), noise, g, doas.len()).unwrap()
    }

    #[test]
    fn combinations_count_and_order() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn spectrum_peaks_at_single_source() {
        for kind in [CbSpectrum::Classic, CbSpectrum::Whitened] {
            let c = ctx(&[23.0], 100.0, &[1e-6; 8]).with_spectrum(kind);
            let peaks = c.peaks();
            assert!((peaks[0].0 - 23.0).abs() < 1e-9);
            assert!(c.grid().iter().all(|&t| c.cb_spectrum(t) >= 0.0));
        }
    }

    #[test]
    fn whitened_spectrum_with_unit_noise_is_classic() {
        let c = ctx(&[-10.0, 30.0], 2.0, &[1.0; 6]);
        let w = c.clone().with_spectrum(CbSpectrum::Whitened);
        for t in [-50.0, 0.0, 12.3, 30.0] {
            assert!((c.cb_spectrum(t) - w.cb_spectrum(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_is_inclusive() {
        let c = ctx(&[0.0], 1.0, &[1.0; 4]);
        let g = c.grid();
        assert_eq!(g.len(), 1801);
        assert_eq!(g[0], -90.0);
        assert_eq!(g[1800], 90.0);
    }

    #[test]
    fn on_source_candidates_all_survive() {
        let c = ctx(&[-20.0, 25.0], 1000.0, &Q_SEC5);
        let (_, surv, fallback) = c.step1_threshold(&[-20.0, 25.0, -20.0, 25.0]);
        assert_eq!(surv.len(), 4);
        assert!(!fallback);
    }

    #[test]
    fn flat_spectrum_falls_back() {
        let g = UlaGeometry::half_wavelength(6).unwrap();
        let c = SelectionContext::new(CMat::identity(6, 6), DiagonalNoiseCovariance::identity(6), g, 2).unwrap();
        let cands = [-10.0, 5.0, 20.0, 40.0];
        let (_, surv, fallback) = c.step1_threshold(&cands);
        assert!(fallback);
        assert_eq!(surv, cands.to_vec());
    }

    #[test]
    fn null_candidate_is_dropped() {
        let c = ctx(&[0.0, 40.0], 1000.0, &[1.0; 8]);
        // sin(theta) = 0.25 is the first null of broadside for M = 8.
        let null = 0.25f64.asin().to_degrees();
        let (_, surv, _) = c.step1_threshold(&[0.0, 40.0, null, 40.0]);
        assert!(!surv.contains(&null));
        assert_eq!(surv.len(), 3);
    }

    #[test]
    fn glr_picks_dominant() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let q = DiagonalNoiseCovariance::new(Q_SEC5.to_vec()).unwrap();
        let a = steering_vector_rad(&g, 17f64.to_radians());
        let r = &a * a.adjoint() * cr(500.0) + q.to_matrix();
        let c = SelectionContext::new(r, q, g, 2).unwrap();
        let (first, rest) = c.step2_glr_pick(&[-30.0, 17.0, 50.0]).unwrap();
        assert_eq!(first, 17.0);
        assert_eq!(rest, vec![-30.0, 50.0]);
    }

    #[test]
    fn glr_tie_keeps_twin() {
        let c = ctx(&[10.0], 50.0, &[1.0; 6]);
        let (first, rest) = c.step2_glr_pick(&[10.0, 10.0, -40.0]).unwrap();
        assert_eq!(first, 10.0);
        assert_eq!(rest, vec![10.0, -40.0]);
    }

    #[test]
    fn glr_is_scale_invariant() {
        let c = ctx(&[-5.0, 30.0], 3.0, &Q_SEC5);
        let mut scaled = c.clone();
        scaled.scm = &c.scm * cr(7.0);
        let cands = [-5.2, 29.0, 44.0, 0.0];
        assert_eq!(c.step2_glr_pick(&cands).unwrap().0, scaled.step2_glr_pick(&cands).unwrap().0);
    }

    #[test]
    fn single_source_skips_subsets() {
        let c = ctx(&[12.0], 10.0, &Q_SEC5);
        let t = c.select(&[12.0, -33.0]).unwrap();
        assert_eq!(t.final_doas, vec![12.0]);
        assert_eq!(t.evaluated_subsets, 0);
    }

    #[test]
    fn single_subset_is_returned() {
        let c = ctx(&[-10.0, 20.0], 10.0, &Q_SEC5);
        let (out, n, _) = c.step3_ml_subsets(20.0, &[55.0]).unwrap();
        assert_eq!(out, vec![20.0, 55.0]);
        assert_eq!(n, 1);
    }

    #[test]
    fn recovers_truth_among_junk() {
        let c = ctx(&[-10.0, 34.0, 40.0], 100.0, &Q_SEC5);
        let t = c.select(&[-10.0, 34.0, 40.0, 5.0, 50.0, -30.0]).unwrap();
        assert_eq!(t.final_doas, vec![-10.0, 34.0, 40.0]);
        assert_eq!(t.evaluated_subsets, t.survivors.len().saturating_sub(1) * t.survivors.len().saturating_sub(2) / 2);
    }

    #[test]
    fn true_subset_has_lowest_cost() {
        let c = ctx(&[-10.0, 20.0, 50.0], 10.0, &Q_SEC5);
        let truth = c.ml_cost(-10.0, &[20.0, 50.0]).0;
        let junk = c.ml_cost(-10.0, &[20.0, 57.0]).0;
        assert!(truth < junk);
        // Only whitened noise is left: trace of a rank M - L projector.
        assert!((truth - 5.0).abs() < 1e-8);
    }

    #[test]
    fn duplicate_subset_uses_pinv() {
        let c = ctx(&[-10.0, 20.0, 50.0], 10.0, &Q_SEC5);
        let (cost, deficient) = c.ml_cost(-10.0, &[20.0, 20.0]);
        assert!(deficient);
        assert!(cost.is_finite());
    }
}
