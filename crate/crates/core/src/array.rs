//! Uniform linear array signal model: geometry, sources, nonuniform sensor
//! noise, snapshot synthesis and sample statistics.
//!
//! The observation model is `x(t) = A(theta) s(t) + n(t)` with steering
//! vectors `a_m(theta) = exp(-j 2 pi (d/lambda) sin(theta) (m - 1))`, source
//! covariance `P` and diagonal noise covariance `Q`. Angles are in degrees at
//! the public boundary and in radians internally.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::linalg::{cis, cr, hermitian_eigen, hermitian_sqrt, CMat, CVec, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    num_sensors: usize,
    spacing_over_wavelength: f64,
}

impl UlaGeometry {
    pub fn new(num_sensors: usize, spacing_over_wavelength: f64) -> Result<Self> {
        if num_sensors < 2 {
            return Err(DoaError::domain(format!(
                "a ULA needs at least 2 sensors, got {num_sensors}"
            )));
        }
        if !(spacing_over_wavelength > 0.0 && spacing_over_wavelength <= 0.5) {
            return Err(DoaError::domain(format!(
                "d/lambda must lie in (0, 0.5], got {spacing_over_wavelength}"
            )));
        }
        Ok(Self {
            num_sensors,
            spacing_over_wavelength,
        })
    }

    /// Half-wavelength spacing.
    pub fn half_wavelength(num_sensors: usize) -> Result<Self> {
        Self::new(num_sensors, 0.5)
    }

    pub fn num_sensors(&self) -> usize {
        self.num_sensors
    }

    pub fn spacing_over_wavelength(&self) -> f64 {
        self.spacing_over_wavelength
    }

    /// Inter-sensor phase `beta = -2 pi (d/lambda) sin(theta)` for `theta` in radians.
    pub fn phase_step(&self, theta_rad: f64) -> f64 {
        -2.0 * std::f64::consts::PI * self.spacing_over_wavelength * theta_rad.sin()
    }

    /// Inverse of [`phase_step`](Self::phase_step). Returns the angle in
    /// radians and whether the argument had to be clamped into `[-1, 1]`.
    pub fn angle_from_phase(&self, beta: f64) -> (f64, bool) {
        let s = -beta / (2.0 * std::f64::consts::PI * self.spacing_over_wavelength);
        if s.abs() > 1.0 {
            (s.signum() * std::f64::consts::FRAC_PI_2, true)
        } else {
            (s.asin(), false)
        }
    }
}

fn check_angle(theta_deg: f64) -> Result<()> {
    if !theta_deg.is_finite() || theta_deg.abs() >= 90.0 {
        return Err(DoaError::domain(format!(
            "angle {theta_deg} deg outside (-90, 90)"
        )));
    }
    Ok(())
}

/// Steering vector for an angle in degrees.
pub fn steering_vector(geom: &UlaGeometry, theta_deg: f64) -> Result<CVec> {
    check_angle(theta_deg)?;
    Ok(steering_vector_rad(geom, theta_deg.to_radians()))
}

/// Unchecked steering vector for an angle in radians; endfire is allowed.
pub(crate) fn steering_vector_rad(geom: &UlaGeometry, theta_rad: f64) -> CVec {
    let beta = geom.phase_step(theta_rad);
    CVec::from_fn(geom.num_sensors, |m, _| cis(beta * m as f64))
}

/// Array manifold `A(theta)`, one steering vector per column.
pub fn steering_matrix(geom: &UlaGeometry, doas_deg: &[f64]) -> Result<CMat> {
    for (i, &a) in doas_deg.iter().enumerate() {
        check_angle(a)?;
        if doas_deg[..i].contains(&a) {
            return Err(DoaError::domain(format!("duplicate direction {a} deg")));
        }
    }
    Ok(steering_matrix_unchecked(geom, doas_deg))
}

/// Manifold without the distinctness check; used for candidate subsets that
/// may legitimately repeat an angle.
pub(crate) fn steering_matrix_unchecked(geom: &UlaGeometry, doas_deg: &[f64]) -> CMat {
    let mut a = CMat::zeros(geom.num_sensors, doas_deg.len());
    for (l, &t) in doas_deg.iter().enumerate() {
        a.set_column(l, &steering_vector_rad(geom, t.to_radians()));
    }
    a
}

/// Diagonal sensor-noise covariance `Q = diag(sigma_1^2 .. sigma_M^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalNoiseCovariance {
    powers: Vec<f64>,
}

impl DiagonalNoiseCovariance {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(DoaError::domain("noise covariance needs at least one sensor"));
        }
        if let Some((m, p)) = powers
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p > 0.0 && p.is_finite()))
        {
            return Err(DoaError::domain(format!(
                "noise power of sensor {m} must be positive, got {p}"
            )));
        }
        Ok(Self { powers })
    }

    pub fn uniform(num_sensors: usize, sigma2: f64) -> Result<Self> {
        Self::new(vec![sigma2; num_sensors])
    }

    pub fn identity(num_sensors: usize) -> Self {
        Self {
            powers: vec![1.0; num_sensors],
        }
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    /// Worst noise power ratio `max / min`.
    pub fn wnpr(&self) -> f64 {
        let max = self.powers.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.powers.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    pub fn is_uniform(&self) -> bool {
        self.powers.iter().all(|&p| p == self.powers[0])
    }

    pub fn sqrt(&self) -> Vec<f64> {
        self.powers.iter().map(|p| p.sqrt()).collect()
    }

    pub fn inv_sqrt(&self) -> Vec<f64> {
        self.powers.iter().map(|p| 1.0 / p.sqrt()).collect()
    }

    pub fn inv(&self) -> Vec<f64> {
        self.powers.iter().map(|p| 1.0 / p).collect()
    }

    pub fn to_matrix(&self) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(
            self.powers.len(),
            self.powers.iter().map(|&p| cr(p)),
        ))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            powers: self.powers.iter().map(|p| p * c).collect(),
        }
    }

    /// `Q + J Q J`: entry `m` becomes `sigma_m^2 + sigma_(M+1-m)^2`.
    pub fn mirrored_sum(&self) -> Self {
        let n = self.powers.len();
        Self {
            powers: (0..n)
                .map(|m| self.powers[m] + self.powers[n - 1 - m])
                .collect(),
        }
    }
}

/// Source directions, their covariance `P` and the number of snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    doas_deg: Vec<f64>,
    source_cov: CMat,
    num_snapshots: usize,
}

impl SourceConfig {
    pub fn new(doas_deg: Vec<f64>, source_cov: CMat, num_snapshots: usize) -> Result<Self> {
        let l = doas_deg.len();
        if l == 0 {
            return Err(DoaError::domain("at least one source is required"));
        }
        for (i, &a) in doas_deg.iter().enumerate() {
            check_angle(a)?;
            if doas_deg[..i].contains(&a) {
                return Err(DoaError::domain(format!("duplicate direction {a} deg")));
            }
        }
        if source_cov.shape() != (l, l) {
            return Err(DoaError::domain(format!(
                "source covariance must be {l}x{l}, got {:?}",
                source_cov.shape()
            )));
        }
        let herm_err = (&source_cov - source_cov.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale = source_cov.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        if herm_err > 1e-12 * scale {
            return Err(DoaError::domain("source covariance is not Hermitian"));
        }
        let min_eig = hermitian_eigen(&source_cov).values[0];
        if min_eig < -1e-10 * scale {
            return Err(DoaError::domain(format!(
                "source covariance is not positive semi-definite (min eigenvalue {min_eig:e})"
            )));
        }
        if num_snapshots == 0 {
            return Err(DoaError::domain("at least one snapshot is required"));
        }
        Ok(Self {
            doas_deg,
            source_cov,
            num_snapshots,
        })
    }

    /// Equal-power sources where `rho` couples the last two sources.
    ///
    /// For two sources this is `P = power * [[1, rho], [rho*, 1]]`; for three
    /// or more the first sources stay uncorrelated.
    pub fn correlated(doas_deg: Vec<f64>, power: f64, rho: C64, num_snapshots: usize) -> Result<Self> {
        let l = doas_deg.len();
        if rho.norm() > 1.0 + 1e-12 {
            return Err(DoaError::domain(format!("|rho| must not exceed 1, got {}", rho.norm())));
        }
        if !power.is_finite() || power <= 0.0 {
            return Err(DoaError::domain(format!("source power must be positive, got {power}")));
        }
        let mut p = CMat::identity(l, l) * cr(power);
        if l >= 2 {
            p[(l - 2, l - 1)] = rho * power;
            p[(l - 1, l - 2)] = rho.conj() * power;
        }
        Self::new(doas_deg, p, num_snapshots)
    }

    pub fn uncorrelated(doas_deg: Vec<f64>, power: f64, num_snapshots: usize) -> Result<Self> {
        Self::correlated(doas_deg, power, C64::new(0.0, 0.0), num_snapshots)
    }

    pub fn doas_deg(&self) -> &[f64] {
        &self.doas_deg
    }

    pub fn source_cov(&self) -> &CMat {
        &self.source_cov
    }

    pub fn num_snapshots(&self) -> usize {
        self.num_snapshots
    }

    pub fn num_sources(&self) -> usize {
        self.doas_deg.len()
    }

    /// Mean of the diagonal of `P`.
    pub fn mean_power(&self) -> f64 {
        let l = self.num_sources();
        (0..l).map(|i| self.source_cov[(i, i)].re).sum::<f64>() / l as f64
    }
}

/// Generative ground truth for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayScenario {
    pub geometry: UlaGeometry,
    pub sources: SourceConfig,
    pub noise: DiagonalNoiseCovariance,
}

impl ArrayScenario {
    pub fn new(geometry: UlaGeometry, sources: SourceConfig, noise: DiagonalNoiseCovariance) -> Result<Self> {
        let m = geometry.num_sensors();
        if noise.len() != m {
            return Err(DoaError::domain(format!(
                "noise covariance has {} entries for {m} sensors",
                noise.len()
            )));
        }
        if sources.num_sources() >= m {
            return Err(DoaError::domain(format!(
                "need fewer sources than sensors (L = {}, M = {m})",
                sources.num_sources()
            )));
        }
        Ok(Self {
            geometry,
            sources,
            noise,
        })
    }

    pub fn num_sensors(&self) -> usize {
        self.geometry.num_sensors()
    }

    pub fn num_sources(&self) -> usize {
        self.sources.num_sources()
    }

    pub fn steering_matrix(&self) -> CMat {
        steering_matrix_unchecked(&self.geometry, self.sources.doas_deg())
    }

    /// Exact covariance `R = A P A^H + Q`.
    pub fn covariance(&self) -> CMat {
        let a = self.steering_matrix();
        &a * self.sources.source_cov() * a.adjoint() + self.noise.to_matrix()
    }

    pub fn snr_db(&self) -> f64 {
        snr_of(self)
    }

    /// Rescales the source covariance so that [`snr_of`] returns `snr_db`.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let target = source_power_for_snr(&self.noise, snr_db);
        let scale = target / self.sources.mean_power();
        let mut out = self.clone();
        out.sources.source_cov = &self.sources.source_cov * cr(scale);
        out
    }

    pub fn with_snapshots(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(DoaError::domain("at least one snapshot is required"));
        }
        let mut out = self.clone();
        out.sources.num_snapshots = n;
        Ok(out)
    }

    pub fn with_doas(&self, doas_deg: Vec<f64>) -> Result<Self> {
        let sources = SourceConfig::new(
            doas_deg,
            self.sources.source_cov.clone(),
            self.sources.num_snapshots,
        )?;
        Self::new(self.geometry, sources, self.noise.clone())
    }
}

/// Signal-to-noise ratio in dB: `10 log10(sigma_s^2 / M * sum 1/sigma_m^2)`,
/// which reduces to `sigma_s^2 / sigma^2` for uniform noise. `sigma_s^2` is
/// the mean source power.
pub fn snr_of(scenario: &ArrayScenario) -> f64 {
    let m = scenario.num_sensors() as f64;
    let inv_sum: f64 = scenario.noise.powers().iter().map(|p| 1.0 / p).sum();
    10.0 * (scenario.sources.mean_power() / m * inv_sum).log10()
}

/// Common source power that yields `snr_db` for the given noise.
pub fn source_power_for_snr(noise: &DiagonalNoiseCovariance, snr_db: f64) -> f64 {
    let m = noise.len() as f64;
    let inv_sum: f64 = noise.powers().iter().map(|p| 1.0 / p).sum();
    10f64.powf(snr_db / 10.0) * m / inv_sum
}

/// Observation matrix `X` (M x N) with its sample covariance `R = X X^H / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: CMat,
    scm: CMat,
}

impl SnapshotMatrix {
    pub fn new(data: CMat) -> Result<Self> {
        if data.nrows() < 2 || data.ncols() == 0 {
            return Err(DoaError::domain(format!(
                "snapshot matrix must be at least 2 x 1, got {:?}",
                data.shape()
            )));
        }
        let n = data.ncols() as f64;
        let scm = &data * data.adjoint() * cr(1.0 / n);
        Ok(Self { data, scm })
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn scm(&self) -> &CMat {
        &self.scm
    }

    pub fn num_sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.data.ncols()
    }

    pub fn into_data(self) -> CMat {
        self.data
    }
}

/// `rows x cols` matrix of i.i.d. circular complex Gaussians with unit variance.
pub fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

/// Draws `X = A S + N` with `S ~ CN(0, P)` and `N ~ CN(0, Q)`; identical
/// seeds give bit-identical output.
pub fn synthesize(scenario: &ArrayScenario, seed: u64) -> SnapshotMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = scenario.num_sensors();
    let l = scenario.num_sources();
    let n = scenario.sources.num_snapshots();
    let p_half = hermitian_sqrt(scenario.sources.source_cov());
    let s = p_half * complex_gaussian(&mut rng, l, n);
    let sigma = scenario.noise.sqrt();
    let noise = complex_gaussian(&mut rng, m, n);
    let noise = CMat::from_fn(m, n, |r, c| noise[(r, c)] * sigma[r]);
    let x = scenario.steering_matrix() * s + noise;
    SnapshotMatrix::new(x).expect("scenario dimensions are validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, svd_descending};

    const WNPR20_Q: [f64; 8] = [6.0, 2.0, 0.5, 2.5, 3.0, 1.0, 5.5, 10.0];

    #[test]
    fn broadside_steering_is_all_ones() {
        let g = UlaGeometry::half_wavelength(4).unwrap();
        let a = steering_vector(&g, 0.0).unwrap();
        for z in a.iter() {
            assert!((z - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn thirty_degrees_quarter_turns() {
        let g = UlaGeometry::half_wavelength(4).unwrap();
        let a = steering_vector(&g, 30.0).unwrap();
        let want = [
            C64::new(1.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
        ];
        for (z, w) in a.iter().zip(want) {
            assert!((z - w).norm() < 1e-12);
        }
    }

    #[test]
    fn steering_matches_per_entry_exponential() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let a = steering_vector(&g, 7.0).unwrap();
        let step = -std::f64::consts::PI * 7f64.to_radians().sin();
        for (m, z) in a.iter().enumerate() {
            let phase = step * m as f64;
            let w = C64::new(phase.cos(), phase.sin());
            assert!((z - w).norm() < 1e-13);
            assert!((z.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_angle_is_rejected() {
        let g = UlaGeometry::half_wavelength(4).unwrap();
        assert!(matches!(steering_vector(&g, 90.0), Err(DoaError::Domain(_))));
        assert!(steering_vector(&g, -95.0).is_err());
    }

    #[test]
    fn geometry_invariants() {
        assert!(UlaGeometry::new(1, 0.5).is_err());
        assert!(UlaGeometry::new(4, 0.6).is_err());
        assert!(UlaGeometry::new(4, 0.0).is_err());
        assert!(UlaGeometry::new(4, 0.25).is_ok());
    }

    #[test]
    fn example_one_manifold_has_rank_two() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let a = steering_matrix(&g, &[-2.0, 7.0]).unwrap();
        assert_eq!(a.shape(), (8, 2));
        let s = svd_descending(&a, false).singular_values;
        assert!(s[1] > 1e-3 * s[0]);
    }

    #[test]
    fn duplicate_direction_is_rejected() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        assert!(steering_matrix(&g, &[10.0, 10.0]).is_err());
        let single = steering_matrix(&g, &[0.0]).unwrap();
        assert!(single.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn wnpr_of_reference_profile_is_twenty() {
        let q = DiagonalNoiseCovariance::new(WNPR20_Q.to_vec()).unwrap();
        assert_eq!(q.wnpr(), 20.0);
        assert!(!q.is_uniform());
    }

    #[test]
    fn nonpositive_noise_power_is_rejected() {
        assert!(DiagonalNoiseCovariance::new(vec![1.0, 0.0]).is_err());
        assert!(DiagonalNoiseCovariance::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn snr_examples() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let s = SourceConfig::uncorrelated(vec![10.0], 1.0, 4).unwrap();
        let sc = ArrayScenario::new(g, s.clone(), DiagonalNoiseCovariance::identity(8)).unwrap();
        assert!(snr_of(&sc).abs() < 1e-12);

        let s10 = SourceConfig::uncorrelated(vec![10.0], 10.0, 4).unwrap();
        let sc = ArrayScenario::new(g, s10, DiagonalNoiseCovariance::identity(8)).unwrap();
        assert!((snr_of(&sc) - 10.0).abs() < 1e-12);

        let q = DiagonalNoiseCovariance::new(WNPR20_Q.to_vec()).unwrap();
        let sc = ArrayScenario::new(g, s, q).unwrap();
        let direct = 10.0 * (WNPR20_Q.iter().map(|p| 1.0 / p).sum::<f64>() / 8.0).log10();
        assert!((snr_of(&sc) - direct).abs() < 1e-12);

        let sc20 = sc.with_snr_db(20.0);
        assert!((snr_of(&sc20) - 20.0).abs() < 1e-10);
    }

    #[test]
    fn rho_couples_last_two_sources() {
        let s = SourceConfig::correlated(vec![-10.0, 34.0, 38.0], 2.0, C64::new(0.95, 0.0), 10).unwrap();
        let p = s.source_cov();
        assert_eq!(p[(1, 2)], C64::new(1.9, 0.0));
        assert_eq!(p[(0, 1)], C64::new(0.0, 0.0));
        assert!(SourceConfig::correlated(vec![1.0, 2.0], 1.0, C64::new(1.5, 0.0), 10).is_err());
    }

    #[test]
    fn synthesis_is_deterministic() {
        let g = UlaGeometry::half_wavelength(8).unwrap();
        let q = DiagonalNoiseCovariance::new(WNPR20_Q.to_vec()).unwrap();
        let s = SourceConfig::uncorrelated(vec![33.0, 36.0], 1.0, 10).unwrap();
        let sc = ArrayScenario::new(g, s, q).unwrap();
        let a = synthesize(&sc, 42);
        let b = synthesize(&sc, 42);
        assert_eq!(a, b);
        assert_eq!(a.data().shape(), (8, 10));
        assert_ne!(a, synthesize(&sc, 43));
    }

    #[test]
    fn near_noiseless_scm_approaches_manifold_gram() {
        let g = UlaGeometry::half_wavelength(6).unwrap();
        let s = SourceConfig::uncorrelated(vec![-20.0, 15.0], 1.0, 10_000).unwrap();
        let q = DiagonalNoiseCovariance::uniform(6, 1e-9).unwrap();
        let sc = ArrayScenario::new(g, s, q).unwrap();
        let x = synthesize(&sc, 3);
        let a = sc.steering_matrix();
        let gram = &a * a.adjoint();
        let rel = frobenius(&(x.scm() - &gram)) / frobenius(&gram);
        assert!(rel < 0.05, "relative error {rel}");
    }

    #[test]
    fn scm_matches_definition() {
        let g = UlaGeometry::half_wavelength(4).unwrap();
        let s = SourceConfig::uncorrelated(vec![5.0], 1.0, 7).unwrap();
        let sc = ArrayScenario::new(g, s, DiagonalNoiseCovariance::identity(4)).unwrap();
        let x = synthesize(&sc, 1);
        let direct = x.data() * x.data().adjoint() / C64::new(7.0, 0.0);
        assert!(frobenius(&(x.scm() - direct)) < 1e-12);
        assert!(frobenius(&(x.scm() - x.scm().adjoint())) < 1e-14);
    }
}
