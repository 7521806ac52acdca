//! Synthetic array snapshot generation.
//!
//! Source waveforms are circular complex Gaussian sequences so that the
//! analytic signal covariance is diagonal for independent sources. Sources
//! sharing a `correlation_group` label are exact scaled copies of one
//! waveform (correlation coefficient 1), the worst case for subspace
//! estimators. Noise is spatially white circular complex Gaussian.
//!
//! SNR is defined per source relative to per-element noise power: the noise
//! variance is `mean(source powers) · 10^(-snr_db/10)`. An infinite `snr_db`
//! is the sentinel for noise-free operation (`σ_n² = 0` exactly), which
//! exercises exact-rank code paths.

use crate::array::ArrayGeometry;
use crate::error::{Error, Result};
use crate::{C64, CMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

/// One narrowband far-field source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    /// Direction of arrival in degrees from broadside.
    pub theta_deg: f64,
    /// Linear-scale waveform power.
    pub power: f64,
    /// Sources sharing a label emit fully coherent copies of one waveform.
    pub correlation_group: Option<String>,
}

impl SourceSpec {
    pub fn new(theta_deg: f64, power: f64) -> Self {
        Self {
            theta_deg,
            power,
            correlation_group: None,
        }
    }

    pub fn coherent(theta_deg: f64, power: f64, group: &str) -> Self {
        Self {
            theta_deg,
            power,
            correlation_group: Some(group.to_string()),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.theta_deg) || self.theta_deg.is_nan() {
            return Err(Error::Domain(format!(
                "source angle must lie in [-90, 90] degrees, got {}",
                self.theta_deg
            )));
        }
        if !self.power.is_finite() || self.power <= 0.0 {
            return Err(Error::Domain(format!(
                "source power must be positive and finite, got {}",
                self.power
            )));
        }
        Ok(())
    }
}

/// Full description of one simulated data collection.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub geometry: ArrayGeometry,
    pub sources: Vec<SourceSpec>,
    pub num_snapshots: usize,
    /// Per-source SNR in dB relative to per-element noise power;
    /// `f64::INFINITY` selects exact zero noise.
    pub snr_db: f64,
    pub rng_seed: u64,
}

impl ScenarioSpec {
    pub fn new(
        geometry: ArrayGeometry,
        sources: Vec<SourceSpec>,
        num_snapshots: usize,
        snr_db: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            geometry,
            sources,
            num_snapshots,
            snr_db,
            rng_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::Domain("scenario requires at least one source".into()));
        }
        if self.num_snapshots == 0 {
            return Err(Error::Domain("num_snapshots must be >= 1".into()));
        }
        if self.snr_db.is_nan() {
            return Err(Error::Domain("snr_db must not be NaN".into()));
        }
        for s in &self.sources {
            s.validate()?;
        }
        Ok(())
    }

    /// Per-element noise variance implied by `snr_db`.
    pub fn noise_variance(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            return 0.0;
        }
        let mean_power =
            self.sources.iter().map(|s| s.power).sum::<f64>() / self.sources.len() as f64;
        mean_power * 10f64.powf(-self.snr_db / 10.0)
    }

    pub fn source_angles(&self) -> Vec<f64> {
        self.sources.iter().map(|s| s.theta_deg).collect()
    }
}

/// M×N complex baseband samples: rows are array elements, columns are time
/// snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    samples: CMatrix,
}

impl SnapshotMatrix {
    pub fn new(samples: CMatrix) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::Domain("snapshot matrix must be non-empty".into()));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &CMatrix {
        &self.samples
    }

    pub fn num_elements(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.samples.ncols()
    }
}

/// Generates `X = A·S + V` for the scenario. Deterministic given
/// `spec.rng_seed`; each call owns its random stream.
pub fn simulate(spec: &ScenarioSpec) -> Result<SnapshotMatrix> {
    spec.validate()?;
    let m = spec.geometry.num_elements();
    let n = spec.num_snapshots;
    let d = spec.sources.len();

    let a = spec.geometry.manifold_matrix(&spec.source_angles())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);

    // Waveform rows. Group base waveforms are drawn at first encounter and
    // reused (scaled) by later members, so draw order depends only on the
    // source list.
    let mut s = CMatrix::zeros(d, n);
    let mut group_base: HashMap<&str, Vec<C64>> = HashMap::new();
    for (k, src) in spec.sources.iter().enumerate() {
        let scale = src.power.sqrt();
        let base: Vec<C64> = match &src.correlation_group {
            Some(label) => group_base
                .entry(label.as_str())
                .or_insert_with(|| draw_unit_waveform(&mut rng, n))
                .clone(),
            None => draw_unit_waveform(&mut rng, n),
        };
        for (t, w) in base.iter().enumerate() {
            s[(k, t)] = w * scale;
        }
    }

    let mut x = a * s;

    let sigma2 = spec.noise_variance();
    if sigma2 > 0.0 {
        let std = (sigma2 / 2.0).sqrt();
        for i in 0..m {
            for t in 0..n {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                x[(i, t)] += C64::new(re * std, im * std);
            }
        }
    }

    SnapshotMatrix::new(x)
}

fn draw_unit_waveform(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect()
}

/// Analytic source covariance `E[s sᴴ]`: diagonal powers for independent
/// sources, rank-deficient `√(pᵢpⱼ)` blocks for shared correlation groups.
pub fn source_covariance(spec: &ScenarioSpec) -> CMatrix {
    let d = spec.sources.len();
    CMatrix::from_fn(d, d, |i, j| {
        let si = &spec.sources[i];
        let sj = &spec.sources[j];
        let coherent = i == j
            || matches!((&si.correlation_group, &sj.correlation_group),
                        (Some(a), Some(b)) if a == b);
        if coherent {
            C64::new((si.power * sj.power).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ula(m: usize) -> ArrayGeometry {
        ArrayGeometry::new(m, 0.5).unwrap()
    }

    #[test]
    fn noiseless_broadside_source_repeats_across_rows() {
        let spec = ScenarioSpec::new(
            ula(4),
            vec![SourceSpec::new(0.0, 1.0)],
            4,
            f64::INFINITY,
            7,
        )
        .unwrap();
        let x = simulate(&spec).unwrap();
        for t in 0..4 {
            let first = x.samples()[(0, t)];
            for i in 1..4 {
                assert!((x.samples()[(i, t)] - first).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn simulate_is_reproducible() {
        let spec = ScenarioSpec::new(
            ula(6),
            vec![
                SourceSpec::new(-30.0, 1.0),
                SourceSpec::new(0.0, 1.0),
                SourceSpec::new(30.0, 1.0),
            ],
            128,
            20.0,
            42,
        )
        .unwrap();
        let x1 = simulate(&spec).unwrap();
        let x2 = simulate(&spec).unwrap();
        assert_eq!(x1.samples(), x2.samples());

        let mut other = spec.clone();
        other.rng_seed = 43;
        let x3 = simulate(&other).unwrap();
        assert_ne!(x1.samples(), x3.samples());
    }

    #[test]
    fn source_covariance_independent_sources_is_diagonal() {
        let spec = ScenarioSpec::new(
            ula(4),
            vec![SourceSpec::new(-10.0, 1.0), SourceSpec::new(10.0, 1.0)],
            8,
            20.0,
            1,
        )
        .unwrap();
        let r = source_covariance(&spec);
        assert_eq!(r, CMatrix::identity(2, 2));
    }

    #[test]
    fn source_covariance_coherent_pair_is_all_ones() {
        let spec = ScenarioSpec::new(
            ula(4),
            vec![
                SourceSpec::coherent(-10.0, 1.0, "g"),
                SourceSpec::coherent(10.0, 1.0, "g"),
            ],
            8,
            20.0,
            1,
        )
        .unwrap();
        let r = source_covariance(&spec);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(r[(i, j)], C64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn source_covariance_mixed_powers() {
        let spec = ScenarioSpec::new(
            ula(4),
            vec![SourceSpec::new(-10.0, 1.0), SourceSpec::new(10.0, 4.0)],
            8,
            20.0,
            1,
        )
        .unwrap();
        let r = source_covariance(&spec);
        assert_eq!(r[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(r[(1, 1)], C64::new(4.0, 0.0));
        assert_eq!(r[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn coherent_sources_collapse_transmit_rank() {
        // A·R_ss·Aᴴ for one correlation group is rank one.
        let spec = ScenarioSpec::new(
            ula(6),
            vec![
                SourceSpec::coherent(-30.0, 1.0, "m"),
                SourceSpec::coherent(0.0, 1.0, "m"),
                SourceSpec::coherent(30.0, 1.0, "m"),
            ],
            8,
            f64::INFINITY,
            1,
        )
        .unwrap();
        let a = spec.geometry.manifold_matrix(&spec.source_angles()).unwrap();
        let r = &a * source_covariance(&spec) * a.adjoint();
        let sv = r.svd(false, false).singular_values;
        let rank = sv.iter().filter(|&&s| s > 1e-9 * sv[0]).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn noise_variance_follows_snr() {
        let spec = ScenarioSpec::new(
            ula(4),
            vec![SourceSpec::new(0.0, 1.0)],
            8,
            20.0,
            1,
        )
        .unwrap();
        assert_relative_eq!(spec.noise_variance(), 0.01, max_relative = 1e-12);

        let mut noiseless = spec.clone();
        noiseless.snr_db = f64::INFINITY;
        assert_eq!(noiseless.noise_variance(), 0.0);
    }

    #[test]
    fn validation_rejects_bad_scenarios() {
        assert!(ScenarioSpec::new(ula(4), vec![], 8, 20.0, 1).is_err());
        assert!(
            ScenarioSpec::new(ula(4), vec![SourceSpec::new(0.0, 1.0)], 0, 20.0, 1).is_err()
        );
        assert!(
            ScenarioSpec::new(ula(4), vec![SourceSpec::new(0.0, -1.0)], 8, 20.0, 1).is_err()
        );
        assert!(
            ScenarioSpec::new(ula(4), vec![SourceSpec::new(95.0, 1.0)], 8, 20.0, 1).is_err()
        );
    }
}
