//! Non-subspace angular spectra: delay-and-sum (classical beamformer) and
//! Capon minimum variance.

use crate::array::ArrayGeometry;
use crate::covariance::HermitianCovariance;
use crate::error::{Error, Result};
use crate::{C64, CMatrix};

/// Default pseudospectrum grid step: fine enough to resolve one-degree
/// estimation targets.
pub const DEFAULT_GRID_STEP_DEG: f64 = 0.1;

/// Power scale carried by a [`SpectrumTrace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    /// Decibels relative to the trace maximum (peak at 0 dB).
    DbNormalized,
}

/// A sampled angular spectrum: strictly increasing angle grid with matching
/// power values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    angles_deg: Vec<f64>,
    powers: Vec<f64>,
    scale: Scale,
    estimator_name: String,
}

impl SpectrumTrace {
    pub fn new(
        angles_deg: Vec<f64>,
        powers: Vec<f64>,
        scale: Scale,
        estimator_name: impl Into<String>,
    ) -> Result<Self> {
        if angles_deg.is_empty() {
            return Err(Error::Domain("spectrum grid must be non-empty".into()));
        }
        if angles_deg.len() != powers.len() {
            return Err(Error::Dimension(format!(
                "{} angles vs {} powers",
                angles_deg.len(),
                powers.len()
            )));
        }
        if angles_deg.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("spectrum angles must all be finite".into()));
        }
        for w in angles_deg.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain(
                    "spectrum angles must be strictly increasing".into(),
                ));
            }
        }
        if angles_deg[0] < -90.0 || *angles_deg.last().unwrap() > 90.0 {
            return Err(Error::Domain(
                "spectrum angles must lie within [-90, 90] degrees".into(),
            ));
        }
        if powers.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("spectrum powers must all be finite".into()));
        }
        if scale == Scale::DbNormalized {
            let max = powers.iter().cloned().fold(f64::MIN, f64::max);
            if (max - 0.0).abs() > 1e-9 {
                return Err(Error::Domain(format!(
                    "normalized-dB trace must peak at 0 dB, max is {max}"
                )));
            }
        }
        Ok(Self {
            angles_deg,
            powers,
            scale,
            estimator_name: estimator_name.into(),
        })
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn estimator_name(&self) -> &str {
        &self.estimator_name
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    /// The trace in dB relative to its maximum, floored at -300 dB.
    pub fn to_db_normalized(&self) -> SpectrumTrace {
        let powers = self.powers_db();
        SpectrumTrace {
            angles_deg: self.angles_deg.clone(),
            powers,
            scale: Scale::DbNormalized,
            estimator_name: self.estimator_name.clone(),
        }
    }

    /// Power values in dB relative to the trace maximum.
    pub fn powers_db(&self) -> Vec<f64> {
        match self.scale {
            Scale::DbNormalized => self.powers.clone(),
            Scale::Linear => {
                let max = self.powers.iter().cloned().fold(f64::MIN, f64::max);
                self.powers
                    .iter()
                    .map(|&p| {
                        if max <= 0.0 {
                            0.0
                        } else {
                            (10.0 * (p / max).log10()).max(-300.0)
                        }
                    })
                    .collect()
            }
        }
    }

    /// Width of the -3 dB mainlobe around the local maximum nearest
    /// `near_deg`. Returns `None` when no local maximum lies within 5° of
    /// `near_deg` or a crossing runs off the grid.
    pub fn mainlobe_width_deg(&self, near_deg: f64) -> Option<f64> {
        let db = self.powers_db();
        let n = db.len();
        let mut peak: Option<usize> = None;
        for i in 1..n.saturating_sub(1) {
            if db[i] > db[i - 1] && db[i] > db[i + 1] {
                let dist = (self.angles_deg[i] - near_deg).abs();
                if dist <= 5.0
                    && peak.is_none_or(|p| dist < (self.angles_deg[p] - near_deg).abs())
                {
                    peak = Some(i);
                }
            }
        }
        let peak = peak?;
        let threshold = db[peak] - 3.0;

        let left = {
            let mut i = peak;
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                if db[i] <= threshold {
                    break interpolate_crossing(
                        self.angles_deg[i],
                        db[i],
                        self.angles_deg[i + 1],
                        db[i + 1],
                        threshold,
                    );
                }
            }
        };
        let right = {
            let mut i = peak;
            loop {
                if i + 1 >= n {
                    return None;
                }
                i += 1;
                if db[i] <= threshold {
                    break interpolate_crossing(
                        self.angles_deg[i - 1],
                        db[i - 1],
                        self.angles_deg[i],
                        db[i],
                        threshold,
                    );
                }
            }
        };
        Some(right - left)
    }
}

fn interpolate_crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if (y1 - y0).abs() < f64::EPSILON {
        return x1;
    }
    x0 + (level - y0) / (y1 - y0) * (x1 - x0)
}

/// Uniform angle grid over [-90°, 90°] with the given step.
pub fn angle_grid(step_deg: f64) -> Vec<f64> {
    let n = (180.0 / step_deg + 1e-9).floor() as usize;
    (0..=n).map(|i| -90.0 + i as f64 * step_deg).collect()
}

/// Default Capon diagonal loading: `1e-6 · trace(R)/M`.
pub fn default_loading(r: &HermitianCovariance) -> f64 {
    1e-6 * r.trace() / r.dim() as f64
}

/// Classical beamformer output power `P(θ) = aᴴ(θ)·R·a(θ)` over the grid.
pub fn delay_and_sum_spectrum(
    r: &HermitianCovariance,
    geometry: &ArrayGeometry,
    grid: &[f64],
) -> Result<SpectrumTrace> {
    check_grid_and_dims(r, geometry, grid)?;
    let imag_budget = 1e-9 * r.trace().abs().max(f64::MIN_POSITIVE);
    let mut powers = Vec::with_capacity(grid.len());
    for &theta in grid {
        let a = geometry.steering_vector(theta)?.into_inner();
        let ra = r.matrix() * &a;
        let quad = a.dotc(&ra);
        if quad.im.abs() > imag_budget {
            return Err(Error::Estimation(format!(
                "quadratic form has imaginary residue {:.3e}",
                quad.im
            )));
        }
        powers.push(quad.re);
    }
    SpectrumTrace::new(grid.to_vec(), powers, Scale::Linear, "delay_sum")
}

/// Capon (minimum variance) spectrum `P(θ) = 1/(aᴴ(θ)·(R + δI)⁻¹·a(θ))`.
/// The Hermitian factorization is computed once and reused across the grid.
pub fn capon_spectrum(
    r: &HermitianCovariance,
    geometry: &ArrayGeometry,
    grid: &[f64],
    loading: f64,
) -> Result<SpectrumTrace> {
    check_grid_and_dims(r, geometry, grid)?;
    if !loading.is_finite() || loading < 0.0 {
        return Err(Error::Domain(format!(
            "diagonal loading must be a finite non-negative number, got {loading}"
        )));
    }
    let m = r.dim();
    let loaded = r.matrix() + CMatrix::identity(m, m) * C64::new(loading, 0.0);

    let condition = crate::linalg::hermitian_condition(&loaded);
    if condition > 1e12 {
        return Err(Error::Singular(format!(
            "loaded covariance condition {condition:.3e} exceeds 1e12; increase the loading δ (currently {loading:.3e})"
        )));
    }
    let chol = loaded.clone().cholesky().ok_or_else(|| {
        Error::Singular(format!(
            "Cholesky factorization failed; increase the loading δ (currently {loading:.3e})"
        ))
    })?;

    let mut powers = Vec::with_capacity(grid.len());
    for &theta in grid {
        let a = geometry.steering_vector(theta)?.into_inner();
        let solved = chol.solve(&a);
        let denom = a.dotc(&solved).re;
        if !denom.is_finite() || denom <= 0.0 {
            return Err(Error::Singular(format!(
                "Capon denominator {denom:.3e} is not positive; increase the loading δ"
            )));
        }
        powers.push(1.0 / denom);
    }
    SpectrumTrace::new(grid.to_vec(), powers, Scale::Linear, "capon")
}

fn check_grid_and_dims(
    r: &HermitianCovariance,
    geometry: &ArrayGeometry,
    grid: &[f64],
) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("angle grid must be non-empty".into()));
    }
    if r.dim() != geometry.num_elements() {
        return Err(Error::Dimension(format!(
            "covariance is {}x{} but geometry has {} elements",
            r.dim(),
            r.dim(),
            geometry.num_elements()
        )));
    }
    Ok(())
}
