//! Uniform linear array geometry, steering vectors, and manifold matrices.
//!
//! Angles are measured in degrees from array broadside and converted to
//! radians internally. Spacing is carried only as `d/λ`; the inter-element
//! phase `Φ = 2π·(d/λ)·sin θ` is the single quantity all downstream math
//! consumes, so absolute spacing, carrier frequency, and wavelength are never
//! stored. Delayed elements carry `exp(-j·m·Φ)`; simulators and estimators
//! share this one sign convention.

use crate::error::{Error, Result};
use crate::{C64, CMatrix, CVector};
use std::f64::consts::TAU;

/// Geometry of a uniform linear array: element count and normalized spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    num_elements: usize,
    spacing_wavelengths: f64,
}

impl ArrayGeometry {
    /// Creates a ULA description. Requires `num_elements >= 2` and a strictly
    /// positive spacing.
    pub fn new(num_elements: usize, spacing_wavelengths: f64) -> Result<Self> {
        if num_elements < 2 {
            return Err(Error::Domain(format!(
                "num_elements must be >= 2, got {num_elements}"
            )));
        }
        if !spacing_wavelengths.is_finite() || spacing_wavelengths <= 0.0 {
            return Err(Error::Domain(format!(
                "spacing_wavelengths must be a positive finite number, got {spacing_wavelengths}"
            )));
        }
        Ok(Self {
            num_elements,
            spacing_wavelengths,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_wavelengths
    }

    /// Geometry of a contiguous subarray with the same spacing. Used when an
    /// estimator consumes a spatially smoothed covariance of reduced size.
    pub fn subarray(&self, len: usize) -> Result<Self> {
        if len < 2 || len > self.num_elements {
            return Err(Error::Domain(format!(
                "subarray length must be in [2, {}], got {len}",
                self.num_elements
            )));
        }
        Self::new(len, self.spacing_wavelengths)
    }

    /// Inter-element phase shift `Φ = 2π·(d/λ)·sin θ` in radians for a wave
    /// from `theta_deg` off broadside.
    pub fn phase_shift(&self, theta_deg: f64) -> Result<f64> {
        check_angle(theta_deg)?;
        Ok(TAU * self.spacing_wavelengths * theta_deg.to_radians().sin())
    }

    /// Steering vector `[1, e^{-jΦ}, e^{-j2Φ}, …, e^{-j(M-1)Φ}]ᵀ`.
    pub fn steering_vector(&self, theta_deg: f64) -> Result<SteeringVector> {
        let phi = self.phase_shift(theta_deg)?;
        let entries = CVector::from_fn(self.num_elements, |m, _| {
            C64::from_polar(1.0, -(m as f64) * phi)
        });
        Ok(SteeringVector { entries })
    }

    /// Manifold matrix whose column `k` is the steering vector toward
    /// `thetas_deg[k]`. More sources than elements is allowed but logged,
    /// since no estimator can resolve that case.
    pub fn manifold_matrix(&self, thetas_deg: &[f64]) -> Result<CMatrix> {
        if thetas_deg.is_empty() {
            return Err(Error::Domain(
                "manifold matrix requires at least one angle".into(),
            ));
        }
        if thetas_deg.len() >= self.num_elements {
            log::warn!(
                "manifold has {} sources for {} elements; subspace estimators need D < M",
                thetas_deg.len(),
                self.num_elements
            );
        }
        let mut a = CMatrix::zeros(self.num_elements, thetas_deg.len());
        for (k, &theta) in thetas_deg.iter().enumerate() {
            let sv = self.steering_vector(theta)?;
            a.set_column(k, sv.entries());
        }
        Ok(a)
    }
}

fn check_angle(theta_deg: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&theta_deg) || theta_deg.is_nan() {
        return Err(Error::Domain(format!(
            "angle must lie in [-90, 90] degrees, got {theta_deg}"
        )));
    }
    Ok(())
}

/// Array response to a unit plane wave: unit-magnitude entries with first
/// entry exactly `1 + 0j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    entries: CVector,
}

impl SteeringVector {
    pub fn entries(&self) -> &CVector {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_inner(self) -> CVector {
        self.entries
    }
}
