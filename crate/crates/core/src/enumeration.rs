//! Source-count estimation from the covariance eigenvalue profile via the
//! AIC and MDL information criteria.
//!
//! Both criteria share the log-likelihood data term
//! `-N·(M-d)·log(g(d)/a(d))`, where `g` and `a` are the geometric and
//! arithmetic means of the `M-d` smallest eigenvalues; they differ in the
//! penalty attached to the `d(2M-d)` free parameters. Natural logarithms
//! throughout — the penalty and data term must share one base, so it is not
//! configurable. Smoothed covariances use the modified penalties selected by
//! [`PenaltyVariant`].

use crate::error::{Error, Result};
use serde::Serialize;

/// Information criterion selecting the source count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoCriterion {
    Aic,
    Mdl,
}

/// Penalty modification matching the smoothing applied to the covariance the
/// eigenvalues came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyVariant {
    Standard,
    ForwardOnly,
    ForwardBackward,
}

/// Outcome of a source-count search over `d ∈ {0, …, M-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationResult {
    pub method: InfoCriterion,
    pub penalty_variant: PenaltyVariant,
    /// Estimated source count: the argmin of `criterion_values`, smallest
    /// `d` on ties.
    pub num_sources: usize,
    /// Criterion value at each candidate `d`.
    pub criterion_values: Vec<f64>,
}

/// AIC with the standard penalty.
pub fn aic(eigenvalues: &[f64], num_snapshots: usize) -> Result<EnumerationResult> {
    enumerate_sources(
        InfoCriterion::Aic,
        PenaltyVariant::Standard,
        eigenvalues,
        num_snapshots,
    )
}

/// MDL with the standard penalty.
pub fn mdl(eigenvalues: &[f64], num_snapshots: usize) -> Result<EnumerationResult> {
    enumerate_sources(
        InfoCriterion::Mdl,
        PenaltyVariant::Standard,
        eigenvalues,
        num_snapshots,
    )
}

/// Evaluates the chosen criterion for every candidate source count and
/// returns the argmin. Requires eigenvalues sorted descending; values are
/// floored at 1e-30 before logarithms so noiseless zero eigenvalues stay
/// usable.
pub fn enumerate_sources(
    method: InfoCriterion,
    variant: PenaltyVariant,
    eigenvalues: &[f64],
    num_snapshots: usize,
) -> Result<EnumerationResult> {
    let m = eigenvalues.len();
    if m < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 eigenvalues, got {m}"
        )));
    }
    if num_snapshots == 0 {
        return Err(Error::Domain("num_snapshots must be >= 1".into()));
    }
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Domain("eigenvalues must be finite".into()));
    }
    if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Domain(
            "eigenvalues must be sorted in descending order".into(),
        ));
    }

    let floored: Vec<f64> = eigenvalues.iter().map(|&l| l.max(1e-30)).collect();
    let n = num_snapshots as f64;

    let mut criterion_values = Vec::with_capacity(m);
    let mut best = (0usize, f64::INFINITY);
    for d in 0..m {
        let tail = &floored[d..];
        let count = tail.len() as f64;
        let log_geometric = tail.iter().map(|l| l.ln()).sum::<f64>() / count;
        let arithmetic = tail.iter().sum::<f64>() / count;
        let data_term = n * count * (arithmetic.ln() - log_geometric);
        let value = data_term + penalty(method, variant, d, m, num_snapshots);
        criterion_values.push(value);
        if value < best.1 {
            best = (d, value);
        }
    }

    Ok(EnumerationResult {
        method,
        penalty_variant: variant,
        num_sources: best.0,
        criterion_values,
    })
}

/// Penalty term for `d` assumed sources with `m` sensors and `n` snapshots.
pub fn penalty(
    method: InfoCriterion,
    variant: PenaltyVariant,
    d: usize,
    m: usize,
    n: usize,
) -> f64 {
    let d = d as f64;
    let m = m as f64;
    let log_n = (n as f64).ln();
    match (method, variant) {
        (InfoCriterion::Aic, PenaltyVariant::Standard) => d * (2.0 * m - d),
        (InfoCriterion::Aic, PenaltyVariant::ForwardOnly) => d * (2.0 * m - 2.0 * d + 1.0),
        (InfoCriterion::Aic, PenaltyVariant::ForwardBackward) => {
            0.5 * d * (2.0 * m - 2.0 * d + 1.0)
        }
        (InfoCriterion::Mdl, PenaltyVariant::Standard) => 0.5 * d * (2.0 * m - d) * log_n,
        (InfoCriterion::Mdl, PenaltyVariant::ForwardOnly) => {
            0.5 * d * (2.0 * m - 2.0 * d + 1.0) * log_n
        }
        (InfoCriterion::Mdl, PenaltyVariant::ForwardBackward) => {
            0.25 * d * (2.0 * m - d + 1.0) * log_n
        }
    }
}
