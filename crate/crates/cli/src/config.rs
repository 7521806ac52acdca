//! Experiment configuration: a sectioned TOML document with one
//! `[scenario]` table, an optional `[enumeration]` table, and an ordered
//! list of `[[estimator]]` tables. Unknown keys are rejected; every
//! validation error names the offending field.

use doakit_core::{ArrayGeometry, ScenarioSpec, SourceSpec};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// TOML syntax or type error; the message carries line/column context.
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// A well-formed document violating an invariant; names the field.
    #[error("config validation error: {0}")]
    Validation(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation(msg.into())
}

/// Top-level experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of Monte-Carlo trials; trial `t` uses seed `base_seed + t`.
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub enumeration: EnumerationConfig,
    #[serde(rename = "estimator", default)]
    pub estimators: Vec<EstimatorConfig>,
}

fn default_trials() -> u32 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_elements: usize,
    pub spacing_wavelengths: f64,
    pub num_snapshots: usize,
    /// Per-source SNR in dB over per-element noise power; `inf` disables
    /// noise entirely.
    pub snr_db: f64,
    pub sources: Vec<SourceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub theta_deg: f64,
    #[serde(default = "default_power")]
    pub power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_group: Option<String>,
}

fn default_power() -> f64 {
    1.0
}

/// How the per-trial source count is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationMethod {
    Aic,
    Mdl,
    /// Bypass enumeration; `num_sources` supplies D.
    Fixed,
}

/// Covariance pre-processing selector shared by estimators and enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingKind {
    #[default]
    None,
    ForwardBackward,
    ForwardSpatial,
    ForwardBackwardSpatial,
}

impl SmoothingKind {
    pub fn is_spatial(self) -> bool {
        matches!(
            self,
            SmoothingKind::ForwardSpatial | SmoothingKind::ForwardBackwardSpatial
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerationConfig {
    #[serde(default = "default_enum_method")]
    pub method: EnumerationMethod,
    /// Required when `method = "fixed"`, rejected otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_sources: Option<usize>,
    /// Smoothing applied to the covariance whose eigenvalues feed the
    /// criterion; the penalty variant follows automatically.
    #[serde(default)]
    pub smoothing: SmoothingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subarray_len: Option<usize>,
}

fn default_enum_method() -> EnumerationMethod {
    EnumerationMethod::Mdl
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self {
            method: default_enum_method(),
            num_sources: None,
            smoothing: SmoothingKind::None,
            subarray_len: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    DelaySum,
    Capon,
    Music,
    RootMusic,
    Esprit,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::DelaySum => "delay_sum",
            EstimatorKind::Capon => "capon",
            EstimatorKind::Music => "music",
            EstimatorKind::RootMusic => "root_music",
            EstimatorKind::Esprit => "esprit",
        }
    }

    /// Spectrum-search estimators emit a trace for CSV export.
    pub fn emits_spectrum(self) -> bool {
        matches!(
            self,
            EstimatorKind::DelaySum | EstimatorKind::Capon | EstimatorKind::Music
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubarrayMode {
    MaxOverlap,
    SplitHalves,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Output key; defaults to the kind name. Must be unique.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Search-grid step for the spectrum estimators (default 0.1°).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step_deg: Option<f64>,
    /// Capon diagonal loading δ (default `1e-6·trace(R)/M`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loading: Option<f64>,
    /// ESPRIT subarray pairing (default max_overlap).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subarray: Option<SubarrayMode>,
    #[serde(default)]
    pub smoothing: SmoothingKind,
    /// Required by the spatial smoothing kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subarray_len: Option<usize>,
}

impl EstimatorConfig {
    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.kind.name().to_string())
    }
}

/// Parses and fully validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials < 1 {
            return Err(invalid("trials: must be >= 1"));
        }
        self.scenario.validate()?;
        self.enumeration
            .validate(self.scenario.num_elements)
            .map_err(|e| invalid(format!("enumeration.{e}")))?;

        if self.estimators.is_empty() {
            return Err(invalid("estimator: at least one [[estimator]] is required"));
        }
        let mut labels = std::collections::BTreeSet::new();
        for (i, est) in self.estimators.iter().enumerate() {
            est.validate(self.scenario.num_elements)
                .map_err(|e| invalid(format!("estimator[{i}].{e}")))?;
            if !labels.insert(est.label()) {
                return Err(invalid(format!(
                    "estimator[{i}].label: duplicate label {:?}",
                    est.label()
                )));
            }
        }
        Ok(())
    }

    /// Core geometry for the full array.
    pub fn geometry(&self) -> Result<ArrayGeometry, ConfigError> {
        ArrayGeometry::new(
            self.scenario.num_elements,
            self.scenario.spacing_wavelengths,
        )
        .map_err(|e| invalid(format!("scenario: {e}")))
    }

    /// Scenario for one trial.
    pub fn scenario_spec(&self, seed: u64) -> Result<ScenarioSpec, ConfigError> {
        let sources = self
            .scenario
            .sources
            .iter()
            .map(|s| SourceSpec {
                theta_deg: s.theta_deg,
                power: s.power,
                correlation_group: s.correlation_group.clone(),
            })
            .collect();
        ScenarioSpec::new(
            self.geometry()?,
            sources,
            self.scenario.num_snapshots,
            self.scenario.snr_db,
            seed,
        )
        .map_err(|e| invalid(format!("scenario: {e}")))
    }

    /// True source angles sorted ascending.
    pub fn truths(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.scenario.sources.iter().map(|s| s.theta_deg).collect();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t
    }
}

impl ScenarioConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.num_elements < 2 {
            return Err(invalid("scenario.num_elements: must be >= 2"));
        }
        if !self.spacing_wavelengths.is_finite() || self.spacing_wavelengths <= 0.0 {
            return Err(invalid(
                "scenario.spacing_wavelengths: must be a positive finite number",
            ));
        }
        if self.num_snapshots < 1 {
            return Err(invalid("scenario.num_snapshots: must be >= 1"));
        }
        if self.snr_db.is_nan() {
            return Err(invalid("scenario.snr_db: must not be NaN"));
        }
        if self.sources.is_empty() {
            return Err(invalid("scenario.sources: must be non-empty"));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if !(-90.0..=90.0).contains(&s.theta_deg) || s.theta_deg.is_nan() {
                return Err(invalid(format!(
                    "scenario.sources[{i}].theta_deg: must lie in [-90, 90]"
                )));
            }
            if !s.power.is_finite() || s.power <= 0.0 {
                return Err(invalid(format!(
                    "scenario.sources[{i}].power: must be positive and finite"
                )));
            }
        }
        Ok(())
    }
}

fn validate_smoothing_pair(
    smoothing: SmoothingKind,
    subarray_len: Option<usize>,
    num_elements: usize,
) -> Result<(), String> {
    match (smoothing.is_spatial(), subarray_len) {
        (true, None) => Err("subarray_len: required for spatial smoothing".into()),
        (false, Some(_)) => Err("subarray_len: only valid with spatial smoothing".into()),
        (true, Some(l)) if l < 2 || l > num_elements => Err(format!(
            "subarray_len: must lie in [2, {num_elements}], got {l}"
        )),
        _ => Ok(()),
    }
}

impl EnumerationConfig {
    fn validate(&self, num_elements: usize) -> Result<(), String> {
        match (self.method, self.num_sources) {
            (EnumerationMethod::Fixed, None) => {
                return Err("num_sources: required when method = \"fixed\"".into())
            }
            (EnumerationMethod::Fixed, Some(d)) if d < 1 || d >= num_elements => {
                return Err(format!(
                    "num_sources: must lie in [1, {}], got {d}",
                    num_elements - 1
                ))
            }
            (EnumerationMethod::Aic | EnumerationMethod::Mdl, Some(_)) => {
                return Err("num_sources: only valid when method = \"fixed\"".into())
            }
            _ => {}
        }
        validate_smoothing_pair(self.smoothing, self.subarray_len, num_elements)
    }
}

impl EstimatorConfig {
    fn validate(&self, num_elements: usize) -> Result<(), String> {
        if let Some(label) = &self.label {
            if label.is_empty() {
                return Err("label: must not be empty".into());
            }
        }
        if let Some(step) = self.grid_step_deg {
            if !self.kind.emits_spectrum() {
                return Err(format!(
                    "grid_step_deg: not applicable to kind {:?}",
                    self.kind.name()
                ));
            }
            if !step.is_finite() || step <= 0.0 || step > 180.0 {
                return Err(format!("grid_step_deg: must lie in (0, 180], got {step}"));
            }
        }
        if let Some(loading) = self.loading {
            if self.kind != EstimatorKind::Capon {
                return Err("loading: only applicable to kind \"capon\"".into());
            }
            if !loading.is_finite() || loading < 0.0 {
                return Err(format!("loading: must be finite and >= 0, got {loading}"));
            }
        }
        if self.subarray.is_some() && self.kind != EstimatorKind::Esprit {
            return Err("subarray: only applicable to kind \"esprit\"".into());
        }
        validate_smoothing_pair(self.smoothing, self.subarray_len, num_elements)
    }
}
