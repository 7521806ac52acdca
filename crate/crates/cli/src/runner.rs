//! Experiment execution: Monte-Carlo trials over a shared snapshot stream,
//! per-trial records, summary statistics, and deterministic file output.
//!
//! Within a trial every estimator consumes the same snapshot matrix (its
//! SHA-256 is logged in the trial record), covariances are cached per
//! smoothing choice, and output writing is ordered by trial index, so
//! repeated runs of one configuration produce identical files. The only
//! non-reproducible values are the wall-clock `mean_runtime_ms` fields in
//! the summary.

use crate::config::{
    EnumerationMethod, EstimatorConfig, EstimatorKind, ExperimentConfig, SmoothingKind,
    SubarrayMode,
};
use doakit_core::beamform::{
    angle_grid, capon_spectrum, default_loading, delay_and_sum_spectrum, DEFAULT_GRID_STEP_DEG,
};
use doakit_core::covariance::{
    eigendecompose, forward_backward_average, sample_covariance, spatial_smoothing,
};
use doakit_core::enumeration::{enumerate_sources, InfoCriterion, PenaltyVariant};
use doakit_core::sim::simulate;
use doakit_core::subspace::{esprit_tls, find_peaks, music_spectrum, root_music, split_subspaces};
use doakit_core::{
    ArrayGeometry, DoaEstimates, EigenSystem, EspritSubarrays, HermitianCovariance, SnapshotMatrix,
    SpectrumTrace,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("estimation failed: {0}")]
    Estimation(String),
}

/// Everything one experiment produces before it is written to disk.
#[derive(Debug, Serialize)]
pub struct RunOutput {
    pub summary: SummaryReport,
    pub trials: Vec<TrialRecord>,
    /// First-trial spectrum traces of the spectrum-search estimators.
    #[serde(skip)]
    pub spectra: Vec<SpectrumExport>,
}

impl RunOutput {
    /// True when every estimator failed in every trial (CLI exit code 2).
    pub fn all_estimation_failed(&self) -> bool {
        self.trials.iter().all(|t| {
            t.estimates
                .values()
                .all(|outcome| outcome.error.is_some())
        })
    }
}

#[derive(Debug)]
pub struct SpectrumExport {
    pub label: String,
    pub trace: SpectrumTrace,
}

#[derive(Debug, Serialize)]
pub struct SummaryReport {
    pub config_echo: ExperimentConfig,
    pub per_estimator: BTreeMap<String, EstimatorSummary>,
    pub enumeration: EnumerationSummary,
}

#[derive(Debug, Serialize)]
pub struct EstimatorSummary {
    /// Per-source RMSE in degrees (sources ordered by ascending true angle);
    /// empty when the estimator never produced a matchable estimate set.
    pub rmse_deg: Vec<f64>,
    /// Fraction of trials with the correct source count and every matched
    /// error below 2°.
    pub detection_rate: f64,
    /// Wall-clock mean of the estimator-specific work per trial.
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct EnumerationSummary {
    pub method: String,
    pub correct_rate: f64,
}

#[derive(Debug, Serialize)]
pub struct TrialRecord {
    pub trial_index: u32,
    pub seed: u64,
    /// SHA-256 of the snapshot matrix shared by all estimators this trial.
    pub snapshot_sha256: String,
    pub enumeration: TrialEnumeration,
    pub estimates: BTreeMap<String, EstimatorOutcome>,
}

#[derive(Debug, Serialize)]
pub struct TrialEnumeration {
    pub method: String,
    pub num_sources: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion_values: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct EstimatorOutcome {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<DoaEstimates>,
    /// Signed errors (estimate − truth) after optimal matching, ordered by
    /// ascending true angle; absent when the count did not match.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors_deg: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One covariance pipeline shared by every estimator with the same
/// smoothing choice.
struct CovPipeline {
    covariance: HermitianCovariance,
    eigensystem: EigenSystem,
    geometry: ArrayGeometry,
}

fn build_pipeline(
    x: &SnapshotMatrix,
    geometry: &ArrayGeometry,
    smoothing: SmoothingKind,
    subarray_len: Option<usize>,
) -> Result<CovPipeline, doakit_core::Error> {
    let covariance = match smoothing {
        SmoothingKind::None => sample_covariance(x)?,
        SmoothingKind::ForwardBackward => forward_backward_average(&sample_covariance(x)?)?,
        SmoothingKind::ForwardSpatial => {
            spatial_smoothing(x, subarray_len.expect("validated subarray_len"))?
        }
        SmoothingKind::ForwardBackwardSpatial => forward_backward_average(&spatial_smoothing(
            x,
            subarray_len.expect("validated subarray_len"),
        )?)?,
    };
    let eigensystem = eigendecompose(&covariance)?;
    let geometry = if covariance.dim() == geometry.num_elements() {
        *geometry
    } else {
        geometry.subarray(covariance.dim())?
    };
    Ok(CovPipeline {
        covariance,
        eigensystem,
        geometry,
    })
}

fn penalty_variant_for(smoothing: SmoothingKind) -> PenaltyVariant {
    match smoothing {
        SmoothingKind::None => PenaltyVariant::Standard,
        SmoothingKind::ForwardSpatial => PenaltyVariant::ForwardOnly,
        SmoothingKind::ForwardBackward | SmoothingKind::ForwardBackwardSpatial => {
            PenaltyVariant::ForwardBackward
        }
    }
}

fn snapshot_hash(x: &SnapshotMatrix) -> String {
    let mut hasher = Sha256::new();
    hasher.update((x.num_elements() as u64).to_le_bytes());
    hasher.update((x.num_snapshots() as u64).to_le_bytes());
    for e in x.samples().iter() {
        hasher.update(e.re.to_le_bytes());
        hasher.update(e.im.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Minimum-total-absolute-error one-to-one assignment of estimates to
/// truths (both sorted ascending, equal lengths). Returns signed errors
/// ordered by truth index. Brute-force over permutations; estimate counts
/// here are tiny.
pub fn match_estimates(estimates: &[f64], truths: &[f64]) -> Option<Vec<f64>> {
    if estimates.len() != truths.len() || truths.is_empty() || truths.len() > 9 {
        return None;
    }
    let n = truths.len();
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    permute(&mut assignment, 0, &mut |perm| {
        let cost: f64 = perm
            .iter()
            .enumerate()
            .map(|(truth_idx, &est_idx)| (estimates[est_idx] - truths[truth_idx]).abs())
            .sum();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, perm.to_vec()));
        }
    });
    let (_, perm) = best?;
    Some(
        perm.iter()
            .enumerate()
            .map(|(truth_idx, &est_idx)| estimates[est_idx] - truths[truth_idx])
            .collect(),
    )
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

fn run_one_estimator(
    est: &EstimatorConfig,
    pipeline: &CovPipeline,
    num_sources: usize,
) -> Result<(DoaEstimates, Option<SpectrumTrace>), doakit_core::Error> {
    let grid_step = est.grid_step_deg.unwrap_or(DEFAULT_GRID_STEP_DEG);
    match est.kind {
        EstimatorKind::DelaySum => {
            let grid = angle_grid(grid_step);
            let trace =
                delay_and_sum_spectrum(&pipeline.covariance, &pipeline.geometry, &grid)?;
            let peaks = find_peaks(&trace, num_sources)?;
            Ok((peaks, Some(trace)))
        }
        EstimatorKind::Capon => {
            let grid = angle_grid(grid_step);
            let loading = est.loading.unwrap_or_else(|| default_loading(&pipeline.covariance));
            let trace = capon_spectrum(&pipeline.covariance, &pipeline.geometry, &grid, loading)?;
            let peaks = find_peaks(&trace, num_sources)?;
            Ok((peaks, Some(trace)))
        }
        EstimatorKind::Music => {
            let grid = angle_grid(grid_step);
            let split = split_subspaces(&pipeline.eigensystem, num_sources)?;
            let trace = music_spectrum(&split, &pipeline.geometry, &grid)?;
            let peaks = find_peaks(&trace, num_sources)?;
            Ok((peaks, Some(trace)))
        }
        EstimatorKind::RootMusic => {
            let split = split_subspaces(&pipeline.eigensystem, num_sources)?;
            Ok((root_music(&split, &pipeline.geometry)?, None))
        }
        EstimatorKind::Esprit => {
            let mode = match est.subarray.unwrap_or(SubarrayMode::MaxOverlap) {
                SubarrayMode::MaxOverlap => EspritSubarrays::MaxOverlap,
                SubarrayMode::SplitHalves => EspritSubarrays::SplitHalves,
            };
            Ok((
                esprit_tls(&pipeline.eigensystem, &pipeline.geometry, num_sources, mode)?,
                None,
            ))
        }
    }
}

/// Runs every trial of the experiment: simulate, estimate the covariance
/// per configured smoothing, enumerate (or fix) the source count, run each
/// estimator on the shared snapshots, and aggregate summary statistics.
/// Estimator failures are recorded in the trial record without aborting.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    let geometry = config.geometry()?;
    let truths = config.truths();
    let labels: Vec<String> = config.estimators.iter().map(|e| e.label()).collect();

    let mut trials = Vec::with_capacity(config.trials as usize);
    let mut spectra: Vec<SpectrumExport> = Vec::new();
    let mut runtime_ms: BTreeMap<String, f64> = BTreeMap::new();
    let mut sq_err: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut err_trials: BTreeMap<String, usize> = BTreeMap::new();
    let mut detections: BTreeMap<String, usize> = BTreeMap::new();
    let mut enum_correct = 0usize;

    for trial_index in 0..config.trials {
        let seed = config.base_seed + trial_index as u64;
        let spec = config.scenario_spec(seed)?;
        let x = simulate(&spec)
            .map_err(|e| RunError::Estimation(format!("trial {trial_index}: {e}")))?;
        let hash = snapshot_hash(&x);

        // Covariance pipelines, one per distinct smoothing choice.
        let mut pipelines: BTreeMap<(SmoothingKind, Option<usize>), CovPipeline> = BTreeMap::new();
        let mut pipeline_keys: Vec<(SmoothingKind, Option<usize>)> = config
            .estimators
            .iter()
            .map(|e| (e.smoothing, e.subarray_len))
            .collect();
        pipeline_keys.push((config.enumeration.smoothing, config.enumeration.subarray_len));
        let mut pipeline_errors: BTreeMap<(SmoothingKind, Option<usize>), String> =
            BTreeMap::new();
        for key in pipeline_keys {
            if pipelines.contains_key(&key) || pipeline_errors.contains_key(&key) {
                continue;
            }
            match build_pipeline(&x, &geometry, key.0, key.1) {
                Ok(p) => {
                    pipelines.insert(key, p);
                }
                Err(e) => {
                    pipeline_errors.insert(key, e.to_string());
                }
            }
        }

        // Source count for this trial.
        let enum_key = (config.enumeration.smoothing, config.enumeration.subarray_len);
        let enumeration = match config.enumeration.method {
            EnumerationMethod::Fixed => TrialEnumeration {
                method: "fixed".into(),
                num_sources: config.enumeration.num_sources.expect("validated"),
                penalty_variant: None,
                criterion_values: None,
            },
            method @ (EnumerationMethod::Aic | EnumerationMethod::Mdl) => {
                let pipeline = pipelines.get(&enum_key).ok_or_else(|| {
                    RunError::Estimation(format!(
                        "trial {trial_index}: enumeration covariance failed: {}",
                        pipeline_errors.get(&enum_key).cloned().unwrap_or_default()
                    ))
                })?;
                let criterion = match method {
                    EnumerationMethod::Aic => InfoCriterion::Aic,
                    _ => InfoCriterion::Mdl,
                };
                let variant = penalty_variant_for(config.enumeration.smoothing);
                let result = enumerate_sources(
                    criterion,
                    variant,
                    pipeline.eigensystem.eigenvalues(),
                    pipeline.covariance.num_snapshots_used(),
                )
                .map_err(|e| RunError::Estimation(format!("trial {trial_index}: {e}")))?;
                TrialEnumeration {
                    method: match criterion {
                        InfoCriterion::Aic => "aic".into(),
                        InfoCriterion::Mdl => "mdl".into(),
                    },
                    num_sources: result.num_sources,
                    penalty_variant: Some(
                        match variant {
                            PenaltyVariant::Standard => "standard",
                            PenaltyVariant::ForwardOnly => "forward_only",
                            PenaltyVariant::ForwardBackward => "forward_backward",
                        }
                        .into(),
                    ),
                    criterion_values: Some(result.criterion_values.clone()),
                }
            }
        };
        let num_sources = enumeration.num_sources;
        let enum_is_correct = num_sources == truths.len();
        if enum_is_correct {
            enum_correct += 1;
        }

        // Estimators, in declaration order, all on the same snapshots.
        let mut outcomes: BTreeMap<String, EstimatorOutcome> = BTreeMap::new();
        for (est, label) in config.estimators.iter().zip(&labels) {
            let key = (est.smoothing, est.subarray_len);
            let started = Instant::now();
            let result = match pipelines.get(&key) {
                Some(pipeline) => {
                    if num_sources == 0 {
                        Err(doakit_core::Error::Estimation(
                            "enumeration selected zero sources".into(),
                        ))
                    } else {
                        run_one_estimator(est, pipeline, num_sources)
                    }
                }
                None => Err(doakit_core::Error::Estimation(
                    pipeline_errors.get(&key).cloned().unwrap_or_default(),
                )),
            };
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            *runtime_ms.entry(label.clone()).or_insert(0.0) += elapsed_ms;

            let outcome = match result {
                Ok((estimates, trace)) => {
                    if trial_index == 0 {
                        if let Some(trace) = trace {
                            spectra.push(SpectrumExport {
                                label: label.clone(),
                                trace,
                            });
                        }
                    }
                    let errors = match_estimates(&estimates.angles_deg, &truths);
                    if let Some(errors) = &errors {
                        let sq = sq_err
                            .entry(label.clone())
                            .or_insert_with(|| vec![0.0; truths.len()]);
                        for (s, e) in sq.iter_mut().zip(errors) {
                            *s += e * e;
                        }
                        *err_trials.entry(label.clone()).or_insert(0) += 1;
                        if enum_is_correct && errors.iter().all(|e| e.abs() < 2.0) {
                            *detections.entry(label.clone()).or_insert(0) += 1;
                        }
                    }
                    EstimatorOutcome {
                        estimates: Some(estimates),
                        errors_deg: errors,
                        error: None,
                    }
                }
                Err(e) => EstimatorOutcome {
                    estimates: None,
                    errors_deg: None,
                    error: Some(e.to_string()),
                },
            };
            outcomes.insert(label.clone(), outcome);
        }

        trials.push(TrialRecord {
            trial_index,
            seed,
            snapshot_sha256: hash,
            enumeration,
            estimates: outcomes,
        });
    }

    let total_trials = config.trials as f64;
    let per_estimator: BTreeMap<String, EstimatorSummary> = labels
        .iter()
        .map(|label| {
            let rmse_deg = match (sq_err.get(label), err_trials.get(label)) {
                (Some(sq), Some(&count)) if count > 0 => sq
                    .iter()
                    .map(|s| (s / count as f64).sqrt())
                    .collect(),
                _ => Vec::new(),
            };
            let summary = EstimatorSummary {
                rmse_deg,
                detection_rate: *detections.get(label).unwrap_or(&0) as f64 / total_trials,
                mean_runtime_ms: runtime_ms.get(label).unwrap_or(&0.0) / total_trials,
            };
            (label.clone(), summary)
        })
        .collect();

    let summary = SummaryReport {
        config_echo: config.clone(),
        per_estimator,
        enumeration: EnumerationSummary {
            method: match config.enumeration.method {
                EnumerationMethod::Aic => "aic".into(),
                EnumerationMethod::Mdl => "mdl".into(),
                EnumerationMethod::Fixed => "fixed".into(),
            },
            correct_rate: enum_correct as f64 / total_trials,
        },
    };

    Ok(RunOutput {
        summary,
        trials,
        spectra,
    })
}

/// Side-by-side estimator comparison over a shared seed sequence.
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

pub struct ComparisonRow {
    pub label: String,
    pub rmse_deg: Vec<f64>,
    pub detection_rate: f64,
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:<30} {:>14}", "estimator", "rmse_deg", "detection_rate")?;
        for row in &self.rows {
            let rmse = if row.rmse_deg.is_empty() {
                "-".to_string()
            } else {
                row.rmse_deg
                    .iter()
                    .map(|r| format!("{r:.4}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            writeln!(
                f,
                "{:<16} {:<30} {:>14.3}",
                row.label, rmse, row.detection_rate
            )?;
        }
        Ok(())
    }
}

/// Runs the experiment and tabulates RMSE and detection rate per estimator.
/// Requires at least two estimators.
pub fn compare_estimators(config: &ExperimentConfig) -> Result<(RunOutput, ComparisonTable), RunError> {
    if config.estimators.len() < 2 {
        return Err(RunError::Config(crate::config::ConfigError::Validation(
            "estimator: compare requires at least two estimators".into(),
        )));
    }
    let output = run_experiment(config)?;
    let rows = config
        .estimators
        .iter()
        .map(|e| {
            let label = e.label();
            let s = &output.summary.per_estimator[&label];
            ComparisonRow {
                label,
                rmse_deg: s.rmse_deg.clone(),
                detection_rate: s.detection_rate,
            }
        })
        .collect();
    Ok((output, ComparisonTable { rows }))
}

/// Fixed 9-significant-digit float formatting used by every CSV cell.
pub fn format_sig9(value: f64) -> String {
    format!("{value:.8e}")
}

/// Writes `summary.json`, `trials.jsonl`, and one `spectrum_<label>.csv`
/// per first-trial trace into `dir` (created if missing).
pub fn write_outputs(output: &RunOutput, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;

    let summary = serde_json::to_string_pretty(&output.summary).expect("summary serializes");
    std::fs::write(dir.join("summary.json"), summary + "\n")?;

    let mut jsonl = Vec::new();
    for trial in &output.trials {
        serde_json::to_writer(&mut jsonl, trial).expect("trial serializes");
        jsonl.push(b'\n');
    }
    std::fs::write(dir.join("trials.jsonl"), jsonl)?;

    for export in &output.spectra {
        write_spectrum_csv(export, dir)?;
    }
    Ok(())
}

/// Writes only the spectrum CSVs (the `spectrum` subcommand).
pub fn write_spectra(output: &RunOutput, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for export in &output.spectra {
        write_spectrum_csv(export, dir)?;
    }
    Ok(())
}

fn write_spectrum_csv(export: &SpectrumExport, dir: &Path) -> std::io::Result<()> {
    let path = dir.join(format!("spectrum_{}.csv", export.label));
    let mut buf = Vec::new();
    writeln!(buf, "angle_deg,power_linear,power_db")?;
    let db = export.trace.powers_db();
    for ((&angle, &linear), &decibel) in export
        .trace
        .angles_deg()
        .iter()
        .zip(export.trace.powers())
        .zip(&db)
    {
        writeln!(
            buf,
            "{},{},{}",
            format_sig9(angle),
            format_sig9(linear),
            format_sig9(decibel)
        )?;
    }
    std::fs::write(path, buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_minimizes_total_absolute_error() {
        // Sorted pairing would give |1-0| + |9-10| = 2; so does the optimal
        // one here, but a crossed case shows the difference.
        let errors = match_estimates(&[-29.0, 1.0, 29.0], &[-30.0, 0.0, 30.0]).unwrap();
        assert_eq!(errors, vec![1.0, 1.0, -1.0]);

        // Estimate set where the greedy nearest assignment would collide.
        let errors = match_estimates(&[0.4, 0.6], &[0.0, 1.0]).unwrap();
        assert!((errors[0] - 0.4).abs() < 1e-12);
        assert!((errors[1] + 0.4).abs() < 1e-12);
    }

    #[test]
    fn matching_agrees_with_exhaustive_check() {
        let estimates = [-10.2, 3.3, 17.9, 44.0];
        let truths = [-11.0, 4.0, 18.0, 45.0];
        let errors = match_estimates(&estimates, &truths).unwrap();
        let total: f64 = errors.iter().map(|e| e.abs()).sum();

        // Brute-force every assignment cost directly.
        let mut best = f64::INFINITY;
        let mut idx: Vec<usize> = (0..4).collect();
        permute(&mut idx, 0, &mut |perm| {
            let cost: f64 = perm
                .iter()
                .enumerate()
                .map(|(t, &e)| (estimates[e] - truths[t]).abs())
                .sum();
            best = best.min(cost);
        });
        assert!((total - best).abs() < 1e-12);
    }

    #[test]
    fn matching_requires_equal_lengths() {
        assert!(match_estimates(&[1.0], &[1.0, 2.0]).is_none());
        assert!(match_estimates(&[], &[]).is_none());
    }

    #[test]
    fn sig9_formatting_is_stable() {
        assert_eq!(format_sig9(0.5), "5.00000000e-1");
        assert_eq!(format_sig9(-90.0), "-9.00000000e1");
        assert_eq!(format_sig9(0.0), "0.00000000e0");
    }
}
