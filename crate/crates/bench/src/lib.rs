//! Shared fixtures for the estimator benchmarks.

use doakit_core::covariance::{eigendecompose, sample_covariance};
use doakit_core::sim::{simulate, ScenarioSpec, SourceSpec};
use doakit_core::{ArrayGeometry, EigenSystem, HermitianCovariance, SnapshotMatrix};

/// Snapshots for a three-source scenario on an `m`-element half-wavelength
/// array.
pub fn snapshots(m: usize, num_snapshots: usize, snr_db: f64, seed: u64) -> SnapshotMatrix {
    let spec = ScenarioSpec::new(
        ArrayGeometry::new(m, 0.5).unwrap(),
        [-30.0, 0.0, 30.0]
            .iter()
            .map(|&t| SourceSpec::new(t, 1.0))
            .collect(),
        num_snapshots,
        snr_db,
        seed,
    )
    .unwrap();
    simulate(&spec).unwrap()
}

pub fn geometry(m: usize) -> ArrayGeometry {
    ArrayGeometry::new(m, 0.5).unwrap()
}

pub fn covariance_and_eigen(x: &SnapshotMatrix) -> (HermitianCovariance, EigenSystem) {
    let r = sample_covariance(x).unwrap();
    let eig = eigendecompose(&r).unwrap();
    (r, eig)
}
