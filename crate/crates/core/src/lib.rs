//! Direction-of-arrival (DOA) estimation for uniform linear arrays.
//!
//! The crate covers the full desk-scale DOA pipeline:
//!
//! * [`array`] — ULA geometry, steering vectors, and manifold matrices.
//! * [`sim`] — synthetic snapshot generation for configurable source
//!   constellations, coherence structure, and noise level.
//! * [`covariance`] — spatial covariance estimation, forward/backward and
//!   spatial smoothing, and sorted Hermitian eigendecompositions.
//! * [`beamform`] — delay-and-sum and Capon (minimum variance) spectra.
//! * [`subspace`] — MUSIC, Root-MUSIC, TLS-ESPRIT, peak extraction, and
//!   signal-covariance recovery.
//! * [`enumeration`] — AIC/MDL source-count estimation from eigenvalue
//!   profiles.
//!
//! All angles on public interfaces are degrees from array broadside; element
//! spacing is expressed in carrier wavelengths (`d/λ`). Every operation is a
//! pure function of its inputs and safe to call concurrently.

pub mod array;
pub mod beamform;
pub mod covariance;
pub mod enumeration;
pub mod error;
mod linalg;
pub mod sim;
pub mod subspace;

pub use array::{ArrayGeometry, SteeringVector};
pub use beamform::{Scale, SpectrumTrace};
pub use covariance::{EigenSystem, HermitianCovariance, Smoothing};
pub use enumeration::{EnumerationResult, InfoCriterion, PenaltyVariant};
pub use error::{Error, Result};
pub use sim::{ScenarioSpec, SnapshotMatrix, SourceSpec};
pub use subspace::{DoaEstimates, EspritSubarrays, SubspaceSplit};

/// Complex sample type used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;

/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;
