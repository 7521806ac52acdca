//! Subspace DOA estimators: MUSIC (spectral), Root-MUSIC, TLS-ESPRIT, peak
//! extraction, and signal-covariance recovery from estimated angles.

use crate::array::ArrayGeometry;
use crate::beamform::{Scale, SpectrumTrace};
use crate::covariance::{EigenSystem, HermitianCovariance};
use crate::error::{Error, Result};
use crate::linalg;
use crate::{C64, CMatrix};
use serde::Serialize;
use std::f64::consts::TAU;

/// Signal/noise eigenvector split of a covariance eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSplit {
    signal_basis: CMatrix,
    noise_basis: CMatrix,
}

impl SubspaceSplit {
    /// Builds a split from explicit bases, checking that the stacked columns
    /// are jointly orthonormal and that `D < M`.
    pub fn new(signal_basis: CMatrix, noise_basis: CMatrix) -> Result<Self> {
        let m = signal_basis.nrows();
        let d = signal_basis.ncols();
        if noise_basis.nrows() != m || d + noise_basis.ncols() != m {
            return Err(Error::Dimension(format!(
                "bases must stack to a square matrix: {}x{} and {}x{}",
                m,
                d,
                noise_basis.nrows(),
                noise_basis.ncols()
            )));
        }
        if d == 0 || d >= m {
            return Err(Error::Domain(format!(
                "signal dimension must lie in (0, {m}), got {d}"
            )));
        }
        let mut stacked = CMatrix::zeros(m, m);
        stacked.view_mut((0, 0), (m, d)).copy_from(&signal_basis);
        stacked.view_mut((0, d), (m, m - d)).copy_from(&noise_basis);
        let gram = stacked.adjoint() * &stacked;
        if (gram - CMatrix::identity(m, m)).norm() > 1e-8 {
            return Err(Error::Domain(
                "basis columns are not jointly orthonormal".into(),
            ));
        }
        Ok(Self {
            signal_basis,
            noise_basis,
        })
    }

    /// First `num_sources` eigenvectors (M×D).
    pub fn signal_basis(&self) -> &CMatrix {
        &self.signal_basis
    }

    /// Remaining eigenvectors (M×(M−D)).
    pub fn noise_basis(&self) -> &CMatrix {
        &self.noise_basis
    }

    pub fn num_sources(&self) -> usize {
        self.signal_basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.signal_basis.nrows()
    }
}

/// Splits a sorted eigendecomposition into signal and noise bases. Requires
/// `0 < num_sources < M`.
pub fn split_subspaces(eig: &EigenSystem, num_sources: usize) -> Result<SubspaceSplit> {
    let m = eig.dim();
    if num_sources == 0 || num_sources >= m {
        return Err(Error::Domain(format!(
            "num_sources must lie in (0, {m}), got {num_sources}"
        )));
    }
    Ok(SubspaceSplit {
        signal_basis: eig.eigenvectors().columns(0, num_sources).into_owned(),
        noise_basis: eig
            .eigenvectors()
            .columns(num_sources, m - num_sources)
            .into_owned(),
    })
}

/// Angle estimates with per-estimate metadata (peak height for spectral
/// search, rotation-eigenvalue argument for the search-free estimators).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoaEstimates {
    pub estimator: String,
    pub angles_deg: Vec<f64>,
    pub auxiliary: Vec<f64>,
}

/// MUSIC pseudospectrum `P(θ) = 1/(aᴴ·Vn·Vnᴴ·a)` over the grid. The
/// denominator is floored at `1e-12·M` so noiseless peaks stay finite while
/// remaining far above any sidelobe.
pub fn music_spectrum(
    split: &SubspaceSplit,
    geometry: &ArrayGeometry,
    grid: &[f64],
) -> Result<SpectrumTrace> {
    if grid.is_empty() {
        return Err(Error::Domain("angle grid must be non-empty".into()));
    }
    if split.dim() != geometry.num_elements() {
        return Err(Error::Dimension(format!(
            "subspace dimension {} does not match {} array elements",
            split.dim(),
            geometry.num_elements()
        )));
    }
    let projector = split.noise_basis() * split.noise_basis().adjoint();
    let floor = 1e-12 * split.dim() as f64;
    let mut powers = Vec::with_capacity(grid.len());
    for &theta in grid {
        let a = geometry.steering_vector(theta)?.into_inner();
        let denom = a.dotc(&(&projector * &a)).re;
        powers.push(1.0 / denom.max(floor));
    }
    SpectrumTrace::new(grid.to_vec(), powers, Scale::Linear, "music")
}

/// Extracts the `num_peaks` tallest local maxima of a spectrum, refined by
/// three-point parabolic interpolation on the dB values, and returns them
/// sorted by angle. Plateaus count as one peak at their midpoint.
pub fn find_peaks(trace: &SpectrumTrace, num_peaks: usize) -> Result<DoaEstimates> {
    if num_peaks == 0 {
        return Err(Error::Domain("num_peaks must be >= 1".into()));
    }
    let db = trace.powers_db();
    let angles = trace.angles_deg();
    let n = db.len();

    // (angle_deg, height_db, height_native)
    let mut peaks: Vec<(f64, f64, f64)> = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if db[i] <= db[i - 1] {
            i += 1;
            continue;
        }
        // Rising edge at i; absorb any plateau.
        let mut j = i;
        while j + 1 < n && db[j + 1] == db[i] {
            j += 1;
        }
        if j + 1 < n && db[j + 1] < db[i] {
            let angle = if j == i {
                parabolic_refine(angles, &db, i)
            } else {
                0.5 * (angles[i] + angles[j])
            };
            peaks.push((angle, db[i], trace.powers()[i]));
        }
        i = j + 1;
    }

    // Tallest first; stable, so equal heights keep scan order.
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    if peaks.len() < num_peaks {
        return Err(Error::Underresolved {
            needed: num_peaks,
            found: peaks.iter().map(|p| p.0).collect(),
        });
    }
    let mut selected: Vec<(f64, f64)> = peaks[..num_peaks]
        .iter()
        .map(|&(angle, _, native)| (angle, native))
        .collect();
    selected.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    Ok(DoaEstimates {
        estimator: trace.estimator_name().to_string(),
        angles_deg: selected.iter().map(|p| p.0).collect(),
        auxiliary: selected.iter().map(|p| p.1).collect(),
    })
}

fn parabolic_refine(angles: &[f64], db: &[f64], i: usize) -> f64 {
    let (y0, y1, y2) = (db[i - 1], db[i], db[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom.abs() < f64::EPSILON {
        return angles[i];
    }
    let offset = 0.5 * (y0 - y2) / denom;
    let h = 0.5 * (angles[i + 1] - angles[i - 1]);
    (angles[i] + offset * h)
        .clamp(angles[i - 1], angles[i + 1])
        .clamp(-90.0, 90.0)
}

/// Roots of the Root-MUSIC noise polynomial `z^{M-1}·aᴴ(1/z̄)·Vn·Vnᴴ·a(z)`,
/// whose coefficients are the diagonal sums of the noise projector. Exposed
/// for diagnostics; the self-reciprocal coefficient structure guarantees the
/// roots come in conjugate-reciprocal pairs.
pub fn noise_polynomial_roots(split: &SubspaceSplit) -> Result<Vec<C64>> {
    let m = split.dim();
    let projector = split.noise_basis() * split.noise_basis().adjoint();
    let mut coeffs = vec![C64::new(0.0, 0.0); 2 * m - 1];
    for i in 0..m {
        for j in 0..m {
            coeffs[j + m - 1 - i] += projector[(i, j)];
        }
    }
    linalg::polynomial_roots(&coeffs)
}

/// Root-MUSIC: selects the `D` polynomial roots closest to the unit circle
/// (from inside; a 1e-8 outer band covers noiseless double roots that split
/// across the circle, with conjugate-reciprocal twins deduplicated) and maps
/// each via `θ = arcsin(−arg(z)/(2π·d/λ))`.
pub fn root_music(split: &SubspaceSplit, geometry: &ArrayGeometry) -> Result<DoaEstimates> {
    let m = split.dim();
    if m != geometry.num_elements() {
        return Err(Error::Dimension(format!(
            "subspace dimension {m} does not match {} array elements",
            geometry.num_elements()
        )));
    }
    let num_sources = split.num_sources();
    let roots = noise_polynomial_roots(split)?;

    let mut pool: Vec<C64> = roots
        .into_iter()
        .filter(|z| z.norm() <= 1.0 + 1e-8)
        .collect();
    pool.sort_by(|a, b| {
        let da = (a.norm() - 1.0).abs();
        let db = (b.norm() - 1.0).abs();
        da.partial_cmp(&db).unwrap()
    });

    // Near the circle a numerically split double root contributes two
    // candidates at the same angle; keep only the first (closest).
    let mut candidates: Vec<C64> = Vec::with_capacity(pool.len());
    for z in pool {
        let near_circle = (z.norm() - 1.0).abs() <= 1e-6;
        let twin = near_circle
            && candidates.iter().any(|s| {
                (s.norm() - 1.0).abs() <= 1e-6 && wrapped_angle_distance(s.arg(), z.arg()) < 1e-6
            });
        if !twin {
            candidates.push(z);
        }
    }
    if candidates.len() < num_sources {
        return Err(Error::Estimation(format!(
            "root selection found {} usable roots for {} sources",
            candidates.len(),
            num_sources
        )));
    }

    let spacing = geometry.spacing_wavelengths();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(num_sources);
    for z in &candidates[..num_sources] {
        let theta = phase_to_angle_deg(-z.arg(), spacing)?;
        pairs.push((theta, z.arg()));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    Ok(DoaEstimates {
        estimator: "root_music".to_string(),
        angles_deg: pairs.iter().map(|p| p.0).collect(),
        auxiliary: pairs.iter().map(|p| p.1).collect(),
    })
}

fn wrapped_angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Maps an inter-element phase to degrees from broadside:
/// `θ = arcsin(Φ/(2π·Δ/λ))`. Errors when the phase exceeds the arcsin
/// domain for the given displacement.
fn phase_to_angle_deg(phase: f64, displacement_wavelengths: f64) -> Result<f64> {
    let sin_theta = phase / (TAU * displacement_wavelengths);
    if sin_theta.abs() > 1.0 + 1e-9 {
        return Err(Error::Estimation(format!(
            "phase {phase:.6} maps outside the arcsin domain for displacement {displacement_wavelengths} wavelengths"
        )));
    }
    Ok(sin_theta.clamp(-1.0, 1.0).asin().to_degrees())
}

/// Subarray pairing used by TLS-ESPRIT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EspritSubarrays {
    /// Rows 1..M−1 and 2..M: maximum aperture overlap, M−1 doublets of
    /// displacement d.
    MaxOverlap,
    /// Even- and odd-indexed rows: M/2 disjoint adjacent-element doublets of
    /// displacement d (requires even M).
    SplitHalves,
}

/// Eigenvalues `Φ̂_k` of the TLS-ESPRIT rotation operator `Ψ = −V₁₂·V₂₂⁻¹`,
/// where the `V` blocks come from the eigendecomposition of the
/// stacked-subspace Gram matrix `[V₀ V₁]ᴴ[V₀ V₁]` (eigenvalues descending).
/// In the noiseless case every eigenvalue has unit modulus.
pub fn esprit_rotation_eigenvalues(
    eig: &EigenSystem,
    geometry: &ArrayGeometry,
    num_sources: usize,
    subarrays: EspritSubarrays,
) -> Result<Vec<C64>> {
    let m = eig.dim();
    if m != geometry.num_elements() {
        return Err(Error::Dimension(format!(
            "eigensystem dimension {m} does not match {} array elements",
            geometry.num_elements()
        )));
    }
    if num_sources == 0 || num_sources >= m {
        return Err(Error::Domain(format!(
            "num_sources must lie in (0, {m}), got {num_sources}"
        )));
    }

    let (rows0, rows1): (Vec<usize>, Vec<usize>) = match subarrays {
        EspritSubarrays::MaxOverlap => ((0..m - 1).collect(), (1..m).collect()),
        EspritSubarrays::SplitHalves => {
            if !m.is_multiple_of(2) {
                return Err(Error::Degenerate(format!(
                    "split-halves pairing needs an even element count, got {m}"
                )));
            }
            if m / 2 < num_sources {
                return Err(Error::Degenerate(format!(
                    "{} doublets cannot resolve {num_sources} sources",
                    m / 2
                )));
            }
            (
                (0..m).step_by(2).collect(),
                (0..m).skip(1).step_by(2).collect(),
            )
        }
    };

    let signal = eig.eigenvectors().columns(0, num_sources).into_owned();
    let v0 = signal.select_rows(rows0.iter());
    let v1 = signal.select_rows(rows1.iter());

    // Stack [V0 V1] and eigendecompose its 2D×2D Gram matrix.
    let mut stacked = CMatrix::zeros(rows0.len(), 2 * num_sources);
    stacked.view_mut((0, 0), (rows0.len(), num_sources)).copy_from(&v0);
    stacked
        .view_mut((0, num_sources), (rows0.len(), num_sources))
        .copy_from(&v1);
    let gram = stacked.adjoint() * &stacked;
    let (vals, vecs) = linalg::hermitian_eigen_desc(&gram);

    // The stacked subspace must keep rank D; a larger null space means the
    // subarray manifold cannot tell the sources apart (e.g. doublet
    // subarrays whose own spacing aliases two of the angles).
    let null_count = vals
        .iter()
        .filter(|&&l| l <= 1e-10 * vals[0].max(f64::MIN_POSITIVE))
        .count();
    if null_count > num_sources {
        return Err(Error::Degenerate(format!(
            "stacked signal subspace has rank {} for {num_sources} sources; the subarray pairing cannot separate these angles",
            2 * num_sources - null_count
        )));
    }

    let v12 = vecs.view((0, num_sources), (num_sources, num_sources)).into_owned();
    let v22 = vecs
        .view((num_sources, num_sources), (num_sources, num_sources))
        .into_owned();
    if linalg::condition_2norm(&v22) > 1e12 {
        return Err(Error::Degenerate(
            "V22 block is numerically singular; the subarray configuration cannot separate these sources".into(),
        ));
    }
    let v22_inv = v22.lu().try_inverse().ok_or_else(|| {
        Error::Degenerate("V22 block is not invertible".into())
    })?;
    let psi = -(v12 * v22_inv);
    linalg::general_eigenvalues(&psi)
}

/// TLS-ESPRIT: estimates angles from the rotation between two displaced
/// subarrays of the signal subspace, with no spectral search. The rotation
/// eigenvalue arguments map to angles through
/// `θ = arcsin(−arg(Φ̂)/(2π·Δ/λ))`; both supported pairings displace paired
/// elements by one inter-element spacing.
pub fn esprit_tls(
    eig: &EigenSystem,
    geometry: &ArrayGeometry,
    num_sources: usize,
    subarrays: EspritSubarrays,
) -> Result<DoaEstimates> {
    let rotations = esprit_rotation_eigenvalues(eig, geometry, num_sources, subarrays)?;
    let displacement = geometry.spacing_wavelengths();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(num_sources);
    for phi in &rotations {
        let theta = phase_to_angle_deg(-phi.arg(), displacement)?;
        pairs.push((theta, phi.arg()));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    Ok(DoaEstimates {
        estimator: "esprit_tls".to_string(),
        angles_deg: pairs.iter().map(|p| p.0).collect(),
        auxiliary: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Recovers the source covariance from estimated angles:
/// `R_ss = (AᴴA)⁻¹·Aᴴ·(R − λ_min·I)·A·(AᴴA)⁻¹` with `λ_min` the smallest
/// covariance eigenvalue. The result is Hermitian-symmetrized.
pub fn recover_signal_covariance(
    r: &HermitianCovariance,
    estimates: &DoaEstimates,
    geometry: &ArrayGeometry,
    eig: &EigenSystem,
) -> Result<CMatrix> {
    let d = estimates.angles_deg.len();
    if d == 0 {
        return Err(Error::Domain("need at least one angle estimate".into()));
    }
    let m = geometry.num_elements();
    if r.dim() != m || eig.dim() != m {
        return Err(Error::Dimension(format!(
            "covariance ({}) / eigensystem ({}) dimensions must match the {} array elements",
            r.dim(),
            eig.dim(),
            m
        )));
    }

    let a = geometry.manifold_matrix(&estimates.angles_deg)?;
    let gram = a.adjoint() * &a;
    if linalg::hermitian_condition(&gram) > 1e12 {
        return Err(Error::Degenerate(
            "estimated angles are (nearly) coincident; AᴴA is numerically singular".into(),
        ));
    }
    let gram_inv = gram
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("AᴴA is not invertible".into()))?;

    let lambda_min = eig.min_eigenvalue();
    let centered = r.matrix() - CMatrix::identity(m, m) * C64::new(lambda_min, 0.0);
    let rss = &gram_inv * a.adjoint() * centered * &a * &gram_inv;
    Ok((&rss + rss.adjoint()) * C64::new(0.5, 0.0))
}
