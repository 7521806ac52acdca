//! Spatial covariance estimation, coherence-breaking smoothing, and sorted
//! Hermitian eigendecompositions.

use crate::error::{Error, Result};
use crate::linalg;
use crate::sim::SnapshotMatrix;
use crate::{C64, CMatrix};

/// Decorrelation pre-processing applied to a covariance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    ForwardBackward,
    ForwardSpatial { subarray_len: usize },
    ForwardBackwardSpatial { subarray_len: usize },
}

impl Smoothing {
    pub fn is_forward_backward(&self) -> bool {
        matches!(
            self,
            Smoothing::ForwardBackward | Smoothing::ForwardBackwardSpatial { .. }
        )
    }
}

/// M×M Hermitian positive-semidefinite covariance estimate. Construction
/// symmetrizes inputs whose relative asymmetry is within 1e-12 and rejects
/// anything worse.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCovariance {
    matrix: CMatrix,
    num_snapshots_used: usize,
    smoothing: Smoothing,
}

impl HermitianCovariance {
    pub fn new(matrix: CMatrix, num_snapshots_used: usize, smoothing: Smoothing) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(Error::Domain("covariance has non-finite entries".into()));
        }
        let norm = matrix.norm();
        let asym = (&matrix - matrix.adjoint()).norm();
        if norm > 0.0 && asym > 1e-12 * norm {
            return Err(Error::Domain(format!(
                "matrix is not Hermitian: relative asymmetry {:.3e}",
                asym / norm
            )));
        }
        let symmetrized = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self {
            matrix: symmetrized,
            num_snapshots_used,
            smoothing,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_snapshots_used(&self) -> usize {
        self.num_snapshots_used
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }
}

/// Finite-sample spatial covariance `(1/N)·X·Xᴴ`.
pub fn sample_covariance(x: &SnapshotMatrix) -> Result<HermitianCovariance> {
    let n = x.num_snapshots();
    let scale = C64::new(1.0 / n as f64, 0.0);
    let r = x.samples() * x.samples().adjoint() * scale;
    HermitianCovariance::new(r, n, Smoothing::None)
}

/// Forward/backward average `(R + J·conj(R)·J)/2` with `J` the exchange
/// matrix. Restores one rank unit per coherent pair and preserves the trace
/// exactly. Applying it twice is rejected.
pub fn forward_backward_average(r: &HermitianCovariance) -> Result<HermitianCovariance> {
    if r.smoothing().is_forward_backward() {
        return Err(Error::Usage(
            "forward/backward averaging was already applied to this covariance".into(),
        ));
    }
    let m = r.dim();
    let src = r.matrix();
    let avg = CMatrix::from_fn(m, m, |i, j| {
        (src[(i, j)] + src[(m - 1 - i, m - 1 - j)].conj()) * 0.5
    });
    let smoothing = match r.smoothing() {
        Smoothing::None => Smoothing::ForwardBackward,
        Smoothing::ForwardSpatial { subarray_len } => {
            Smoothing::ForwardBackwardSpatial { subarray_len }
        }
        // is_forward_backward() was checked above.
        other => other,
    };
    HermitianCovariance::new(avg, r.num_snapshots_used(), smoothing)
}

/// Forward spatial smoothing: averages the sample covariances of the
/// `M - L + 1` sliding length-`L` subarrays. Output dimension is `L×L`.
pub fn spatial_smoothing(x: &SnapshotMatrix, subarray_len: usize) -> Result<HermitianCovariance> {
    let m = x.num_elements();
    let l = subarray_len;
    if l < 2 || l > m {
        return Err(Error::Domain(format!(
            "subarray length must be in [2, {m}], got {l}"
        )));
    }
    let n = x.num_snapshots();
    let num_subarrays = m - l + 1;
    let mut acc = CMatrix::zeros(l, l);
    for k in 0..num_subarrays {
        let sub = x.samples().rows(k, l);
        acc += sub * sub.adjoint();
    }
    let scale = C64::new(1.0 / (n as f64 * num_subarrays as f64), 0.0);
    HermitianCovariance::new(acc * scale, n, Smoothing::ForwardSpatial { subarray_len: l })
}

/// Eigenvalues with matched orthonormal eigenvectors of a Hermitian matrix,
/// sorted by descending eigenvalue. Column `i` of `eigenvectors` pairs with
/// `eigenvalues[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl EigenSystem {
    /// Builds an eigensystem from an externally computed decomposition,
    /// checking the sort order and basis orthonormality.
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: CMatrix) -> Result<Self> {
        let m = eigenvalues.len();
        if m == 0 || eigenvectors.nrows() != m || eigenvectors.ncols() != m {
            return Err(Error::Dimension(format!(
                "{} eigenvalues vs {}x{} eigenvector matrix",
                m,
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Domain(
                "eigenvalues must be sorted in descending order".into(),
            ));
        }
        let gram = eigenvectors.adjoint() * &eigenvectors;
        if (gram - CMatrix::identity(m, m)).norm() > 1e-9 {
            return Err(Error::Domain(
                "eigenvector basis is not orthonormal".into(),
            ));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Smallest eigenvalue (the noise-floor estimate).
    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("EigenSystem is non-empty")
    }
}

/// Sorted eigendecomposition of a covariance estimate. Eigenvector phases are
/// fixed (largest-magnitude entry real-positive), so repeated runs produce
/// identical output.
pub fn eigendecompose(r: &HermitianCovariance) -> Result<EigenSystem> {
    let (eigenvalues, eigenvectors) = linalg::hermitian_eigen_desc(r.matrix());

    let trace = r.trace();
    if let Some(&min) = eigenvalues.last() {
        if min < -1e-10 * trace.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Domain(format!(
                "covariance is not positive semidefinite: min eigenvalue {min:.3e} for trace {trace:.3e}"
            )));
        }
    }

    // Residual and orthonormality guards; with the dimensions used here the
    // decomposition sits at machine precision, so a violation means the
    // input was pathological.
    let m = r.dim();
    let norm = r.matrix().norm();
    for (i, &val) in eigenvalues.iter().enumerate() {
        let q = eigenvectors.column(i);
        let resid = (r.matrix() * q - q * C64::new(val, 0.0)).norm();
        if resid > 1e-9 * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Estimation(format!(
                "eigendecomposition residual {resid:.3e} exceeds tolerance"
            )));
        }
    }
    let gram = eigenvectors.adjoint() * &eigenvectors;
    if (gram - CMatrix::identity(m, m)).norm() > 1e-9 {
        return Err(Error::Estimation(
            "eigenvector basis failed the orthonormality check".into(),
        ));
    }

    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}
