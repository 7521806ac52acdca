//! Internal dense complex linear-algebra helpers shared by the estimators.

use crate::error::{Error, Result};
use crate::{C64, CMatrix};

/// Hermitian eigendecomposition with eigenvalues sorted descending (stable,
/// so exact ties keep the decomposition-routine order) and each eigenvector
/// scaled so its largest-magnitude entry is real and positive. The phase fix
/// removes the per-column unit-modulus ambiguity and makes stored outputs
/// deterministic.
pub(crate) fn hermitian_eigen_desc(matrix: &CMatrix) -> (Vec<f64>, CMatrix) {
    let m = matrix.nrows();
    let se = nalgebra::SymmetricEigen::new(matrix.clone());

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    fix_column_phases(&mut eigenvectors);
    (eigenvalues, eigenvectors)
}

/// Rotates each column by a unit-modulus scalar so that its
/// largest-magnitude entry (first such entry on ties) is real-positive.
pub(crate) fn fix_column_phases(matrix: &mut CMatrix) {
    for mut col in matrix.column_iter_mut() {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (i, e) in col.iter().enumerate() {
            let mag = e.norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let rot = col[best].conj() / C64::new(best_mag, 0.0);
            for e in col.iter_mut() {
                *e *= rot;
            }
        }
    }
}

/// 2-norm condition estimate of a Hermitian PSD matrix from its extreme
/// eigenvalues. Returns infinity when the smallest eigenvalue is not
/// strictly positive.
pub(crate) fn hermitian_condition(matrix: &CMatrix) -> f64 {
    let se = nalgebra::SymmetricEigen::new(matrix.clone());
    let max = se.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = se.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// 2-norm condition estimate of a general square matrix via its singular
/// values.
pub(crate) fn condition_2norm(matrix: &CMatrix) -> f64 {
    let sv = matrix.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(f64::MIN, f64::max);
    let min = sv.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of a general complex square matrix via its Schur form.
pub(crate) fn general_eigenvalues(matrix: &CMatrix) -> Result<Vec<C64>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if matrix.nrows() == 1 {
        return Ok(vec![matrix[(0, 0)]]);
    }
    matrix
        .clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().cloned().collect())
        .ok_or_else(|| Error::Estimation("complex Schur iteration did not converge".into()))
}

/// Roots of the polynomial `Σ coeffs[k]·z^k` via the eigenvalues of its
/// companion matrix. Leading coefficients that are negligible relative to
/// the largest one are trimmed first.
pub(crate) fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let max_mag = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if max_mag == 0.0 {
        return Err(Error::Estimation("all polynomial coefficients are zero".into()));
    }
    let mut degree = coeffs.len() - 1;
    while degree > 0 && coeffs[degree].norm() <= 1e-14 * max_mag {
        degree -= 1;
    }
    if degree == 0 {
        return Ok(Vec::new());
    }

    let lead = coeffs[degree];
    let mut companion = CMatrix::zeros(degree, degree);
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
        if i > 0 {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
    }
    general_eigenvalues(&companion)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_desc_sorts_and_fixes_phase() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(5.0, 0.0),
            C64::new(3.0, 0.0),
        ]));
        let (vals, vecs) = hermitian_eigen_desc(&m);
        assert_eq!(vals, vec![5.0, 3.0, 1.0]);
        // Each eigenvector's dominant entry is +1 after the phase fix.
        for c in 0..3 {
            let col = vecs.column(c);
            let dominant = col.iter().cloned().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
            assert!((dominant - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn polynomial_roots_known_cubic() {
        // (z - 1)(z - 2)(z + 3) = z^3 - 7z + 6
        let coeffs = [
            C64::new(6.0, 0.0),
            C64::new(-7.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ];
        let mut roots = polynomial_roots(&coeffs).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let want = [-3.0, 1.0, 2.0];
        for (r, w) in roots.iter().zip(want) {
            assert!((r - C64::new(w, 0.0)).norm() < 1e-10, "got {r}, want {w}");
        }
    }

    #[test]
    fn polynomial_roots_trims_leading_zeros() {
        // 0·z^2 + z - 1
        let coeffs = [C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn general_eigenvalues_match_trace() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 1.0),
                C64::new(2.0, 0.0),
                C64::new(0.5, -0.5),
                C64::new(-1.0, 0.0),
            ],
        );
        let ev = general_eigenvalues(&m).unwrap();
        let sum: C64 = ev.iter().sum();
        let trace = m[(0, 0)] + m[(1, 1)];
        assert!((sum - trace).norm() < 1e-12);
    }
}
