//! Small dense symmetric-matrix helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest equilibrated condition number accepted by [`symmetric_inverse`].
pub const MAX_CONDITION: f64 = 1e13;

/// Jacobi scaling `d_i = |H_ii|^{-1/2}` (1 where `H_ii = 0`).
pub fn jacobi_scaling(h: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(h.nrows(), |i, _| {
        let d = h[(i, i)].abs();
        if d > 0.0 && d.is_finite() {
            1.0 / d.sqrt()
        } else {
            1.0
        }
    })
}

/// `D H D` for a diagonal `D` given by its entries.
pub fn congruence_diag(h: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| d[i] * h[(i, j)] * d[j])
}

/// `D H D` with Jacobi scaling; a congruence, so inertia is unchanged.
pub fn equilibrate(h: &DMatrix<f64>) -> DMatrix<f64> {
    congruence_diag(h, &jacobi_scaling(h))
}

/// `(H + Hᵀ)/2`.
pub fn symmetrize(h: &DMatrix<f64>) -> DMatrix<f64> {
    (h + h.transpose()) * 0.5
}

/// Inverse of a symmetric matrix through the eigendecomposition of its
/// equilibrated form. The result is exactly symmetric.
pub fn symmetric_inverse(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = jacobi_scaling(h);
    let a = symmetrize(&congruence_diag(h, &d));
    let eig = SymmetricEigen::new(a);
    let amax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let amin = eig.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let condition = if amin > 0.0 { amax / amin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularHessian { condition });
    }
    let v = &eig.eigenvectors;
    let n = h.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += v[(i, k)] * v[(j, k)] / eig.eigenvalues[k];
            }
            let x = d[i] * acc * d[j];
            inv[(i, j)] = x;
            inv[(j, i)] = x;
        }
    }
    Ok(inv)
}

/// Leading principal minors `det H[..k, ..k]`, k = 1..=n.
pub fn leading_minors(h: &DMatrix<f64>) -> Vec<f64> {
    (1..=h.nrows())
        .map(|k| h.view((0, 0), (k, k)).into_owned().lu().determinant())
        .collect()
}

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, floor)`.
pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_badly_scaled_matrix() {
        let h = DMatrix::from_row_slice(2, 2, &[4e10, 3.0, 3.0, 1e-9]);
        let inv = symmetric_inverse(&h).unwrap();
        let det = 4e10 * 1e-9 - 9.0;
        let exact = DMatrix::from_row_slice(2, 2, &[1e-9 / det, -3.0 / det, -3.0 / det, 4e10 / det]);
        for (a, b) in inv.iter().zip(exact.iter()) {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
        assert_eq!(inv[(0, 1)], inv[(1, 0)]);
    }

    #[test]
    fn singular_is_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(symmetric_inverse(&h), Err(Error::SingularHessian { .. })));
    }

    #[test]
    fn minors_of_diagonal() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -3.0, 0.5]));
        let m = leading_minors(&h);
        assert!((m[0] - 2.0).abs() < 1e-15 && (m[1] + 6.0).abs() < 1e-14 && (m[2] + 3.0).abs() < 1e-14);
    }
}
