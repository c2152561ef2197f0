//! Small dense linear-algebra helpers shared by the geometry kernels.

use nalgebra::{DMatrix, DVector};

/// Minimum-norm least-squares solution of `a x ~= b` via SVD with a
/// relative singular-value cutoff.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-12 * (1.0 + smax);
    svd.solve(b, eps)
        .map(|m| DVector::from_column_slice(m.as_slice()))
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Numerical rank with a relative tolerance.
pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-10 * (1.0 + smax);
    svd.singular_values.iter().filter(|&&s| s > eps).count()
}

/// Orthonormal basis of the column span (columns of the result).
pub fn column_space_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-12 * (1.0 + smax);
    let r = svd.singular_values.iter().filter(|&&s| s > eps).count();
    u.columns(0, r).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_solves_consistent_system() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let b = DVector::from_row_slice(&[2.0, 8.0]);
        let x = lstsq(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_min_norm_on_rank_deficient() {
        // Two identical columns: minimum-norm splits the weight.
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_row_slice(&[2.0]);
        let x = lstsq(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank_detects_duplicates() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert_eq!(rank(&a), 1);
    }
}
