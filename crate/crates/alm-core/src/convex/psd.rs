//! PSD cone of symmetric d x d matrices, carried as vectors of length
//! d(d+1)/2 in a scaled upper-triangular encoding: row-major upper triangle
//! with off-diagonal entries multiplied by sqrt(2), so that the vector dot
//! product equals the trace inner product and Euclidean norms match
//! Frobenius norms.

use nalgebra::{DMatrix, DVector};

use crate::{AlmError, Result};

pub fn svec_len(order: usize) -> usize {
    order * (order + 1) / 2
}

/// Symmetric matrix -> scaled upper-triangular vector.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    debug_assert_eq!(m.ncols(), d);
    let mut out = DVector::zeros(svec_len(d));
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            out[k] = if i == j {
                m[(i, j)]
            } else {
                std::f64::consts::SQRT_2 * m[(i, j)]
            };
            k += 1;
        }
    }
    out
}

/// Inverse of [`svec`]; the order is recovered from the vector length.
pub fn smat(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let len = v.len();
    let d = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    if svec_len(d) != len {
        return Err(AlmError::input(format!(
            "svec length {} is not triangular",
            len
        )));
    }
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            let x = if i == j {
                v[k]
            } else {
                v[k] / std::f64::consts::SQRT_2
            };
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    Ok(m)
}

/// 0 if the encoded matrix is PSD (within a 1e-12 relative eigenvalue
/// guard), +inf otherwise.
pub fn value(order: usize, z: &DVector<f64>) -> Result<f64> {
    value_with_tol(order, z, 1e-12)
}

pub fn value_with_tol(order: usize, z: &DVector<f64>, tol: f64) -> Result<f64> {
    let m = decode(order, z)?;
    let eig = m.symmetric_eigenvalues();
    let scale = 1.0 + eig.amax();
    if eig.iter().all(|&l| l >= -tol * scale) {
        Ok(0.0)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Projection onto the PSD cone: eigenvalue clamp at exactly 0.
pub fn project(order: usize, y: &DVector<f64>) -> Result<DVector<f64>> {
    let m = decode(order, y)?;
    let eig = nalgebra::linalg::SymmetricEigen::new(m);
    let clamped = DVector::from_fn(order, |i, _| eig.eigenvalues[i].max(0.0));
    let u = &eig.eigenvectors;
    let rec = u * DMatrix::from_diagonal(&clamped) * u.transpose();
    Ok(svec(&rec))
}

/// Subderivative of the indicator: 0 if `w` is tangent at `z`, else +inf.
/// Tangency means the kernel block of the encoded direction is PSD.
pub fn subderivative(order: usize, z: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    if !value(order, z)?.is_finite() {
        return Err(AlmError::input("psd subderivative: z outside the cone"));
    }
    let zm = decode(order, z)?;
    let wm = decode(order, w)?;
    let eig = nalgebra::linalg::SymmetricEigen::new(zm);
    let scale = 1.0 + eig.eigenvalues.amax();
    let kernel: Vec<usize> = (0..order)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-8 * scale)
        .collect();
    if kernel.is_empty() {
        return Ok(0.0);
    }
    let u0 = eig.eigenvectors.select_columns(kernel.iter());
    let block = u0.transpose() * wm * u0;
    let bl_eig = block.symmetric_eigenvalues();
    if bl_eig.iter().all(|&l| l >= -1e-8 * (1.0 + w.norm())) {
        Ok(0.0)
    } else {
        Ok(f64::INFINITY)
    }
}

fn decode(order: usize, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    if v.len() != svec_len(order) {
        return Err(AlmError::input("psd: vector length does not match order"));
    }
    smat(v)
}
