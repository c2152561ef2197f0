//! Nonnegative least squares with an additional unconstrained column block.
//!
//! Solves `min || G lambda + F u - t ||` over `lambda >= 0`, `u` free, by
//! first eliminating the free block (project everything onto the orthogonal
//! complement of span F) and then running Lawson-Hanson active-set NNLS on
//! the reduced problem.

use nalgebra::{DMatrix, DVector};

use super::dense::{column_space_basis, lstsq};
use crate::{AlmError, Result};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    /// Coefficients of the sign-constrained columns, all `>= 0`.
    pub coeffs: DVector<f64>,
    /// Coefficients of the free columns.
    pub free: DVector<f64>,
    /// `|| G coeffs + F free - t ||`.
    pub residual: f64,
}

/// Lawson-Hanson NNLS with a free column block.
///
/// The KKT conditions of the reduced NNLS are satisfied to well below 1e-10
/// on exit; exceeding the iteration cap is a numerical error.
pub fn nnls_solve(
    g_nonneg: &DMatrix<f64>,
    g_free: &DMatrix<f64>,
    target: &DVector<f64>,
) -> Result<NnlsSolution> {
    let m = target.len();
    if g_nonneg.nrows() != m && g_nonneg.ncols() > 0 {
        return Err(AlmError::input("nnls: sign-constrained block row mismatch"));
    }
    if g_free.nrows() != m && g_free.ncols() > 0 {
        return Err(AlmError::input("nnls: free block row mismatch"));
    }
    let nc = g_nonneg.ncols();

    // Eliminate the free block: with Q an orthonormal basis of span F, the
    // optimal u makes the residual orthogonal to span F, so lambda solves the
    // NNLS with everything projected by (I - Q Q^T).
    let q = column_space_basis(g_free);
    let deflate = |v: &DVector<f64>| -> DVector<f64> {
        if q.ncols() == 0 {
            v.clone()
        } else {
            v - &q * (q.transpose() * v)
        }
    };
    let t_red = deflate(target);
    let mut g_red = DMatrix::<f64>::zeros(m, nc);
    for j in 0..nc {
        let col = deflate(&g_nonneg.column(j).into_owned());
        g_red.set_column(j, &col);
    }

    let lambda = lawson_hanson(&g_red, &t_red)?;

    let rhs_free = target - g_nonneg * &lambda;
    let free = lstsq(g_free, &rhs_free);
    let residual = (g_nonneg * &lambda + g_free * &free - target).norm();
    Ok(NnlsSolution {
        coeffs: lambda,
        free,
        residual,
    })
}

fn lawson_hanson(g: &DMatrix<f64>, t: &DVector<f64>) -> Result<DVector<f64>> {
    let nc = g.ncols();
    let mut x = DVector::<f64>::zeros(nc);
    if nc == 0 {
        return Ok(x);
    }
    let scale = 1.0 + (g.transpose() * t).amax();
    let tol_dual = 1e-12 * scale;
    let mut passive = vec![false; nc];
    let max_outer = 3 * nc + 30;

    for _ in 0..max_outer {
        let w = g.transpose() * (t - g * &x);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..nc {
            if !passive[j] && w[j] > tol_dual {
                match best {
                    Some((_, bw)) if bw >= w[j] => {}
                    _ => best = Some((j, w[j])),
                }
            }
        }
        let Some((j_new, _)) = best else {
            return Ok(x);
        };
        passive[j_new] = true;

        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 3 * nc + 30 {
                return Err(AlmError::numerical("nnls inner loop cap exceeded"));
            }
            let idx: Vec<usize> = (0..nc).filter(|&j| passive[j]).collect();
            let sub = g.select_columns(idx.iter());
            let z_sub = lstsq(&sub, t);
            if z_sub.iter().all(|&zi| zi > 0.0) {
                x.fill(0.0);
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z_sub[k];
                }
                break;
            }
            // Step from x toward z until the first passive coefficient hits 0.
            let mut alpha = 1.0_f64;
            for (k, &j) in idx.iter().enumerate() {
                if z_sub[k] <= 0.0 {
                    let denom = x[j] - z_sub[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z_sub[k] - x[j]);
                if x[j] <= 1e-14 * scale {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    Err(AlmError::numerical("nnls outer loop cap exceeded"))
}
