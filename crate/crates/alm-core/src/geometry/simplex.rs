//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Sizes here are tiny (desk scale), so a textbook tableau with anti-cycling
//! pivoting is simpler and more predictable than anything revised or sparse.

use nalgebra::{DMatrix, DVector};

use crate::{AlmError, Result};

/// Outcome of maximizing `c^T x` over a polyhedron.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// Optimal basic solution.
    Optimal(DVector<f64>),
    /// The objective is unbounded above on the feasible set.
    Unbounded,
    /// `c = 0`: every feasible point is optimal; the returned point is an
    /// arbitrary basic feasible point and callers should not read meaning
    /// into which one.
    DegenerateObjective(DVector<f64>),
}

const PIVOT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;
const MAX_PIVOTS: usize = 20_000;

/// Maximize `c^T x` subject to `a x <= b`, `e x = d`.
///
/// Infeasible systems are reported as an input error, matching the callers'
/// precondition that the polyhedron is nonempty.
pub fn lp_maximize(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    d: &DVector<f64>,
    c: &DVector<f64>,
) -> Result<LpOutcome> {
    let n = c.len();
    let m_ineq = a.nrows();
    let m_eq = e.nrows();
    let m = m_ineq + m_eq;
    let degenerate = c.iter().all(|&ci| ci == 0.0);

    if m == 0 {
        // Whole space.
        return Ok(if degenerate {
            LpOutcome::DegenerateObjective(DVector::zeros(n))
        } else {
            LpOutcome::Unbounded
        });
    }

    // Columns: x+ (n) | x- (n) | slacks (m_ineq) | artificials (m).
    let n_cols = 2 * n + m_ineq + m;
    let art0 = 2 * n + m_ineq;
    let mut t = DMatrix::<f64>::zeros(m, n_cols);
    let mut rhs = DVector::<f64>::zeros(m);

    for i in 0..m_ineq {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = flip * a[(i, j)];
            t[(i, n + j)] = -flip * a[(i, j)];
        }
        t[(i, 2 * n + i)] = flip;
        rhs[i] = flip * b[i];
    }
    for k in 0..m_eq {
        let i = m_ineq + k;
        let flip = if d[k] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = flip * e[(k, j)];
            t[(i, n + j)] = -flip * e[(k, j)];
        }
        rhs[i] = flip * d[k];
    }
    for i in 0..m {
        t[(i, art0 + i)] = 1.0;
    }
    let mut basis: Vec<usize> = (0..m).map(|i| art0 + i).collect();

    // Phase 1: maximize -(sum of artificials).
    let mut obj = DVector::<f64>::zeros(n_cols);
    let mut obj_val = 0.0;
    for j in 0..art0 {
        obj[j] = (0..m).map(|i| t[(i, j)]).sum();
    }
    for i in 0..m {
        obj_val -= rhs[i];
    }
    run_pivots(&mut t, &mut rhs, &mut obj, &mut obj_val, &mut basis, n_cols, false)?
        .ok_or(())
        .map_err(|_| AlmError::numerical("phase-1 LP reported unbounded (cannot happen)"))?;
    if obj_val < -1e-7 * (1.0 + rhs.amax()) {
        return Err(AlmError::input("infeasible polyhedron in LP"));
    }

    // Phase 2: the real objective over x+ / x-; artificials are barred from
    // entering (their columns are treated as absent).
    let mut obj2 = DVector::<f64>::zeros(n_cols);
    for j in 0..n {
        obj2[j] = c[j];
        obj2[n + j] = -c[j];
    }
    let mut obj2_val = 0.0;
    for (i, &bv) in basis.iter().enumerate() {
        let cost = if bv < 2 * n { obj2[bv] } else { 0.0 };
        if cost != 0.0 {
            obj2_val += cost * rhs[i];
            let row = t.row(i).clone_owned();
            for j in 0..n_cols {
                obj2[j] -= cost * row[j];
            }
        }
    }
    for j in art0..n_cols {
        obj2[j] = f64::NEG_INFINITY; // never enters
    }
    let finished =
        run_pivots(&mut t, &mut rhs, &mut obj2, &mut obj2_val, &mut basis, art0, false)?;
    if finished.is_none() {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = DVector::<f64>::zeros(n);
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] += rhs[i];
        } else if bv < 2 * n {
            x[bv - n] -= rhs[i];
        }
    }
    // Guard against tolerance creep: the reconstructed point must satisfy the
    // original system.
    for i in 0..m_ineq {
        let row: f64 = (0..n).map(|j| a[(i, j)] * x[j]).sum();
        if row - b[i] > FEAS_TOL * (1.0 + b[i].abs()) {
            return Err(AlmError::numerical("LP solution violates inequality row"));
        }
    }
    for k in 0..m_eq {
        let row: f64 = (0..n).map(|j| e[(k, j)] * x[j]).sum();
        if (row - d[k]).abs() > FEAS_TOL * (1.0 + d[k].abs()) {
            return Err(AlmError::numerical("LP solution violates equality row"));
        }
    }

    Ok(if degenerate {
        LpOutcome::DegenerateObjective(x)
    } else {
        LpOutcome::Optimal(x)
    })
}

/// Pivot until optimal (`Some(())`) or unbounded (`None`). `col_limit` caps
/// which columns may enter. Bland's rule on both the entering and the leaving
/// choice guarantees finite termination.
fn run_pivots(
    t: &mut DMatrix<f64>,
    rhs: &mut DVector<f64>,
    obj: &mut DVector<f64>,
    obj_val: &mut f64,
    basis: &mut [usize],
    col_limit: usize,
    _minimize: bool,
) -> Result<Option<()>> {
    let m = t.nrows();
    for _ in 0..MAX_PIVOTS {
        let mut entering = None;
        for j in 0..col_limit {
            if obj[j] > PIVOT_TOL {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            return Ok(Some(()));
        };

        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[(i, j)] > PIVOT_TOL {
                let ratio = rhs[i] / t[(i, j)];
                match leaving {
                    None => leaving = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12 && basis[i] < basis[bi])
                        {
                            leaving = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = leaving else {
            return Ok(None);
        };

        let piv = t[(r, j)];
        for col in 0..t.ncols() {
            t[(r, col)] /= piv;
        }
        rhs[r] /= piv;
        for i in 0..m {
            if i != r && t[(i, j)].abs() > 0.0 {
                let f = t[(i, j)];
                for col in 0..t.ncols() {
                    t[(i, col)] -= f * t[(r, col)];
                }
                rhs[i] -= f * rhs[r];
                if rhs[i] < 0.0 && rhs[i] > -1e-11 {
                    rhs[i] = 0.0;
                }
            }
        }
        if obj[j].is_finite() {
            let f = obj[j];
            for col in 0..t.ncols() {
                if obj[col].is_finite() {
                    obj[col] -= f * t[(r, col)];
                }
            }
            *obj_val += f * rhs[r];
        }
        basis[r] = j;
    }
    Err(AlmError::numerical("simplex pivot cap exceeded"))
}
