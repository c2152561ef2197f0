//! Convex quadratic programming over a polyhedron via a primal active-set
//! method. Small dense problems only; this backs polyhedral projections and
//! piecewise-quadratic proximal maps.

use nalgebra::{DMatrix, DVector};

use super::dense::lstsq;
use super::nnls::nnls_solve;
use super::simplex::{lp_maximize, LpOutcome};
use crate::{AlmError, Result};

/// Minimize `0.5 x^T H x + q^T x` subject to `A x <= b`, `E x = d`.
///
/// `H` must be positive semidefinite (positive definite for the proximal
/// use cases). A KKT certificate is verified on exit to 1e-9; failure to
/// certify, or exceeding the iteration cap, is a numerical error. An
/// infeasible constraint system is an input error.
pub fn qp_solve(
    h: &DMatrix<f64>,
    q: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    d: &DVector<f64>,
    x0: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    let n = q.len();
    let m = a.nrows();
    let me = e.nrows();
    if h.nrows() != n || h.ncols() != n {
        return Err(AlmError::input("qp: Hessian dimension mismatch"));
    }

    let mut x = starting_point(a, b, e, d, n, x0)?;
    let mut work: Vec<usize> = active_rows(a, b, &x, 1e-9);
    let cap = 50 * (n + m + me) + 50;

    for _ in 0..cap {
        let (p, lambda) = eqp_step(h, q, a, b, e, d, &x, &work);
        if p.norm() <= 1e-11 * (1.0 + x.norm()) {
            // Stationary on the working set; check multiplier signs.
            let mut drop: Option<(usize, f64)> = None;
            for (k, &row) in work.iter().enumerate() {
                let lam = lambda[k];
                if lam < -1e-10 * (1.0 + q.norm()) {
                    match drop {
                        Some((_, best)) if best <= lam => {}
                        _ => drop = Some((row, lam)),
                    }
                }
            }
            match drop {
                None => {
                    certify(h, q, a, b, e, &x)?;
                    return Ok(x);
                }
                Some((row, _)) => work.retain(|&r| r != row),
            }
        } else {
            // Longest step along p that keeps the inactive rows feasible.
            let mut alpha = 1.0_f64;
            let mut blocker: Option<usize> = None;
            for i in 0..m {
                if work.contains(&i) {
                    continue;
                }
                let ap = a.row(i).transpose().dot(&p);
                if ap > 1e-12 * (1.0 + p.norm()) {
                    let slack = b[i] - a.row(i).transpose().dot(&x);
                    let step = (slack / ap).max(0.0);
                    if step < alpha {
                        alpha = step;
                        blocker = Some(i);
                    }
                }
            }
            x += alpha * &p;
            if let Some(i) = blocker {
                work.push(i);
                work.sort_unstable();
            }
        }
    }
    Err(AlmError::numerical("qp active-set iteration cap exceeded"))
}

/// Feasible starting point: the caller's hint when it checks out, otherwise
/// a phase-1 vertex from the LP machinery.
fn starting_point(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    d: &DVector<f64>,
    n: usize,
    x0: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    if let Some(x) = x0 {
        if is_feasible(a, b, e, d, x) {
            return Ok(x.clone());
        }
    }
    match lp_maximize(a, b, e, d, &DVector::zeros(n))? {
        LpOutcome::Optimal(x) | LpOutcome::DegenerateObjective(x) => Ok(x),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

fn is_feasible(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    d: &DVector<f64>,
    x: &DVector<f64>,
) -> bool {
    for i in 0..a.nrows() {
        if a.row(i).transpose().dot(x) > b[i] + 1e-9 * (1.0 + b[i].abs()) {
            return false;
        }
    }
    for j in 0..e.nrows() {
        if (e.row(j).transpose().dot(x) - d[j]).abs() > 1e-9 * (1.0 + d[j].abs()) {
            return false;
        }
    }
    true
}

fn active_rows(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>, tol: f64) -> Vec<usize> {
    (0..a.nrows())
        .filter(|&i| (a.row(i).transpose().dot(x) - b[i]).abs() <= tol * (1.0 + b[i].abs()))
        .collect()
}

/// Equality-constrained step on the working set. Returns the step `p` and
/// the working-set inequality multipliers at `x + p`.
fn eqp_step(
    h: &DMatrix<f64>,
    q: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    d: &DVector<f64>,
    x: &DVector<f64>,
    work: &[usize],
) -> (DVector<f64>, DVector<f64>) {
    let n = q.len();
    let nw = work.len();
    let me = e.nrows();
    let dim = n + nw + me;
    let mut k = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    k.view_mut((0, 0), (n, n)).copy_from(h);
    for (kk, &row) in work.iter().enumerate() {
        for j in 0..n {
            k[(j, n + kk)] = a[(row, j)];
            k[(n + kk, j)] = a[(row, j)];
        }
        rhs[n + kk] = b[row] - a.row(row).transpose().dot(x);
    }
    for r in 0..me {
        for j in 0..n {
            k[(j, n + nw + r)] = e[(r, j)];
            k[(n + nw + r, j)] = e[(r, j)];
        }
        rhs[n + nw + r] = d[r] - e.row(r).transpose().dot(x);
    }
    let grad = h * x + q;
    for j in 0..n {
        rhs[j] = -grad[j];
    }
    let sol = lstsq(&k, &rhs);
    let p = sol.rows(0, n).into_owned();
    let lambda = sol.rows(n, nw).into_owned();
    (p, lambda)
}

/// Verify that `-(H x + q)` lies in the normal cone spanned by the active
/// inequality rows and the equality rows, via an NNLS distance.
fn certify(
    h: &DMatrix<f64>,
    q: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    e: &DMatrix<f64>,
    x: &DVector<f64>,
) -> Result<()> {
    let n = q.len();
    let grad = h * x + q;
    let act = active_rows(a, b, x, 1e-8);
    let mut g = DMatrix::<f64>::zeros(n, act.len());
    for (k, &i) in act.iter().enumerate() {
        g.set_column(k, &a.row(i).transpose());
    }
    let f = e.transpose();
    let sol = nnls_solve(&g, &f, &(-&grad))?;
    let scale = 1.0 + grad.norm();
    if sol.residual > 1e-9 * scale {
        return Err(AlmError::numerical(format!(
            "qp KKT certificate failed: stationarity residual {:.3e}",
            sol.residual
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    /// min 0.5||x - y||^2 over the set, i.e. projection.
    fn project(
        y: &[f64],
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        e: &DMatrix<f64>,
        d: &DVector<f64>,
    ) -> DVector<f64> {
        let yv = DVector::from_row_slice(y);
        qp_solve(&eye(y.len()), &(-&yv), a, b, e, d, Some(&yv)).unwrap()
    }

    #[test]
    fn box_projection_is_clamp() {
        // [-1,1]^2 as Ax <= b.
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let b = DVector::from_row_slice(&[1.0, 1.0, 1.0, 1.0]);
        let e = DMatrix::zeros(0, 2);
        let d = DVector::zeros(0);
        let cases = [
            ([2.0, 2.0], [1.0, 1.0]),
            ([0.3, -0.4], [0.3, -0.4]),
            ([-5.0, 0.5], [-1.0, 0.5]),
        ];
        for (y, want) in cases {
            let p = project(&y, &a, &b, &e, &d);
            assert!((p - DVector::from_row_slice(&want)).norm() < 1e-9);
        }
    }

    #[test]
    fn simplex_projection() {
        // x >= 0, x1 + x2 = 1.
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]);
        let b = DVector::zeros(2);
        let e = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let d = DVector::from_row_slice(&[1.0]);
        // Interior projection: shift onto the hyperplane.
        let p = project(&[0.6, 0.8], &a, &b, &e, &d);
        assert!((p - DVector::from_row_slice(&[0.4, 0.6])).norm() < 1e-9);
        // Off the corner.
        let p = project(&[2.0, -1.0], &a, &b, &e, &d);
        assert!((p - DVector::from_row_slice(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn general_quadratic_with_halfspace() {
        // min 0.5 x^T diag(1,4) x - (1,1).x  s.t. x1 + x2 <= 0.
        // Unconstrained min (1, 0.25) violates; KKT with active constraint:
        // x1 + lam = 1, 4 x2 + lam = 1, x1 + x2 = 0 -> x1 = 0.6, x2 = -0.6? No:
        // from x2 = -x1: x1 + lam = 1, -4 x1 + lam = 1 -> 5 x1 = 0 ... x1 = 0.
        // Then lam = 1 >= 0, x = (0, 0).
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let q = DVector::from_row_slice(&[-1.0, -1.0]);
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::zeros(1);
        let e = DMatrix::zeros(0, 2);
        let d = DVector::zeros(0);
        let x = qp_solve(&h, &q, &a, &b, &e, &d, None).unwrap();
        assert!(x.norm() < 1e-9);
    }

    #[test]
    fn random_box_projections_match_clamp() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..5);
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            let mut lo = vec![0.0; n];
            let mut hi = vec![0.0; n];
            for j in 0..n {
                let l: f64 = rng.random_range(-2.0..0.0);
                let u: f64 = rng.random_range(0.0..2.0);
                lo[j] = l;
                hi[j] = u;
                let mut r = vec![0.0; n];
                r[j] = 1.0;
                rows.extend_from_slice(&r);
                rhs.push(u);
                r[j] = -1.0;
                rows.extend_from_slice(&r);
                rhs.push(-l);
            }
            let a = DMatrix::from_row_slice(2 * n, n, &rows);
            let b = DVector::from_row_slice(&rhs);
            let e = DMatrix::zeros(0, n);
            let d = DVector::zeros(0);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = project(&y, &a, &b, &e, &d);
            for j in 0..n {
                assert!((p[j] - y[j].clamp(lo[j], hi[j])).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn infeasible_system_is_input_error() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let b = DVector::from_row_slice(&[-1.0, -1.0]); // x <= -1 and x >= 1
        let e = DMatrix::zeros(0, 1);
        let d = DVector::zeros(0);
        let err = qp_solve(&eye(1), &DVector::zeros(1), &a, &b, &e, &d, None).unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
    }
}
