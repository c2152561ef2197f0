//! Convex piecewise linear-quadratic functions: on each polyhedral piece
//! C_i the value is 0.5<A_i z, z> + <a_i, z> + alpha_i, with agreement on
//! shared boundaries validated at construction by sampling.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{qp_solve, ConeRep, LpOutcome, Polyhedron, DEFAULT_ACTIVE_TOL};
use crate::{AlmError, Result};

/// Box half-width used to truncate lifted multiplier variables so that
/// subdifferential LPs stay bounded.
pub(super) const LIFT_BOUND: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct CplqPiece {
    pub region: Polyhedron,
    pub quad: DMatrix<f64>,
    pub lin: DVector<f64>,
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct CplqPieces {
    dim: usize,
    pieces: Vec<CplqPiece>,
}

impl CplqPieces {
    /// Validates shape, convexity of each piece (A_i PSD), nonempty
    /// regions, and value agreement on sampled points of pairwise region
    /// intersections (absolute error at most 1e-9).
    pub fn new(pieces: Vec<CplqPiece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(AlmError::input("cplq: no pieces"));
        };
        let dim = first.region.dim;
        for (i, p) in pieces.iter().enumerate() {
            if p.region.dim != dim || p.quad.nrows() != dim || p.quad.ncols() != dim
                || p.lin.len() != dim
            {
                return Err(AlmError::input(format!("cplq piece {}: dimension mismatch", i)));
            }
            if (&p.quad - p.quad.transpose()).amax() > 1e-12 {
                return Err(AlmError::input(format!("cplq piece {}: A not symmetric", i)));
            }
            let eig = p.quad.symmetric_eigenvalues();
            if eig.iter().any(|&l| l < -1e-9 * (1.0 + eig.amax())) {
                return Err(AlmError::input(format!("cplq piece {}: A not PSD", i)));
            }
            p.region.feasible_point().map_err(|_| {
                AlmError::input(format!("cplq piece {}: empty region", i))
            })?;
        }
        let out = Self { dim, pieces };
        out.check_boundary_agreement()?;
        Ok(out)
    }

    fn check_boundary_agreement(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1A5);
        for i in 0..self.pieces.len() {
            for j in (i + 1)..self.pieces.len() {
                let meet = intersect(&self.pieces[i].region, &self.pieces[j].region)?;
                let Ok(p0) = meet.feasible_point() else {
                    continue;
                };
                let mut pts = vec![p0];
                for _ in 0..4 {
                    let c = DVector::from_fn(self.dim, |_, _| rng.random_range(-1.0..1.0));
                    match meet.lp_optimize(&c) {
                        Ok(LpOutcome::Optimal(x)) | Ok(LpOutcome::DegenerateObjective(x)) => {
                            pts.push(x)
                        }
                        _ => {}
                    }
                }
                let mids: Vec<_> = pts
                    .windows(2)
                    .map(|w| (&w[0] + &w[1]) * 0.5)
                    .collect();
                pts.extend(mids);
                for p in &pts {
                    let vi = self.piece_value(i, p);
                    let vj = self.piece_value(j, p);
                    if (vi - vj).abs() > 1e-9 {
                        return Err(AlmError::input(format!(
                            "cplq pieces {} and {} disagree by {:.3e} on their shared region",
                            i,
                            j,
                            (vi - vj).abs()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[CplqPiece] {
        &self.pieces
    }

    pub fn piece_value(&self, i: usize, z: &DVector<f64>) -> f64 {
        let p = &self.pieces[i];
        0.5 * (&p.quad * z).dot(z) + p.lin.dot(z) + p.constant
    }

    pub fn piece_gradient(&self, i: usize, z: &DVector<f64>) -> DVector<f64> {
        let p = &self.pieces[i];
        &p.quad * z + &p.lin
    }

    pub fn active_pieces(&self, z: &DVector<f64>) -> Vec<usize> {
        (0..self.pieces.len())
            .filter(|&i| self.pieces[i].region.feasible(z))
            .collect()
    }

    /// Value at `z`: the largest value over tolerance-active pieces, +inf
    /// outside the union. Active pieces agree on shared boundaries, but a
    /// point just inside one region is also tolerance-active for its
    /// neighbors, whose extrapolated values sit below the true one by
    /// convexity; taking the maximum always evaluates the containing piece
    /// up to a curvature-times-tolerance-squared error.
    pub fn value(&self, z: &DVector<f64>) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in self.active_pieces(z) {
            best = best.max(self.piece_value(i, z));
        }
        if best == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            best
        }
    }

    /// Proximal point and envelope value: one constrained QP per piece,
    /// best objective wins, ties go to the lowest piece index.
    pub fn prox(&self, r: f64, y: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let mut best: Option<(DVector<f64>, f64)> = None;
        for (i, p) in self.pieces.iter().enumerate() {
            let h = &p.quad + DMatrix::<f64>::identity(self.dim, self.dim) / r;
            let q = &p.lin - y / r;
            let x = qp_solve(&h, &q, &p.region.a, &p.region.b, &p.region.e, &p.region.d, Some(y))
                .map_err(|e| AlmError::numerical(format!("cplq prox, piece {}: {}", i, e)))?;
            let total = self.piece_value(i, &x) + (y - &x).norm_squared() / (2.0 * r);
            if best.as_ref().map_or(true, |(_, b)| total < *b) {
                best = Some((x, total));
            }
        }
        Ok(best.expect("cplq has at least one piece"))
    }

    /// Directional derivative dg(z)(w): the active-piece gradient pairing
    /// when `w` points into some active region, +inf when it leaves the
    /// domain.
    pub fn subderivative(&self, z: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let active = self.active_pieces(z);
        if active.is_empty() {
            return Err(AlmError::input("cplq subderivative: z outside the domain"));
        }
        for &i in &active {
            let t = self.pieces[i].region.tangent_cone(z, DEFAULT_ACTIVE_TOL)?;
            if t.contains(w, 1e-8) {
                return Ok(self.piece_gradient(i, z).dot(w));
            }
        }
        Ok(f64::INFINITY)
    }

    /// Exact second subderivative: <A_i w, w> when w lies in the critical
    /// cone of some active piece for the shifted normal v_i = v - A_i z -
    /// a_i, and +inf otherwise.
    pub fn second_subderivative(
        &self,
        z: &DVector<f64>,
        v: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<f64> {
        let active = self.active_pieces(z);
        if active.is_empty() {
            return Err(AlmError::input("cplq d2: z outside the domain"));
        }
        for &i in &active {
            let p = &self.pieces[i];
            let vi = v - self.piece_gradient(i, z);
            let t = p.region.tangent_cone(z, DEFAULT_ACTIVE_TOL)?;
            let in_tangent = t.contains(w, 1e-8);
            let orth = vi.dot(w).abs() <= 1e-8 * (1.0 + vi.norm() * w.norm());
            if in_tangent && orth {
                return Ok((&p.quad * w).dot(w));
            }
        }
        Ok(f64::INFINITY)
    }

    /// Lifted polyhedral description of the subdifferential at `z` per the
    /// piecewise normal-cone intersection formula; the first `dim`
    /// coordinates are the subgradient, the rest are truncated multipliers.
    pub fn subdiff_polyhedron(&self, z: &DVector<f64>) -> Result<Polyhedron> {
        let active = self.active_pieces(z);
        if active.is_empty() {
            return Err(AlmError::input("cplq subdifferential: z outside the domain"));
        }
        let blocks: Vec<(Polyhedron, DVector<f64>)> = active
            .iter()
            .map(|&i| (self.pieces[i].region.clone(), self.piece_gradient(i, z)))
            .collect();
        lifted_normal_intersection(self.dim, z, &blocks)
    }

    /// Per-active-piece critical cones K_{C_i}(z, v_i); their union is the
    /// critical cone of the function.
    pub fn critical_cones(&self, z: &DVector<f64>, v: &DVector<f64>) -> Result<Vec<ConeRep>> {
        let active = self.active_pieces(z);
        if active.is_empty() {
            return Err(AlmError::input("cplq critical cone: z outside the domain"));
        }
        let mut out = Vec::new();
        for &i in &active {
            let vi = v - self.piece_gradient(i, z);
            out.push(self.pieces[i].region.critical_cone_set(z, &vi, 1e-8)?);
        }
        Ok(out)
    }
}

fn intersect(p: &Polyhedron, q: &Polyhedron) -> Result<Polyhedron> {
    let dim = p.dim;
    let mut a = DMatrix::<f64>::zeros(p.a.nrows() + q.a.nrows(), dim);
    a.view_mut((0, 0), (p.a.nrows(), dim)).copy_from(&p.a);
    a.view_mut((p.a.nrows(), 0), (q.a.nrows(), dim)).copy_from(&q.a);
    let mut b = DVector::<f64>::zeros(p.b.len() + q.b.len());
    b.rows_mut(0, p.b.len()).copy_from(&p.b);
    b.rows_mut(p.b.len(), q.b.len()).copy_from(&q.b);
    let mut e = DMatrix::<f64>::zeros(p.e.nrows() + q.e.nrows(), dim);
    e.view_mut((0, 0), (p.e.nrows(), dim)).copy_from(&p.e);
    e.view_mut((p.e.nrows(), 0), (q.e.nrows(), dim)).copy_from(&q.e);
    let mut d = DVector::<f64>::zeros(p.d.len() + q.d.len());
    d.rows_mut(0, p.d.len()).copy_from(&p.d);
    d.rows_mut(p.d.len(), q.d.len()).copy_from(&q.d);
    Polyhedron::new(dim, a, b, e, d)
}

/// The set `{v : v - offset_i in N_{R_i}(z) for all i}` lifted to variables
/// `(v, lambda_1, mu_1, ..., lambda_k, mu_k)` with the multipliers
/// truncated to [0, LIFT_BOUND] and [-LIFT_BOUND, LIFT_BOUND].
pub(super) fn lifted_normal_intersection(
    m: usize,
    z: &DVector<f64>,
    blocks: &[(Polyhedron, DVector<f64>)],
) -> Result<Polyhedron> {
    struct Block {
        act: Vec<usize>,
        neq: usize,
    }
    let mut layout = Vec::new();
    let mut total = m;
    for (region, _) in blocks {
        let act = region.active_inequalities(z, DEFAULT_ACTIVE_TOL);
        let neq = region.e.nrows();
        total += act.len() + neq;
        layout.push(Block { act, neq });
    }

    let eq_rows = m * blocks.len();
    let mut e = DMatrix::<f64>::zeros(eq_rows, total);
    let mut d = DVector::<f64>::zeros(eq_rows);
    let mut ineq_rows = 0;
    for (bi, _) in blocks.iter().enumerate() {
        ineq_rows += 2 * layout[bi].act.len() + 2 * layout[bi].neq;
    }
    let mut a = DMatrix::<f64>::zeros(ineq_rows, total);
    let mut b = DVector::<f64>::zeros(ineq_rows);

    let mut col = m;
    let mut row_a = 0;
    for (bi, (region, offset)) in blocks.iter().enumerate() {
        let lay = &layout[bi];
        // Equality block: v - A_act^T lambda - E^T mu = offset.
        for r in 0..m {
            let er = bi * m + r;
            e[(er, r)] = 1.0;
            for (k, &i) in lay.act.iter().enumerate() {
                e[(er, col + k)] = -region.a[(i, r)];
            }
            for l in 0..lay.neq {
                e[(er, col + lay.act.len() + l)] = -region.e[(l, r)];
            }
            d[er] = offset[r];
        }
        // lambda in [0, LIFT_BOUND], mu in [-LIFT_BOUND, LIFT_BOUND].
        for k in 0..lay.act.len() {
            a[(row_a, col + k)] = -1.0;
            b[row_a] = 0.0;
            row_a += 1;
            a[(row_a, col + k)] = 1.0;
            b[row_a] = LIFT_BOUND;
            row_a += 1;
        }
        for l in 0..lay.neq {
            let c = col + lay.act.len() + l;
            a[(row_a, c)] = 1.0;
            b[row_a] = LIFT_BOUND;
            row_a += 1;
            a[(row_a, c)] = -1.0;
            b[row_a] = LIFT_BOUND;
            row_a += 1;
        }
        col += lay.act.len() + lay.neq;
    }
    Polyhedron::new(total, a, b, e, d)
}
