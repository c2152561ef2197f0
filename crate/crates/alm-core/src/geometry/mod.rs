//! Dense polyhedral geometry: projections, normal-cone distances, tangent
//! and critical cones, plus the LP/NNLS/QP kernels they sit on.
//!
//! Everything here is desk scale: dense matrices, active-set methods, no
//! sparsity. Kernels are pure and re-entrant.

pub(crate) mod dense;
mod nnls;
mod qp;
mod simplex;

pub use nnls::{nnls_solve, NnlsSolution};
pub use qp::qp_solve;
pub use simplex::LpOutcome;

use nalgebra::{DMatrix, DVector};

use crate::{AlmError, Result};
use dense::{lstsq, rank};

/// Default per-row activity tolerance; applied as `tol * (1 + |b_i|)`.
pub const DEFAULT_ACTIVE_TOL: f64 = 1e-9;

/// Convex polyhedron `{x : A x <= b, E x = d}` in R^dim.
///
/// Empty `A` and `E` mean the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub e: DMatrix<f64>,
    pub d: DVector<f64>,
    pub dim: usize,
}

impl Polyhedron {
    pub fn new(
        dim: usize,
        a: DMatrix<f64>,
        b: DVector<f64>,
        e: DMatrix<f64>,
        d: DVector<f64>,
    ) -> Result<Self> {
        if (a.nrows() > 0 && a.ncols() != dim) || (e.nrows() > 0 && e.ncols() != dim) {
            return Err(AlmError::input("polyhedron: constraint width != dim"));
        }
        if a.nrows() != b.len() || e.nrows() != d.len() {
            return Err(AlmError::input("polyhedron: row/rhs count mismatch"));
        }
        let a = if a.nrows() == 0 { DMatrix::zeros(0, dim) } else { a };
        let e = if e.nrows() == 0 { DMatrix::zeros(0, dim) } else { e };
        Ok(Self { a, b, e, d, dim })
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            a: DMatrix::zeros(0, dim),
            b: DVector::zeros(0),
            e: DMatrix::zeros(0, dim),
            d: DVector::zeros(0),
            dim,
        }
    }

    /// `{x : x >= 0}`.
    pub fn nonneg_orthant(dim: usize) -> Self {
        Self {
            a: -DMatrix::<f64>::identity(dim, dim),
            b: DVector::zeros(dim),
            e: DMatrix::zeros(0, dim),
            d: DVector::zeros(0),
            dim,
        }
    }

    /// `{x : x <= 0}`.
    pub fn nonpos_orthant(dim: usize) -> Self {
        Self {
            a: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
            e: DMatrix::zeros(0, dim),
            d: DVector::zeros(0),
            dim,
        }
    }

    /// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
    pub fn box_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let n = lo.len();
        if hi.len() != n {
            return Err(AlmError::input("box: bound length mismatch"));
        }
        if lo.iter().zip(hi).any(|(l, h)| l > h) {
            return Err(AlmError::input("box: lo > hi"));
        }
        let mut a = DMatrix::<f64>::zeros(2 * n, n);
        let mut b = DVector::<f64>::zeros(2 * n);
        for j in 0..n {
            a[(2 * j, j)] = 1.0;
            b[2 * j] = hi[j];
            a[(2 * j + 1, j)] = -1.0;
            b[2 * j + 1] = -lo[j];
        }
        Self::new(n, a, b, DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn feasible(&self, x: &DVector<f64>) -> bool {
        self.feasible_within(x, DEFAULT_ACTIVE_TOL)
    }

    /// Feasibility with a caller-chosen tolerance (still scaled per row by
    /// `1 + |b_i|`). Difference-quotient code shrinks this with the step.
    pub fn feasible_with_tol(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.feasible_within(x, tol)
    }

    fn feasible_within(&self, x: &DVector<f64>, tol: f64) -> bool {
        for i in 0..self.a.nrows() {
            let slack = self.b[i] - self.a.row(i).transpose().dot(x);
            if slack < -tol * (1.0 + self.b[i].abs()) {
                return false;
            }
        }
        for j in 0..self.e.nrows() {
            let gap = self.e.row(j).transpose().dot(x) - self.d[j];
            if gap.abs() > tol * (1.0 + self.d[j].abs()) {
                return false;
            }
        }
        true
    }

    /// Indices of inequality rows active at `x`, with per-row scaling
    /// `tol_act * (1 + |b_i|)`.
    pub fn active_inequalities(&self, x: &DVector<f64>, tol_act: f64) -> Vec<usize> {
        (0..self.a.nrows())
            .filter(|&i| {
                (self.a.row(i).transpose().dot(x) - self.b[i]).abs()
                    <= tol_act * (1.0 + self.b[i].abs())
            })
            .collect()
    }

    /// Some feasible point (a basic solution), or an input error if empty.
    pub fn feasible_point(&self) -> Result<DVector<f64>> {
        match self.lp_optimize(&DVector::zeros(self.dim))? {
            LpOutcome::Optimal(x) | LpOutcome::DegenerateObjective(x) => Ok(x),
            LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        }
    }

    /// Euclidean projection of `y`. The projection QP's KKT certificate is
    /// verified to 1e-9 internally.
    pub fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if self.a.nrows() == 0 && self.e.nrows() == 0 {
            return Ok(y.clone());
        }
        let h = DMatrix::identity(self.dim, self.dim);
        qp_solve(&h, &(-y), &self.a, &self.b, &self.e, &self.d, Some(y))
    }

    /// `|| y - project(y) ||`.
    pub fn dist(&self, y: &DVector<f64>) -> Result<f64> {
        Ok((y - self.project(y)?).norm())
    }

    /// Distance from `v` to the normal cone `N(x) = {A_I^T lam + E^T mu : lam >= 0}`
    /// with `I` the active set at `x`. With nothing active and no equalities
    /// the normal cone is `{0}` and the distance is `||v||`.
    pub fn normal_cone_distance(
        &self,
        x: &DVector<f64>,
        v: &DVector<f64>,
        tol_act: f64,
    ) -> Result<f64> {
        if !self.feasible_within(x, tol_act) {
            return Err(AlmError::input(
                "normal_cone_distance: point is not feasible within tol_act",
            ));
        }
        let act = self.active_inequalities(x, tol_act);
        if act.is_empty() && self.e.nrows() == 0 {
            return Ok(v.norm());
        }
        let mut g = DMatrix::<f64>::zeros(self.dim, act.len());
        for (k, &i) in act.iter().enumerate() {
            g.set_column(k, &self.a.row(i).transpose());
        }
        let sol = nnls_solve(&g, &self.e.transpose(), v)?;
        Ok(sol.residual)
    }

    /// Tangent cone at `x` in halfspace form: `{w : A_I w <= 0, E w = 0}`.
    pub fn tangent_cone(&self, x: &DVector<f64>, tol_act: f64) -> Result<ConeRep> {
        if !self.feasible_within(x, tol_act) {
            return Err(AlmError::input("tangent_cone: point is not feasible"));
        }
        let act = self.active_inequalities(x, tol_act);
        let mut a = DMatrix::<f64>::zeros(act.len(), self.dim);
        for (k, &i) in act.iter().enumerate() {
            a.row_mut(k).copy_from(&self.a.row(i));
        }
        ConeRep::from_halfspace(self.dim, a, self.e.clone())
    }

    /// Critical cone `T(x) ∩ [v]^⊥` in halfspace form. Requires `v` to be a
    /// normal at `x` within `tol`.
    pub fn critical_cone_set(
        &self,
        x: &DVector<f64>,
        v: &DVector<f64>,
        tol: f64,
    ) -> Result<ConeRep> {
        let ncd = self.normal_cone_distance(x, v, tol)?;
        if ncd > tol {
            return Err(AlmError::input(format!(
                "critical_cone_set: v is not a normal at x (distance {:.3e} > tol {:.1e})",
                ncd, tol
            )));
        }
        let tangent = self.tangent_cone(x, tol)?;
        let tp = tangent.halfspace.expect("tangent cone is halfspace-form");
        if v.norm() == 0.0 {
            return ConeRep::from_halfspace(self.dim, tp.a, tp.e);
        }
        let mut e = DMatrix::<f64>::zeros(tp.e.nrows() + 1, self.dim);
        e.view_mut((0, 0), (tp.e.nrows(), self.dim)).copy_from(&tp.e);
        e.row_mut(tp.e.nrows()).copy_from(&v.transpose());
        ConeRep::from_halfspace(self.dim, tp.a, e)
    }

    /// `max c^T x` over the polyhedron: a basic optimal solution, an
    /// unbounded flag, or a feasible point flagged "degenerate objective"
    /// when `c = 0`.
    pub fn lp_optimize(&self, c: &DVector<f64>) -> Result<LpOutcome> {
        simplex::lp_maximize(&self.a, &self.b, &self.e, &self.d, c)
    }

    /// All vertices (extreme points) by active-set enumeration. Desk scale
    /// only: the subset count is capped, beyond it is a capability error.
    pub fn vertices(&self) -> Result<Vec<DVector<f64>>> {
        let n = self.dim;
        let re = rank(&self.e);
        let needed = n - re.min(n);
        let m = self.a.nrows();
        if needed > m {
            // Not enough rows to pin a vertex unless equalities already do.
            if needed == 0 {
                let x = lstsq(&self.e, &self.d);
                if self.feasible(&x) {
                    return Ok(vec![x]);
                }
            }
            return Ok(vec![]);
        }
        if binomial(m, needed) > 200_000 {
            return Err(AlmError::capability(
                "vertex enumeration beyond desk scale",
            ));
        }
        let me = self.e.nrows();
        let mut out: Vec<DVector<f64>> = Vec::new();
        for subset in subsets(m, needed) {
            let mut mat = DMatrix::<f64>::zeros(me + needed, n);
            let mut rhs = DVector::<f64>::zeros(me + needed);
            mat.view_mut((0, 0), (me, n)).copy_from(&self.e);
            rhs.rows_mut(0, me).copy_from(&self.d);
            for (k, &i) in subset.iter().enumerate() {
                mat.row_mut(me + k).copy_from(&self.a.row(i));
                rhs[me + k] = self.b[i];
            }
            if rank(&mat) < n {
                continue;
            }
            let x = lstsq(&mat, &rhs);
            if (&mat * &x - &rhs).norm() > 1e-8 * (1.0 + rhs.norm()) {
                continue;
            }
            if !self.feasible(&x) {
                continue;
            }
            if !out.iter().any(|u| (u - &x).norm() < 1e-8 * (1.0 + x.norm())) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// Which representations a [`ConeRep`] currently carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeForm {
    Halfspace,
    Generators,
    Both,
}

/// Polyhedral cone, as halfspaces `{w : A w <= 0, E w = 0}`, as the conic
/// hull of generators, or both. Always contains the origin.
#[derive(Debug, Clone)]
pub struct ConeRep {
    pub dim: usize,
    pub form: ConeForm,
    pub halfspace: Option<Polyhedron>,
    pub generators: Option<Vec<DVector<f64>>>,
}

impl ConeRep {
    pub fn from_halfspace(dim: usize, a: DMatrix<f64>, e: DMatrix<f64>) -> Result<Self> {
        let b = DVector::zeros(a.nrows());
        let d = DVector::zeros(e.nrows());
        let p = Polyhedron::new(dim, a, b, e, d)?;
        Ok(Self {
            dim,
            form: ConeForm::Halfspace,
            halfspace: Some(p),
            generators: None,
        })
    }

    pub fn from_generators(dim: usize, generators: Vec<DVector<f64>>) -> Result<Self> {
        if generators.iter().any(|g| g.len() != dim) {
            return Err(AlmError::input("cone generators: dimension mismatch"));
        }
        Ok(Self {
            dim,
            form: ConeForm::Generators,
            halfspace: None,
            generators: Some(generators),
        })
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            dim,
            form: ConeForm::Halfspace,
            halfspace: Some(Polyhedron::whole_space(dim)),
            generators: None,
        }
    }

    /// Membership with tolerance `tol * (1 + ||w||)`. Prefers the halfspace
    /// form; falls back to an NNLS distance to the conic hull.
    pub fn contains(&self, w: &DVector<f64>, tol: f64) -> bool {
        let scale = tol * (1.0 + w.norm());
        if let Some(p) = &self.halfspace {
            for i in 0..p.a.nrows() {
                if p.a.row(i).transpose().dot(w) > scale {
                    return false;
                }
            }
            for j in 0..p.e.nrows() {
                if p.e.row(j).transpose().dot(w).abs() > scale {
                    return false;
                }
            }
            return true;
        }
        let gens = self.generators.as_ref().expect("cone has at least one form");
        let mut g = DMatrix::<f64>::zeros(self.dim, gens.len());
        for (k, v) in gens.iter().enumerate() {
            g.set_column(k, v);
        }
        match nnls_solve(&g, &DMatrix::zeros(self.dim, 0), w) {
            Ok(sol) => sol.residual <= scale,
            Err(_) => false,
        }
    }

    /// Ensure a generator list is present, deriving it from the halfspace
    /// form if needed.
    pub fn with_generators(mut self) -> Result<Self> {
        if self.generators.is_some() {
            return Ok(self);
        }
        let p = self
            .halfspace
            .as_ref()
            .ok_or_else(|| AlmError::input("cone has no representation"))?;
        self.generators = Some(cone_generators(p)?);
        self.form = ConeForm::Both;
        Ok(self)
    }

    pub fn generator_list(&self) -> Option<&[DVector<f64>]> {
        self.generators.as_deref()
    }
}

/// Generators of the polyhedral cone `{w : A w <= 0, E w = 0}`: vertices of
/// the cone truncated by the unit box, normalized. Subspace directions show
/// up as +/- pairs.
pub fn cone_generators(cone: &Polyhedron) -> Result<Vec<DVector<f64>>> {
    let n = cone.dim;
    let mc = cone.a.nrows();
    let mut a = DMatrix::<f64>::zeros(mc + 2 * n, n);
    let mut b = DVector::<f64>::zeros(mc + 2 * n);
    a.view_mut((0, 0), (mc, n)).copy_from(&cone.a);
    for j in 0..n {
        a[(mc + 2 * j, j)] = 1.0;
        b[mc + 2 * j] = 1.0;
        a[(mc + 2 * j + 1, j)] = -1.0;
        b[mc + 2 * j + 1] = 1.0;
    }
    let trunc = Polyhedron::new(n, a, b, cone.e.clone(), cone.d.clone())?;
    let mut gens: Vec<DVector<f64>> = Vec::new();
    for v in trunc.vertices()? {
        let norm = v.norm();
        if norm <= 1e-8 {
            continue;
        }
        let g = v / norm;
        if !gens.iter().any(|u| (u - &g).norm() < 1e-8) {
            gens.push(g);
        }
    }
    Ok(gens)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > 1 << 40 {
            return u128::MAX;
        }
    }
    acc
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    /// The multiplier segment {y >= 0, y1 + 2 y2 = 1}.
    fn segment() -> Polyhedron {
        Polyhedron::new(
            2,
            -DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
            v(&[1.0]),
        )
        .unwrap()
    }

    #[test]
    fn project_box_clamps() {
        let p = Polyhedron::box_bounds(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((p.project(&v(&[2.0, -1.0])).unwrap() - v(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn project_whole_space_is_identity() {
        let p = Polyhedron::whole_space(3);
        let y = v(&[0.1, -2.0, 7.0]);
        assert_eq!(p.project(&y).unwrap(), y);
    }

    #[test]
    fn project_segment_matches_line_search_oracle() {
        // Independent oracle: parameterize the segment from (1,0) to (0,0.5)
        // and minimize the distance on a fine grid.
        let y = v(&[2.0, 0.0]);
        let mut best = (f64::INFINITY, v(&[0.0, 0.0]));
        for k in 0..=100_000 {
            let s = k as f64 / 100_000.0;
            let pnt = v(&[1.0 - s, 0.5 * s]);
            let dist = (&pnt - &y).norm();
            if dist < best.0 {
                best = (dist, pnt);
            }
        }
        let proj = segment().project(&y).unwrap();
        assert!((proj - &best.1).norm() < 1e-4);
        assert!((&best.1 - v(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn normal_cone_distance_orthant() {
        let p = Polyhedron::nonneg_orthant(2);
        let d = p
            .normal_cone_distance(&v(&[0.0, 1.0]), &v(&[-1.0, 1.0]), DEFAULT_ACTIVE_TOL)
            .unwrap();
        assert!((d - 1.0).abs() < 1e-10);
    }

    #[test]
    fn normal_cone_distance_whole_space() {
        let p = Polyhedron::whole_space(2);
        let d = p
            .normal_cone_distance(&v(&[5.0, -3.0]), &v(&[3.0, 4.0]), DEFAULT_ACTIVE_TOL)
            .unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn normal_cone_member_has_zero_distance() {
        let p = Polyhedron::nonneg_orthant(2);
        // At the origin both constraints are active; N = nonpositive orthant.
        let d = p
            .normal_cone_distance(&v(&[0.0, 0.0]), &v(&[-2.0, -0.5]), DEFAULT_ACTIVE_TOL)
            .unwrap();
        assert!(d < 1e-10);
    }

    #[test]
    fn normal_cone_distance_rejects_infeasible_point() {
        let p = Polyhedron::nonneg_orthant(2);
        let err = p
            .normal_cone_distance(&v(&[-1.0, 0.0]), &v(&[0.0, 0.0]), DEFAULT_ACTIVE_TOL)
            .unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
    }

    #[test]
    fn tangent_cone_orthant_edge() {
        let p = Polyhedron::nonneg_orthant(2);
        let t = p.tangent_cone(&v(&[0.0, 1.0]), DEFAULT_ACTIVE_TOL).unwrap();
        assert!(t.contains(&v(&[1.0, -5.0]), 1e-9));
        assert!(t.contains(&v(&[0.0, 3.0]), 1e-9));
        assert!(!t.contains(&v(&[-0.1, 0.0]), 1e-9));
    }

    #[test]
    fn tangent_cone_interior_is_whole_space() {
        let p = Polyhedron::nonneg_orthant(2);
        let t = p.tangent_cone(&v(&[1.0, 1.0]), DEFAULT_ACTIVE_TOL).unwrap();
        assert!(t.contains(&v(&[-10.0, 10.0]), 1e-9));
        assert_eq!(t.halfspace.as_ref().unwrap().a.nrows(), 0);
    }

    #[test]
    fn tangent_cone_redundant_rows() {
        let p = Polyhedron::new(
            1,
            DMatrix::from_row_slice(2, 1, &[1.0, 2.0]),
            DVector::zeros(2),
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
        )
        .unwrap();
        let t = p.tangent_cone(&v(&[0.0]), DEFAULT_ACTIVE_TOL).unwrap();
        assert!(t.contains(&v(&[-1.0]), 1e-9));
        assert!(!t.contains(&v(&[1.0]), 1e-9));
    }

    #[test]
    fn critical_cone_orthant() {
        let p = Polyhedron::nonneg_orthant(2);
        let k = p
            .critical_cone_set(&v(&[0.0, 0.0]), &v(&[-1.0, 0.0]), 1e-8)
            .unwrap();
        assert!(k.contains(&v(&[0.0, 1.0]), 1e-9));
        assert!(!k.contains(&v(&[0.0, -1.0]), 1e-9));
        assert!(!k.contains(&v(&[1.0, 0.0]), 1e-9));
        assert!(!k.contains(&v(&[-1.0, 0.0]), 1e-9));
    }

    #[test]
    fn critical_cone_zero_normal_is_tangent() {
        let p = Polyhedron::nonneg_orthant(2);
        let k = p
            .critical_cone_set(&v(&[0.0, 1.0]), &v(&[0.0, 0.0]), 1e-8)
            .unwrap();
        assert!(k.contains(&v(&[1.0, -5.0]), 1e-9));
        assert!(!k.contains(&v(&[-0.1, 0.0]), 1e-9));
    }

    #[test]
    fn critical_cone_whole_space_rejects_nonzero_v() {
        let p = Polyhedron::whole_space(2);
        let err = p
            .critical_cone_set(&v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 1e-8)
            .unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
        let k = p
            .critical_cone_set(&v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 1e-8)
            .unwrap();
        assert!(k.contains(&v(&[3.0, -4.0]), 1e-9));
    }

    #[test]
    fn dist_to_segment() {
        let m = segment();
        assert!(m.dist(&v(&[1.0, 0.0])).unwrap() < 1e-10);
        assert!((m.dist(&v(&[2.0, 0.0])).unwrap() - 1.0).abs() < 1e-9);
        // Point-line distance from the origin to y1 + 2 y2 = 1 is 1/sqrt(5);
        // the foot (0.2, 0.4) is on the segment.
        let want = 1.0 / 5.0_f64.sqrt();
        assert!((m.dist(&v(&[0.0, 0.0])).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn lp_over_segment() {
        let m = segment();
        match m.lp_optimize(&v(&[1.0, 0.0])).unwrap() {
            LpOutcome::Optimal(x) => assert!((x - v(&[1.0, 0.0])).norm() < 1e-9),
            other => panic!("expected optimal vertex, got {:?}", other),
        }
        assert!(matches!(
            m.lp_optimize(&v(&[0.0, 0.0])).unwrap(),
            LpOutcome::DegenerateObjective(_)
        ));
        let ray = Polyhedron::nonneg_orthant(1);
        assert!(matches!(
            ray.lp_optimize(&v(&[1.0])).unwrap(),
            LpOutcome::Unbounded
        ));
    }

    #[test]
    fn segment_vertices() {
        let mut verts = segment().vertices().unwrap();
        verts.sort_by(|p, q| p[0].partial_cmp(&q[0]).unwrap());
        assert_eq!(verts.len(), 2);
        assert!((&verts[0] - v(&[0.0, 0.5])).norm() < 1e-9);
        assert!((&verts[1] - v(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn generators_of_orthant_tangent() {
        let p = Polyhedron::nonneg_orthant(2);
        let t = p
            .tangent_cone(&v(&[0.0, 1.0]), DEFAULT_ACTIVE_TOL)
            .unwrap()
            .with_generators()
            .unwrap();
        let gens = t.generator_list().unwrap();
        // Halfspace {w1 >= 0}: plus/minus e2 and rays into w1 > 0.
        assert!(gens.iter().all(|g| g[0] >= -1e-9));
        assert!(gens.iter().any(|g| g[1] > 0.5));
        assert!(gens.iter().any(|g| g[1] < -0.5));
        // Form consistency on conic combinations and on violating points.
        for g in gens {
            assert!(t.contains(g, 1e-9));
        }
        assert!(!t.contains(&v(&[-1.0, 0.0]), 1e-9));
    }

    #[test]
    fn projection_firmly_nonexpansive_and_idempotent() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = Polyhedron::box_bounds(&[-1.0, 0.0, -2.0], &[1.0, 2.0, 0.0]).unwrap();
        for _ in 0..50 {
            let y1 = DVector::from_fn(3, |_, _| rng.random_range(-3.0..3.0));
            let y2 = DVector::from_fn(3, |_, _| rng.random_range(-3.0..3.0));
            let p1 = p.project(&y1).unwrap();
            let p2 = p.project(&y2).unwrap();
            let lhs = (&p1 - &p2).norm_squared();
            let rhs = (&p1 - &p2).dot(&(&y1 - &y2));
            assert!(lhs <= rhs + 1e-10);
            assert!((p.project(&p1).unwrap() - &p1).norm() < 1e-12);
        }
    }
}
