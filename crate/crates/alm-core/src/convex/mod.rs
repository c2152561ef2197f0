//! The catalog of convex outer functions g: indicators of simple sets,
//! weighted L1, piecewise linear-quadratic functions, and the second-order
//! and PSD cones. Each variant carries exact proximal mappings, Moreau
//! envelope values and gradients, subdifferential tests and samplers, and
//! exact second subderivatives where a closed form exists.

mod cplq;
mod decomposable;
mod psd;
mod soc;

pub use cplq::{CplqPiece, CplqPieces};
pub use decomposable::DecomposableSpec;
pub use psd::{smat, svec, svec_len};

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{ConeRep, LpOutcome, Polyhedron, DEFAULT_ACTIVE_TOL};
use crate::{AlmError, Result};

/// Default absolute tolerance for membership tests (subgradients, critical
/// cones).
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum ConvexFunction {
    /// Indicator of `{z : z <= 0}`.
    NonpositiveOrthantIndicator { dim: usize },
    /// Indicator of an axis-aligned box.
    BoxIndicator { lo: DVector<f64>, hi: DVector<f64> },
    /// Indicator of a general polyhedron.
    PolyhedronIndicator(Polyhedron),
    /// `z -> weight * ||z||_1`.
    L1Norm { dim: usize, weight: f64 },
    /// Convex piecewise linear-quadratic.
    Cplq(CplqPieces),
    /// Indicator of `{(z0, zr) : ||zr|| <= z0}`.
    SecondOrderConeIndicator { dim: usize },
    /// Indicator of the PSD cone of `order x order` symmetric matrices in
    /// the scaled upper-triangular vector encoding.
    PsdConeIndicator { order: usize },
}

impl ConvexFunction {
    pub fn dim(&self) -> usize {
        match self {
            Self::NonpositiveOrthantIndicator { dim } => *dim,
            Self::BoxIndicator { lo, .. } => lo.len(),
            Self::PolyhedronIndicator(p) => p.dim,
            Self::L1Norm { dim, .. } => *dim,
            Self::Cplq(f) => f.dim(),
            Self::SecondOrderConeIndicator { dim } => *dim,
            Self::PsdConeIndicator { order } => svec_len(*order),
        }
    }

    /// True when the function (and hence its subdifferential) is
    /// polyhedral.
    pub fn is_polyhedral(&self) -> bool {
        !matches!(
            self,
            Self::SecondOrderConeIndicator { .. } | Self::PsdConeIndicator { .. }
        )
    }

    /// Extended-real value; indicators return +inf outside their set.
    pub fn value(&self, z: &DVector<f64>) -> f64 {
        assert_eq!(z.len(), self.dim(), "convex function dimension mismatch");
        match self {
            Self::NonpositiveOrthantIndicator { .. } => {
                if z.iter().all(|&zi| zi <= 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::BoxIndicator { lo, hi } => {
                let inside = (0..z.len()).all(|i| lo[i] <= z[i] && z[i] <= hi[i]);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::PolyhedronIndicator(p) => {
                if p.feasible(z) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::L1Norm { weight, .. } => weight * z.iter().map(|zi| zi.abs()).sum::<f64>(),
            Self::Cplq(f) => f.value(z),
            Self::SecondOrderConeIndicator { .. } => soc::value(z),
            Self::PsdConeIndicator { order } => {
                psd::value(*order, z).expect("dimension checked above")
            }
        }
    }

    /// Like [`Self::value`] but with a caller-chosen membership tolerance
    /// for the set-indicator variants with non-trivial boundary tests.
    /// Difference-quotient estimators shrink the tolerance with the step so
    /// that O(t^2) boundary violations of curved sets stay visible; the
    /// fixed default would swallow them below t ~ 1e-6. Finite-valued
    /// variants and the sign-exact orthant/box tests ignore the tolerance.
    pub fn value_with_tol(&self, z: &DVector<f64>, tol: f64) -> f64 {
        match self {
            Self::PolyhedronIndicator(p) => {
                assert_eq!(z.len(), self.dim(), "convex function dimension mismatch");
                if p.feasible_with_tol(z, tol) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::SecondOrderConeIndicator { .. } => {
                assert_eq!(z.len(), self.dim(), "convex function dimension mismatch");
                soc::value_with_tol(z, tol)
            }
            Self::PsdConeIndicator { order } => {
                assert_eq!(z.len(), self.dim(), "convex function dimension mismatch");
                psd::value_with_tol(*order, z, tol).expect("dimension checked above")
            }
            _ => self.value(z),
        }
    }

    /// `argmin_z g(z) + (1/2r) ||y - z||^2`.
    pub fn prox(&self, r: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_prox_args(r, y)?;
        match self {
            Self::NonpositiveOrthantIndicator { .. } => Ok(y.map(|yi| yi.min(0.0))),
            Self::BoxIndicator { lo, hi } => {
                Ok(DVector::from_fn(y.len(), |i, _| y[i].clamp(lo[i], hi[i])))
            }
            Self::PolyhedronIndicator(p) => p.project(y),
            Self::L1Norm { weight, .. } => {
                let tau = r * weight;
                Ok(y.map(|yi| yi.signum() * (yi.abs() - tau).max(0.0)))
            }
            Self::Cplq(f) => Ok(f.prox(r, y)?.0),
            Self::SecondOrderConeIndicator { .. } => Ok(soc::project(y)),
            Self::PsdConeIndicator { order } => psd::project(*order, y),
        }
    }

    /// Moreau envelope value `g(prox) + (1/2r) ||y - prox||^2`; for
    /// indicators this is `dist^2 / 2r`.
    pub fn moreau_value(&self, r: f64, y: &DVector<f64>) -> Result<f64> {
        self.check_prox_args(r, y)?;
        match self {
            Self::L1Norm { weight, .. } => {
                let p = self.prox(r, y)?;
                Ok(weight * p.iter().map(|t| t.abs()).sum::<f64>()
                    + (y - &p).norm_squared() / (2.0 * r))
            }
            Self::Cplq(f) => Ok(f.prox(r, y)?.1),
            _ => {
                let p = self.prox(r, y)?;
                Ok((y - &p).norm_squared() / (2.0 * r))
            }
        }
    }

    /// Envelope gradient `(y - prox)/r`, adjusted by at most a few ulps per
    /// coordinate so that `prox + r * grad` reconstructs `y` exactly
    /// whenever some floating-point value achieves it.
    pub fn moreau_grad(&self, r: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.prox(r, y)?;
        Ok(DVector::from_fn(y.len(), |i, _| {
            nudge_reconstruct(p[i], r, y[i])
        }))
    }

    /// Resolvent test: `v in ∂g(z)` iff `prox(1, z + v) = z` within `tol`.
    /// Total in (z, v): a z outside the domain simply fails the test, which
    /// keeps the check usable on iterates perturbed at roundoff scale.
    pub fn subdiff_contains(&self, z: &DVector<f64>, v: &DVector<f64>, tol: f64) -> Result<bool> {
        if v.len() != self.dim() {
            return Err(AlmError::input("subdiff_contains: dimension mismatch"));
        }
        let p = self.prox(1.0, &(z + v))?;
        Ok((p - z).norm() <= tol)
    }

    /// Points of the (polyhedral) subdifferential at `z`, found by
    /// maximizing coordinate and random linear functionals over its
    /// polyhedral description. All LP vertices discovered are returned, and
    /// the list is padded with convex combinations up to `count`.
    pub fn subdiff_sample(
        &self,
        z: &DVector<f64>,
        count: usize,
        seed: u64,
    ) -> Result<Vec<DVector<f64>>> {
        if !self.value(z).is_finite() {
            return Err(AlmError::input("subdiff_sample: g(z) is not finite"));
        }
        let m = self.dim();
        let desc = match self {
            Self::NonpositiveOrthantIndicator { .. } => {
                let mut rows = RowBuilder::new(m);
                for i in 0..m {
                    if z[i] >= -1e-9 {
                        rows.ineq_coord(i, -1.0, 0.0);
                        rows.ineq_coord(i, 1.0, cplq::LIFT_BOUND);
                    } else {
                        rows.eq_coord(i, 0.0);
                    }
                }
                rows.build()?
            }
            Self::BoxIndicator { lo, hi } => {
                let mut rows = RowBuilder::new(m);
                for i in 0..m {
                    let at_lo = (z[i] - lo[i]).abs() <= 1e-9 * (1.0 + lo[i].abs());
                    let at_hi = (z[i] - hi[i]).abs() <= 1e-9 * (1.0 + hi[i].abs());
                    match (at_lo, at_hi) {
                        (true, true) => {
                            rows.ineq_coord(i, 1.0, cplq::LIFT_BOUND);
                            rows.ineq_coord(i, -1.0, cplq::LIFT_BOUND);
                        }
                        (true, false) => {
                            rows.ineq_coord(i, 1.0, 0.0);
                            rows.ineq_coord(i, -1.0, cplq::LIFT_BOUND);
                        }
                        (false, true) => {
                            rows.ineq_coord(i, -1.0, 0.0);
                            rows.ineq_coord(i, 1.0, cplq::LIFT_BOUND);
                        }
                        (false, false) => rows.eq_coord(i, 0.0),
                    }
                }
                rows.build()?
            }
            Self::L1Norm { weight, .. } => {
                let mut rows = RowBuilder::new(m);
                for i in 0..m {
                    if z[i] > 1e-9 {
                        rows.eq_coord(i, *weight);
                    } else if z[i] < -1e-9 {
                        rows.eq_coord(i, -weight);
                    } else {
                        rows.ineq_coord(i, 1.0, *weight);
                        rows.ineq_coord(i, -1.0, *weight);
                    }
                }
                rows.build()?
            }
            Self::PolyhedronIndicator(p) => cplq::lifted_normal_intersection(
                m,
                z,
                &[(p.clone(), DVector::zeros(m))],
            )?,
            Self::Cplq(f) => f.subdiff_polyhedron(z)?,
            _ => {
                return Err(AlmError::capability(
                    "subdiff_sample requires a polyhedral variant",
                ))
            }
        };
        probe_subdiff(&desc, m, count, seed)
    }

    /// Exact directional derivative dg(z)(w).
    pub fn subderivative_value(&self, z: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        if !self.value(z).is_finite() {
            return Err(AlmError::input("subderivative: g(z) is not finite"));
        }
        if w.len() != self.dim() {
            return Err(AlmError::input("subderivative: dimension mismatch"));
        }
        match self {
            Self::NonpositiveOrthantIndicator { .. } => {
                let ok = (0..z.len()).all(|i| z[i] < -1e-9 || w[i] <= DEFAULT_MEMBERSHIP_TOL);
                Ok(if ok { 0.0 } else { f64::INFINITY })
            }
            Self::BoxIndicator { lo, hi } => {
                let ok = (0..z.len()).all(|i| {
                    let at_lo = (z[i] - lo[i]).abs() <= 1e-9 * (1.0 + lo[i].abs());
                    let at_hi = (z[i] - hi[i]).abs() <= 1e-9 * (1.0 + hi[i].abs());
                    (!at_hi || w[i] <= DEFAULT_MEMBERSHIP_TOL)
                        && (!at_lo || w[i] >= -DEFAULT_MEMBERSHIP_TOL)
                });
                Ok(if ok { 0.0 } else { f64::INFINITY })
            }
            Self::PolyhedronIndicator(p) => {
                let t = p.tangent_cone(z, DEFAULT_ACTIVE_TOL)?;
                Ok(if t.contains(w, DEFAULT_MEMBERSHIP_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                })
            }
            Self::L1Norm { weight, .. } => {
                let mut acc = 0.0;
                for i in 0..z.len() {
                    acc += if z[i] > 1e-9 {
                        w[i]
                    } else if z[i] < -1e-9 {
                        -w[i]
                    } else {
                        w[i].abs()
                    };
                }
                Ok(weight * acc)
            }
            Self::Cplq(f) => f.subderivative(z, w),
            Self::SecondOrderConeIndicator { .. } => soc::subderivative(z, w),
            Self::PsdConeIndicator { order } => psd::subderivative(*order, z, w),
        }
    }

    /// Exact second subderivative d²g(z, v)(w). Polyhedral variants give
    /// the indicator of the critical cone; CPLQ gives the active-piece
    /// quadratic form; the second-order cone routes through its
    /// decomposable reduction. PSD is unsupported.
    pub fn second_subderivative_exact(
        &self,
        z: &DVector<f64>,
        v: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<f64> {
        if let Self::PsdConeIndicator { .. } = self {
            return Err(AlmError::capability(
                "exact second subderivative unsupported for the PSD cone",
            ));
        }
        if !self.subdiff_contains(z, v, DEFAULT_MEMBERSHIP_TOL)? {
            return Err(AlmError::input(
                "second subderivative: v is not a subgradient at z",
            ));
        }
        match self {
            Self::Cplq(f) => f.second_subderivative(z, v, w),
            Self::SecondOrderConeIndicator { .. } => soc::second_subderivative(z, v, w),
            _ => {
                let member = self.critical_cone_membership(z, v, w, DEFAULT_MEMBERSHIP_TOL)?;
                Ok(if member { 0.0 } else { f64::INFINITY })
            }
        }
    }

    /// True iff w is in the critical cone K_g(z, v): the subderivative is
    /// finite and equals <v, w> within tol.
    pub fn critical_cone_membership(
        &self,
        z: &DVector<f64>,
        v: &DVector<f64>,
        w: &DVector<f64>,
        tol: f64,
    ) -> Result<bool> {
        if !self.subdiff_contains(z, v, tol)? {
            return Err(AlmError::input(
                "critical cone membership: v is not a subgradient at z",
            ));
        }
        let dg = self.subderivative_value(z, w)?;
        if !dg.is_finite() {
            return Ok(false);
        }
        Ok((v.dot(w) - dg).abs() <= tol)
    }

    /// Polyhedral pieces whose union is the critical cone K_g(z, v). One
    /// piece for all variants except CPLQ (one per active piece). PSD is
    /// unsupported.
    pub fn critical_cone_pieces(
        &self,
        z: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<Vec<ConeRep>> {
        if let Self::PsdConeIndicator { .. } = self {
            return Err(AlmError::capability(
                "critical cone pieces unsupported for the PSD cone",
            ));
        }
        if !self.subdiff_contains(z, v, DEFAULT_MEMBERSHIP_TOL)? {
            return Err(AlmError::input(
                "critical cone pieces: v is not a subgradient at z",
            ));
        }
        match self {
            Self::NonpositiveOrthantIndicator { dim } => Ok(vec![Polyhedron::nonpos_orthant(*dim)
                .critical_cone_set(z, v, DEFAULT_MEMBERSHIP_TOL)?]),
            Self::BoxIndicator { lo, hi } => {
                Ok(vec![Polyhedron::box_bounds(lo.as_slice(), hi.as_slice())?
                    .critical_cone_set(z, v, DEFAULT_MEMBERSHIP_TOL)?])
            }
            Self::PolyhedronIndicator(p) => {
                Ok(vec![p.critical_cone_set(z, v, DEFAULT_MEMBERSHIP_TOL)?])
            }
            Self::L1Norm { dim, weight } => {
                let mut rows = RowBuilder::new(*dim);
                for i in 0..*dim {
                    if z[i].abs() > 1e-9 {
                        continue;
                    }
                    let gap = 1e-9 * (1.0 + weight.abs());
                    if v[i] >= weight - gap {
                        rows.ineq_coord(i, -1.0, 0.0);
                    } else if v[i] <= -weight + gap {
                        rows.ineq_coord(i, 1.0, 0.0);
                    } else {
                        rows.eq_coord(i, 0.0);
                    }
                }
                let p = rows.build()?;
                Ok(vec![ConeRep::from_halfspace(*dim, p.a, p.e)?])
            }
            Self::Cplq(f) => f.critical_cones(z, v),
            Self::SecondOrderConeIndicator { .. } => Ok(vec![soc::critical_cone(z, v)?]),
            Self::PsdConeIndicator { .. } => unreachable!("handled above"),
        }
    }

    fn check_prox_args(&self, r: f64, y: &DVector<f64>) -> Result<()> {
        if !(r > 0.0) {
            return Err(AlmError::input("prox requires r > 0"));
        }
        if y.len() != self.dim() {
            return Err(AlmError::input("prox: dimension mismatch"));
        }
        Ok(())
    }
}

/// Coordinate-sparse polyhedron assembly for per-coordinate descriptions.
struct RowBuilder {
    dim: usize,
    ineq: Vec<(usize, f64, f64)>,
    eq: Vec<(usize, f64)>,
}

impl RowBuilder {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            ineq: Vec::new(),
            eq: Vec::new(),
        }
    }

    /// Row `sign * x_i <= rhs`.
    fn ineq_coord(&mut self, i: usize, sign: f64, rhs: f64) {
        self.ineq.push((i, sign, rhs));
    }

    /// Row `x_i = rhs`.
    fn eq_coord(&mut self, i: usize, rhs: f64) {
        self.eq.push((i, rhs));
    }

    fn build(self) -> Result<Polyhedron> {
        let mut a = DMatrix::<f64>::zeros(self.ineq.len(), self.dim);
        let mut b = DVector::<f64>::zeros(self.ineq.len());
        for (r, (i, s, rhs)) in self.ineq.iter().enumerate() {
            a[(r, *i)] = *s;
            b[r] = *rhs;
        }
        let mut e = DMatrix::<f64>::zeros(self.eq.len(), self.dim);
        let mut d = DVector::<f64>::zeros(self.eq.len());
        for (r, (i, rhs)) in self.eq.iter().enumerate() {
            e[(r, *i)] = 1.0;
            d[r] = *rhs;
        }
        Polyhedron::new(self.dim, a, b, e, d)
    }
}

/// LP probing over a polyhedral subdifferential description whose first `m`
/// coordinates are the subgradient.
fn probe_subdiff(
    desc: &Polyhedron,
    m: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    fn push_unique(pts: &mut Vec<DVector<f64>>, x: &DVector<f64>, m: usize) {
        let v = x.rows(0, m).into_owned();
        if !pts.iter().any(|u| (u - &v).norm() < 1e-9) {
            pts.push(v);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<DVector<f64>> = Vec::new();
    let mut objective = DVector::<f64>::zeros(desc.dim);
    for j in 0..m {
        for s in [1.0_f64, -1.0] {
            objective.fill(0.0);
            objective[j] = s;
            match desc.lp_optimize(&objective)? {
                LpOutcome::Optimal(x) | LpOutcome::DegenerateObjective(x) => {
                    push_unique(&mut pts, &x, m)
                }
                LpOutcome::Unbounded => {}
            }
        }
    }
    let mut tries = 0;
    while pts.len() < count && tries < 4 * count + 8 {
        tries += 1;
        objective.fill(0.0);
        for j in 0..m {
            objective[j] = rng.random_range(-1.0..1.0);
        }
        if objective.amax() < 1e-3 {
            continue;
        }
        match desc.lp_optimize(&objective)? {
            LpOutcome::Optimal(x) | LpOutcome::DegenerateObjective(x) => {
                push_unique(&mut pts, &x, m)
            }
            LpOutcome::Unbounded => {}
        }
    }
    if pts.is_empty() {
        return Err(AlmError::numerical("subdifferential probing found no points"));
    }
    let base = pts.clone();
    let mut k = 0;
    while pts.len() < count {
        if base.len() == 1 {
            pts.push(base[0].clone());
        } else {
            let i = k % base.len();
            let j = (k + 1) % base.len();
            let t = rng.random_range(0.2..0.8);
            pts.push(&base[i] * (1.0 - t) + &base[j] * t);
        }
        k += 1;
    }
    Ok(pts)
}

/// One ulp toward +inf or -inf.
fn ulp_step(x: f64, up: bool) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x == 0.0 {
        let tiny = f64::from_bits(1);
        return if up { tiny } else { -tiny };
    }
    let bits = x.to_bits();
    let next = if (x > 0.0) == up { bits + 1 } else { bits - 1 };
    f64::from_bits(next)
}

/// `(y - p)/r`, nudged by up to 8 ulps so that `p + r*g == y` exactly when
/// some float `g` achieves it. No float achieves it when the prox moves a
/// coordinate past zero into a coarser binade (the rounding preimage of y
/// under the sum then contains no representable gradient); the nearest
/// achievable sum is within one ulp of y and we return its gradient.
fn nudge_reconstruct(p: f64, r: f64, y: f64) -> f64 {
    let g0 = (y - p) / r;
    let err0 = ((p + r * g0) - y).abs();
    if err0 == 0.0 {
        return g0;
    }
    let mut best = g0;
    let mut best_err = err0;
    for dir in [true, false] {
        let mut g = g0;
        for _ in 0..8 {
            g = ulp_step(g, dir);
            let e = ((p + r * g) - y).abs();
            if e < best_err {
                best = g;
                best_err = e;
                if e == 0.0 {
                    return best;
                }
            }
        }
    }
    best
}
