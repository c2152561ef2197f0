//! Problem data model: smooth objective phi, smooth inner map Phi, a convex
//! outer function g, and a polyhedral feasible set, together making up
//!
//!   minimize phi(x) + g(Phi(x))  subject to  x in Theta.
//!
//! Smooth pieces are supplied as callables; there is no expression parsing.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::convex::ConvexFunction;
use crate::geometry::Polyhedron;
use crate::{AlmError, Result};

type EvalFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type MapFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type JacFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type SecondDirFn =
    Arc<dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Twice continuously differentiable scalar function of n variables.
#[derive(Clone)]
pub struct SmoothFunction {
    pub dim: usize,
    eval: EvalFn,
    grad: GradFn,
    hess: Option<HessFn>,
}

impl SmoothFunction {
    pub fn new(
        dim: usize,
        eval: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            grad: Arc::new(grad),
            hess: None,
        }
    }

    pub fn with_hess(
        mut self,
        hess: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.hess = Some(Arc::new(hess));
        self
    }

    /// `0.5 x^T Q x + b^T x + c` with exact derivatives.
    pub fn quadratic(q: DMatrix<f64>, b: DVector<f64>, c: f64) -> Self {
        let dim = b.len();
        assert_eq!(q.nrows(), dim);
        assert_eq!(q.ncols(), dim);
        let q1 = Arc::new(q);
        let q2 = q1.clone();
        let q3 = q1.clone();
        let b1 = b.clone();
        Self::new(
            dim,
            move |x| 0.5 * (&*q1 * x).dot(x) + b1.dot(x) + c,
            move |x| &*q2 * x + &b,
        )
        .with_hess(move |_| (*q3).clone())
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        Ok((self.eval)(x))
    }

    pub fn grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        Ok((self.grad)(x))
    }

    pub fn hess(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        match &self.hess {
            Some(h) => Ok(h(x)),
            None => Err(AlmError::capability("smooth function has no Hessian")),
        }
    }

    pub fn has_hess(&self) -> bool {
        self.hess.is_some()
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(AlmError::input(format!(
                "smooth function expects dim {}, got {}",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }
}

/// Twice continuously differentiable map from R^n to R^m.
#[derive(Clone)]
pub struct SmoothMapping {
    pub dim_in: usize,
    pub dim_out: usize,
    eval: MapFn,
    jacobian: JacFn,
    second_directional: Option<SecondDirFn>,
}

impl SmoothMapping {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        eval: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        jacobian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim_in,
            dim_out,
            eval: Arc::new(eval),
            jacobian: Arc::new(jacobian),
            second_directional: None,
        }
    }

    /// Attach `(x, y, w) -> Hessian of <y, Phi> at x applied to w`.
    pub fn with_second_directional(
        mut self,
        f: impl Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        self.second_directional = Some(Arc::new(f));
        self
    }

    /// `x -> J x + c`, curvature-free.
    pub fn affine(j: DMatrix<f64>, c: DVector<f64>) -> Self {
        let dim_in = j.ncols();
        let dim_out = j.nrows();
        assert_eq!(c.len(), dim_out);
        let j1 = j.clone();
        Self::new(dim_in, dim_out, move |x| &j * x + &c, move |_| j1.clone())
            .with_second_directional(move |x, _, _| DVector::zeros(x.len()))
    }

    pub fn identity(n: usize) -> Self {
        Self::affine(DMatrix::identity(n, n), DVector::zeros(n))
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_in(x)?;
        Ok((self.eval)(x))
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_in(x)?;
        Ok((self.jacobian)(x))
    }

    /// `grad^2 <y, Phi>(x) w`.
    pub fn second_directional(
        &self,
        x: &DVector<f64>,
        y: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_in(x)?;
        self.check_in(w)?;
        if y.len() != self.dim_out {
            return Err(AlmError::input("second_directional: multiplier dim mismatch"));
        }
        match &self.second_directional {
            Some(f) => Ok(f(x, y, w)),
            None => Err(AlmError::capability("mapping has no second-order callable")),
        }
    }

    pub fn has_second_directional(&self) -> bool {
        self.second_directional.is_some()
    }

    fn check_in(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim_in {
            return Err(AlmError::input(format!(
                "mapping expects dim {}, got {}",
                self.dim_in,
                x.len()
            )));
        }
        Ok(())
    }
}

/// The full composite problem.
#[derive(Clone)]
pub struct CompositeProblem {
    pub phi: SmoothFunction,
    pub mapping: SmoothMapping,
    pub g: ConvexFunction,
    pub theta: Polyhedron,
}

impl CompositeProblem {
    pub fn new(
        phi: SmoothFunction,
        mapping: SmoothMapping,
        g: ConvexFunction,
        theta: Polyhedron,
    ) -> Result<Self> {
        if phi.dim != mapping.dim_in || theta.dim != phi.dim {
            return Err(AlmError::input("composite problem: primal dims disagree"));
        }
        if g.dim() != mapping.dim_out {
            return Err(AlmError::input("composite problem: image dims disagree"));
        }
        Ok(Self {
            phi,
            mapping,
            g,
            theta,
        })
    }

    /// Primal dimension n.
    pub fn n(&self) -> usize {
        self.phi.dim
    }

    /// Image dimension m.
    pub fn m(&self) -> usize {
        self.mapping.dim_out
    }

    /// `L(x, y) = phi(x) + <y, Phi(x)>`.
    pub fn lagrangian_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.phi.eval(x)? + y.dot(&self.mapping.eval(x)?))
    }

    /// `grad_x L(x, y) = grad phi(x) + J(x)^T y`.
    pub fn lagrangian_grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_pair(x, y)?;
        Ok(self.phi.grad(x)? + self.mapping.jacobian(x)?.transpose() * y)
    }

    /// `grad^2_xx L(x, y)`, assembled column by column from the mapping's
    /// second directional derivatives.
    pub fn lagrangian_hess_xx(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_pair(x, y)?;
        let n = self.n();
        let mut h = self.phi.hess(x)?;
        for j in 0..n {
            let mut ej = DVector::zeros(n);
            ej[j] = 1.0;
            let col = self.mapping.second_directional(x, y, &ej)?;
            for i in 0..n {
                h[(i, j)] += col[i];
            }
        }
        Ok(h)
    }

    fn check_pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() || y.len() != self.m() {
            return Err(AlmError::input("lagrangian: dimension mismatch"));
        }
        Ok(())
    }
}

/// Reference solution for a catalog problem: the stationary point, its full
/// multiplier set as a polyhedron, and one distinguished multiplier in it.
#[derive(Debug, Clone)]
pub struct KnownSolution {
    pub x_bar: DVector<f64>,
    pub multiplier_set: Polyhedron,
    pub reference_multiplier: DVector<f64>,
}

/// Central finite-difference step at `x`.
pub fn fd_step(x: &DVector<f64>) -> f64 {
    1e-6 * x.norm().max(1.0)
}

/// Central finite-difference gradient of a scalar callable.
pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let h = fd_step(x);
    let n = x.len();
    DVector::from_fn(n, |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    /// phi(x) = 0.5||x||^2 - x1, Phi(x) = (x1, 2 x1), g = indicator of the
    /// nonpositive orthant, Theta the whole plane.
    fn p1() -> CompositeProblem {
        let phi = SmoothFunction::quadratic(
            DMatrix::identity(2, 2),
            v(&[-1.0, 0.0]),
            0.0,
        );
        let mapping = SmoothMapping::affine(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]),
            DVector::zeros(2),
        );
        let g = ConvexFunction::NonpositiveOrthantIndicator { dim: 2 };
        CompositeProblem::new(phi, mapping, g, Polyhedron::whole_space(2)).unwrap()
    }

    #[test]
    fn lagrangian_values() {
        let p = p1();
        assert_eq!(p.lagrangian_value(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), 0.0);
        assert!(
            (p.lagrangian_value(&v(&[1.0, 0.0]), &v(&[0.0, 0.0])).unwrap() + 0.5).abs() < 1e-15
        );
        assert_eq!(p.lagrangian_value(&v(&[0.0, 0.0]), &v(&[3.0, 7.0])).unwrap(), 0.0);
    }

    #[test]
    fn lagrangian_grad() {
        let p = p1();
        let g = p.lagrangian_grad_x(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap();
        assert!(g.norm() < 1e-15);
        let g = p.lagrangian_grad_x(&v(&[0.1, 0.1]), &v(&[1.0, 0.0])).unwrap();
        assert!((g - v(&[0.1, 0.1])).norm() < 1e-15);
        // y = 0 reduces to grad phi.
        let x = v(&[0.3, -0.7]);
        let g = p.lagrangian_grad_x(&x, &v(&[0.0, 0.0])).unwrap();
        assert!((g - p.phi.grad(&x).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn lagrangian_hess_is_identity_for_p1() {
        let p = p1();
        let h = p.lagrangian_hess_xx(&v(&[0.4, -2.0]), &v(&[5.0, -3.0])).unwrap();
        assert!((h - DMatrix::<f64>::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn grad_matches_finite_differences() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = p1();
        for _ in 0..20 {
            let x = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let y = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let g = p.lagrangian_grad_x(&x, &y).unwrap();
            let fd = fd_gradient(|z| p.lagrangian_value(z, &y).unwrap(), &x);
            assert!((g - &fd).norm() <= 1e-5 * (1.0 + fd.norm()));
        }
    }

    #[test]
    fn lagrangian_affine_in_y() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let p = p1();
        for _ in 0..20 {
            let x = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let y1 = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let y2 = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let t = rng.random_range(0.0..1.0);
            let mix = p
                .lagrangian_value(&x, &(&y1 * (1.0 - t) + &y2 * t))
                .unwrap();
            let lin = (1.0 - t) * p.lagrangian_value(&x, &y1).unwrap()
                + t * p.lagrangian_value(&x, &y2).unwrap();
            assert!((mix - lin).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let p = p1();
        let err = p.lagrangian_value(&v(&[1.0]), &v(&[0.0, 0.0])).unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
    }

    #[test]
    fn missing_hessian_is_capability_error() {
        let f = SmoothFunction::new(1, |x| x[0].sin(), |x| v(&[x[0].cos()]));
        assert!(matches!(
            f.hess(&v(&[0.0])).unwrap_err(),
            AlmError::Capability(_)
        ));
    }
}
