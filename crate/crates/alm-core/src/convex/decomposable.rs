//! Local decompositions g = theta ∘ Xi around a base point, with Xi smooth,
//! Xi(base) = 0, and theta sublinear. Supplies the chain rule for exact
//! second subderivatives of reducible functions (the second-order cone
//! indicator away from the apex being the worked case).

use nalgebra::DVector;

use super::ConvexFunction;
use crate::model::SmoothMapping;
use crate::{AlmError, Result};

#[derive(Clone)]
pub struct DecomposableSpec {
    pub base: DVector<f64>,
    pub outer: ConvexFunction,
    pub inner: SmoothMapping,
}

impl DecomposableSpec {
    pub fn new(base: DVector<f64>, outer: ConvexFunction, inner: SmoothMapping) -> Result<Self> {
        if inner.dim_in != base.len() {
            return Err(AlmError::input("decomposable: base/inner dim mismatch"));
        }
        if outer.dim() != inner.dim_out {
            return Err(AlmError::input("decomposable: outer/inner dim mismatch"));
        }
        let at_base = inner.eval(&base)?;
        if at_base.norm() > 1e-12 {
            return Err(AlmError::input("decomposable: Xi(base) must vanish"));
        }
        if outer.value(&DVector::zeros(outer.dim())) != 0.0 {
            return Err(AlmError::input("decomposable: theta(0) must be 0"));
        }
        Ok(Self { base, outer, inner })
    }

    /// The Lagrange multiplier of the reduction: mu with
    /// `DXi(base)^T mu = v` and `mu in ∂theta(0)`.
    pub fn multiplier(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let j = self.inner.jacobian(&self.base)?;
        let mu = crate::geometry::dense::lstsq(&j.transpose(), v);
        let res = (j.transpose() * &mu - v).norm();
        if res > 1e-8 * (1.0 + v.norm()) {
            return Err(AlmError::input(
                "decomposable: v is not in the range of DXi(base)^T",
            ));
        }
        if !self
            .outer
            .subdiff_contains(&DVector::zeros(self.outer.dim()), &mu, 1e-8)?
        {
            return Err(AlmError::input(
                "decomposable: multiplier is not a subgradient of theta at 0",
            ));
        }
        Ok(mu)
    }

    /// Exact second subderivative of g = theta ∘ Xi at the base point:
    ///
    ///   d²g(base, v)(w) = <mu, D²Xi(base)(w,w)> + d²theta(0, mu)(DXi(base) w).
    pub fn second_subderivative(&self, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let mu = self.multiplier(v)?;
        let curvature = self.inner.second_directional(&self.base, &mu, w)?.dot(w);
        let s = self.inner.jacobian(&self.base)? * w;
        let outer_term = self
            .outer
            .second_subderivative_exact(&DVector::zeros(self.outer.dim()), &mu, &s)?;
        Ok(curvature + outer_term)
    }
}
