//! Augmented Lagrangian evaluation: value, partial gradients, multiplier
//! update, and the KKT residual.
//!
//! With r = 1/rho, the value is
//! `L(x,y,rho) = phi(x) + e_r g(Phi(x) + y/rho) - ||y||^2 / (2 rho)`
//! where `e_r g` is the Moreau envelope. Gradients follow by the chain
//! rule; the dual update is the envelope gradient itself.

use nalgebra::DVector;

use crate::geometry::DEFAULT_ACTIVE_TOL;
use crate::model::CompositeProblem;
use crate::{AlmError, Result};

pub struct AugEvalContext<'a> {
    pub problem: &'a CompositeProblem,
    pub rho: f64,
}

impl<'a> AugEvalContext<'a> {
    pub fn new(problem: &'a CompositeProblem, rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(AlmError::input("penalty rho must be positive"));
        }
        Ok(Self { problem, rho })
    }

    /// Shifted composition point `Phi(x) + y/rho`.
    fn shifted(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.problem.mapping.eval(x)? + y / self.rho)
    }

    pub fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let r = 1.0 / self.rho;
        let env = self.problem.g.moreau_value(r, &self.shifted(x, y)?)?;
        Ok(self.problem.phi.eval(x)? + env - y.norm_squared() / (2.0 * self.rho))
    }

    pub fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let r = 1.0 / self.rho;
        let e_grad = self.problem.g.moreau_grad(r, &self.shifted(x, y)?)?;
        Ok(self.problem.phi.grad(x)? + self.problem.mapping.jacobian(x)?.transpose() * e_grad)
    }

    pub fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let r = 1.0 / self.rho;
        let p = self.problem.g.prox(r, &self.shifted(x, y)?)?;
        Ok(self.problem.mapping.eval(x)? - p)
    }

    /// `y+ = y + rho * grad_y = envelope gradient at the shifted point`.
    /// Satisfies `y+ ∈ ∂g(Phi(x) - (y+ - y)/rho)` by the resolvent
    /// characterization.
    pub fn dual_update(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let r = 1.0 / self.rho;
        self.problem.g.moreau_grad(r, &self.shifted(x, y)?)
    }
}

/// KKT residual
/// `dist(-grad_x L(x,y), N_Theta(x)) + ||Phi(x) - prox_g(Phi(x) + y)||`
/// with the prox at scale 1. Requires x feasible for Theta.
pub fn kkt_residual(
    problem: &CompositeProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let grad_l = problem.lagrangian_grad_x(x, y)?;
    let stationarity = problem
        .theta
        .normal_cone_distance(x, &(-grad_l), DEFAULT_ACTIVE_TOL)?;
    let phi_x = problem.mapping.eval(x)?;
    let p = problem.g.prox(1.0, &(&phi_x + y))?;
    Ok(stationarity + (phi_x - p).norm())
}
