//! Second-order cone `{(u0, ur) : ||ur|| <= u0}` in R^dim, with the
//! closed-form three-case projection and the decomposable reduction at
//! boundary points: Xi(u) = ||ur|| - u0 with outer function the indicator
//! of the nonpositive half-line. The apex has no reduction; second-order
//! queries there are a capability error.

use nalgebra::{DMatrix, DVector};

use super::decomposable::DecomposableSpec;
use super::ConvexFunction;
use crate::geometry::ConeRep;
use crate::model::SmoothMapping;
use crate::{AlmError, Result};

fn split(z: &DVector<f64>) -> (f64, DVector<f64>) {
    (z[0], z.rows(1, z.len() - 1).into_owned())
}

pub fn value(z: &DVector<f64>) -> f64 {
    value_with_tol(z, 1e-12)
}

pub fn value_with_tol(z: &DVector<f64>, tol: f64) -> f64 {
    let (z0, zr) = split(z);
    if zr.norm() <= z0 + tol * (1.0 + z.norm()) {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Three-case projection: identity inside the cone, zero inside the polar,
/// and ((u0 + ||ur||)/2)(1, ur/||ur||) in between.
pub fn project(y: &DVector<f64>) -> DVector<f64> {
    let (y0, yr) = split(y);
    let nr = yr.norm();
    if nr <= y0 {
        return y.clone();
    }
    if nr <= -y0 {
        return DVector::zeros(y.len());
    }
    let c = 0.5 * (y0 + nr);
    let mut out = DVector::zeros(y.len());
    out[0] = c;
    let unit = yr / nr;
    out.rows_mut(1, y.len() - 1).copy_from(&(unit * c));
    out
}

/// Indicator subderivative: 0 on the tangent cone, +inf off it.
pub fn subderivative(z: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    if !value(z).is_finite() {
        return Err(AlmError::input("soc subderivative: z outside the cone"));
    }
    let (z0, zr) = split(z);
    let nr = zr.norm();
    let scale = 1.0 + z.norm();
    if z.norm() <= 1e-12 {
        // Apex: tangent cone is the cone itself.
        return Ok(if value(w).is_finite() { 0.0 } else { f64::INFINITY });
    }
    if nr < z0 - 1e-9 * scale {
        return Ok(0.0);
    }
    // Boundary away from the apex: {w : <zr/||zr||, wr> - w0 <= 0}.
    let (w0, wr) = split(w);
    let slope = zr.dot(&wr) / nr - w0;
    Ok(if slope <= 1e-8 { 0.0 } else { f64::INFINITY })
}

/// The decomposable reduction at a boundary point away from the apex.
pub fn reduction(z: &DVector<f64>) -> Result<DecomposableSpec> {
    let n = z.len();
    let (z0, zr) = split(z);
    let nr = zr.norm();
    let scale = 1.0 + z.norm();
    if z.norm() <= 1e-12 {
        return Err(AlmError::capability(
            "second-order cone has no reduction at the apex",
        ));
    }
    if (nr - z0).abs() > 1e-9 * scale {
        return Err(AlmError::input("soc reduction: z is not a boundary point"));
    }
    let inner = SmoothMapping::new(
        n,
        1,
        |u| {
            let (u0, ur) = split(u);
            DVector::from_element(1, ur.norm() - u0)
        },
        |u| {
            let (_, ur) = split(u);
            let nr = ur.norm();
            let mut row = DMatrix::zeros(1, u.len());
            row[(0, 0)] = -1.0;
            for i in 0..ur.len() {
                row[(0, 1 + i)] = ur[i] / nr;
            }
            row
        },
    )
    .with_second_directional(|u, y, w| {
        // y0 * Hess(||ur||) w, padded with a zero leading coordinate.
        let (_, ur) = split(u);
        let (_, wr) = split(w);
        let nr = ur.norm();
        let unit = ur / nr;
        let hr = (&wr - &unit * unit.dot(&wr)) / nr;
        let mut out = DVector::zeros(u.len());
        out.rows_mut(1, u.len() - 1).copy_from(&(hr * y[0]));
        out
    });
    DecomposableSpec::new(
        z.clone(),
        ConvexFunction::NonpositiveOrthantIndicator { dim: 1 },
        inner,
    )
}

/// Exact second subderivative of the indicator. Interior points give 0,
/// boundary points route through the reduction, the apex is a capability
/// error.
pub fn second_subderivative(z: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    if !value(z).is_finite() {
        return Err(AlmError::input("soc d2: z outside the cone"));
    }
    let (z0, zr) = split(z);
    let scale = 1.0 + z.norm();
    if z.norm() <= 1e-12 {
        return Err(AlmError::capability(
            "second-order cone second subderivative undefined at the apex (no reduction)",
        ));
    }
    if zr.norm() < z0 - 1e-9 * scale {
        if v.norm() > 1e-8 {
            return Err(AlmError::input("soc d2: nonzero normal at an interior point"));
        }
        return Ok(0.0);
    }
    reduction(z)?.second_subderivative(v, w)
}

/// The critical cone of the indicator at (z, v), polyhedral in every
/// supported case: whole space at interior points, the halfspace
/// `{w : <zr/||zr||, wr> <= w0}` for a zero multiplier, and its boundary
/// hyperplane for a positive multiplier. The apex is a capability error.
pub fn critical_cone(z: &DVector<f64>, v: &DVector<f64>) -> Result<ConeRep> {
    if !value(z).is_finite() {
        return Err(AlmError::input("soc critical cone: z outside the cone"));
    }
    let n = z.len();
    let (z0, zr) = split(z);
    let scale = 1.0 + z.norm();
    if z.norm() <= 1e-12 {
        return Err(AlmError::capability(
            "second-order cone critical cone unsupported at the apex",
        ));
    }
    if zr.norm() < z0 - 1e-9 * scale {
        if v.norm() > 1e-8 {
            return Err(AlmError::input(
                "soc critical cone: nonzero normal at an interior point",
            ));
        }
        return Ok(ConeRep::whole_space(n));
    }
    let mu = -v[0];
    if mu < -1e-8 {
        return Err(AlmError::input("soc critical cone: v is not a normal"));
    }
    let mut row = DMatrix::zeros(1, n);
    row[(0, 0)] = -1.0;
    let nr = zr.norm();
    for i in 0..zr.len() {
        row[(0, 1 + i)] = zr[i] / nr;
    }
    if mu > 1e-8 {
        ConeRep::from_halfspace(n, DMatrix::zeros(0, n), row)
    } else {
        ConeRep::from_halfspace(n, row, DMatrix::zeros(0, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn projection_three_cases() {
        // Inside.
        let y = v(&[2.0, 1.0, 0.5]);
        assert_eq!(project(&y), y);
        // Inside the polar cone.
        assert!(project(&v(&[-3.0, 1.0, 0.0])).norm() < 1e-15);
        // In between: y = (0, 2, 0) -> (1, 1, 0).
        assert!((project(&v(&[0.0, 2.0, 0.0])) - v(&[1.0, 1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn boundary_projection_kkt() {
        // The residual y - p must be a normal at p: proportional to
        // (-1, pr/||pr||) with nonnegative factor... sign convention:
        // y - p in N(p) means <y - p, u - p> <= 0 for all u in the cone.
        let y = v(&[0.5, 3.0, -1.0]);
        let p = project(&y);
        let (p0, pr) = split(&p);
        assert!((pr.norm() - p0).abs() < 1e-12);
        for u in [v(&[1.0, 0.0, 0.0]), v(&[2.0, 1.0, 1.0]), v(&[5.0, -3.0, 0.0])] {
            assert!((&y - &p).dot(&(&u - &p)) <= 1e-10);
        }
    }

    #[test]
    fn second_subderivative_boundary_curvature() {
        // z = (1, 1, 0), v = (-1, 1, 0) (mu = 1): d2 = mu * (||wr||^2 -
        // <ur_hat, wr>^2)/||zr|| on {DXi w = 0}, which for w = (w0, w0, w2)
        // gives w2^2.
        let z = v(&[1.0, 1.0, 0.0]);
        let vn = v(&[-1.0, 1.0, 0.0]);
        let w = v(&[0.7, 0.7, 2.0]);
        let d2 = second_subderivative(&z, &vn, &w).unwrap();
        assert!((d2 - 4.0).abs() < 1e-10);
        // Off the hyperplane DXi w = 0 the value is +inf.
        let w_off = v(&[1.0, 0.0, 0.0]);
        assert!(second_subderivative(&z, &vn, &w_off).unwrap().is_infinite());
    }

    #[test]
    fn zero_multiplier_keeps_halfspace() {
        let z = v(&[1.0, 1.0, 0.0]);
        let zero = v(&[0.0, 0.0, 0.0]);
        // mu = 0: finite (value 0) on the whole tangent halfspace.
        let w_in = v(&[0.0, -1.0, 0.3]);
        assert_eq!(second_subderivative(&z, &zero, &w_in).unwrap(), 0.0);
        let w_out = v(&[0.0, 1.0, 0.0]);
        assert!(second_subderivative(&z, &zero, &w_out).unwrap().is_infinite());
    }

    #[test]
    fn apex_is_capability_error() {
        let z = v(&[0.0, 0.0, 0.0]);
        let err = second_subderivative(&z, &z, &v(&[1.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, AlmError::Capability(_)));
    }

    #[test]
    fn interior_is_flat() {
        let z = v(&[2.0, 0.5, 0.5]);
        let zero = v(&[0.0, 0.0, 0.0]);
        assert_eq!(second_subderivative(&z, &zero, &v(&[9.0, 1.0, -4.0])).unwrap(), 0.0);
        assert_eq!(subderivative(&z, &v(&[-5.0, 2.0, 2.0])).unwrap(), 0.0);
    }

    #[test]
    fn critical_cone_forms() {
        let z = v(&[1.0, 1.0, 0.0]);
        // Positive multiplier: hyperplane {-w0 + w1 = 0}.
        let k = critical_cone(&z, &v(&[-2.0, 2.0, 0.0])).unwrap();
        assert!(k.contains(&v(&[0.7, 0.7, 3.0]), 1e-9));
        assert!(!k.contains(&v(&[0.0, -1.0, 0.0]), 1e-9));
        // Zero multiplier: halfspace.
        let k0 = critical_cone(&z, &v(&[0.0, 0.0, 0.0])).unwrap();
        assert!(k0.contains(&v(&[0.0, -1.0, 0.0]), 1e-9));
        assert!(!k0.contains(&v(&[0.0, 1.0, 0.0]), 1e-9));
    }
}
