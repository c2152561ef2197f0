//! Built-in problem catalog. Four frozen instances with hand-verified
//! solutions and multiplier sets; each exercises a different structure of
//! the composite model.

use nalgebra::{DMatrix, DVector};

use crate::auglag::kkt_residual;
use crate::convex::{svec, ConvexFunction};
use crate::geometry::Polyhedron;
use crate::model::{CompositeProblem, KnownSolution, SmoothFunction, SmoothMapping};
use crate::{AlmError, Result};

pub struct CatalogProblem {
    pub id: &'static str,
    pub problem: CompositeProblem,
    pub known: KnownSolution,
    /// Which structural phenomena the instance witnesses.
    pub notes: &'static str,
    /// Default (x0, y0) for solver runs.
    pub default_start: (DVector<f64>, DVector<f64>),
}

impl CatalogProblem {
    /// Checks the frozen solution data: KKT residual at the reference
    /// multiplier and at every vertex of the multiplier set.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-10;
        let r = kkt_residual(&self.problem, &self.known.x_bar, &self.known.reference_multiplier)?;
        if r > tol {
            return Err(AlmError::data(format!(
                "{}: reference multiplier residual {r:.3e}",
                self.id
            )));
        }
        for vtx in self.known.multiplier_set.vertices()? {
            let r = kkt_residual(&self.problem, &self.known.x_bar, &vtx)?;
            if r > tol {
                return Err(AlmError::data(format!(
                    "{}: multiplier vertex residual {r:.3e}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Degenerate linearly constrained quadratic: phi(x) = ||x||^2/2 - x1,
/// Phi(x) = (x1, 2x1), g the nonpositive-orthant indicator, Theta = R^2.
/// Solution x = 0 with a whole segment of multipliers
/// {y >= 0 : y1 + 2 y2 = 1}; the feasible set is affine, so rate
/// estimation against solution-set distances is meaningful.
pub fn p1() -> CatalogProblem {
    let phi = SmoothFunction::quadratic(
        DMatrix::identity(2, 2),
        DVector::from_row_slice(&[-1.0, 0.0]),
        0.0,
    );
    let mapping = SmoothMapping::affine(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]),
        DVector::zeros(2),
    );
    let g = ConvexFunction::NonpositiveOrthantIndicator { dim: 2 };
    let theta = Polyhedron::whole_space(2);
    let problem = CompositeProblem::new(phi, mapping, g, theta).unwrap();
    let multiplier_set = Polyhedron::new(
        2,
        -DMatrix::identity(2, 2),
        DVector::zeros(2),
        DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
        DVector::from_row_slice(&[1.0]),
    )
    .unwrap();
    CatalogProblem {
        id: "P1",
        problem,
        known: KnownSolution {
            x_bar: DVector::zeros(2),
            multiplier_set,
            reference_multiplier: DVector::from_row_slice(&[1.0, 0.0]),
        },
        notes: "degenerate inequality pair with a segment of multipliers; \
                second-order sufficiency holds at every one of them",
        default_start: (
            DVector::from_row_slice(&[0.5, 0.5]),
            DVector::zeros(2),
        ),
    }
}

/// Separable piecewise linear-quadratic composite: phi a quadratic with
/// linear tilt q = (0.5, -2, 1.5), Phi the first two coordinates, g the
/// unweighted L1 norm, Theta the unit box. The solution (0, -1, 1) sits
/// simultaneously on an L1 kink, a box face, and in the interior per
/// coordinate; frozen from a brute-force grid plus polishing oracle.
pub fn p2() -> CatalogProblem {
    let phi = SmoothFunction::quadratic(
        DMatrix::identity(3, 3),
        DVector::from_row_slice(&[-0.5, 2.0, -1.5]),
        0.0,
    );
    let mapping = SmoothMapping::affine(
        DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        DVector::zeros(2),
    );
    let g = ConvexFunction::L1Norm { dim: 2, weight: 1.0 };
    let theta = Polyhedron::box_bounds(&[-1.0; 3], &[1.0; 3]).unwrap();
    let problem = CompositeProblem::new(phi, mapping, g, theta).unwrap();
    let y_bar = DVector::from_row_slice(&[0.5, -1.0]);
    let multiplier_set = Polyhedron::new(
        2,
        DMatrix::zeros(0, 2),
        DVector::zeros(0),
        DMatrix::identity(2, 2),
        y_bar.clone(),
    )
    .unwrap();
    CatalogProblem {
        id: "P2",
        problem,
        known: KnownSolution {
            x_bar: DVector::from_row_slice(&[0.0, -1.0, 1.0]),
            multiplier_set,
            reference_multiplier: y_bar,
        },
        notes: "L1 composite over a box; the solution touches an L1 kink, \
                a box face, and a free coordinate at once, with a unique \
                multiplier forced by the interior coordinate",
        default_start: (DVector::zeros(3), DVector::zeros(2)),
    }
}

/// Second-order cone projection: phi(x) = ||x - c||^2/2 with c = (0,2,0),
/// Phi the identity, g the SOC indicator in R^3. The solution (1,1,0) is
/// on the cone boundary away from the apex, so the reduction-based
/// curvature oracle applies; the multiplier (-1,1,0) is unique.
pub fn p3() -> CatalogProblem {
    let c = DVector::from_row_slice(&[0.0, 2.0, 0.0]);
    let phi = SmoothFunction::quadratic(DMatrix::identity(3, 3), -&c, c.norm_squared() / 2.0);
    let problem = CompositeProblem::new(
        phi,
        SmoothMapping::identity(3),
        ConvexFunction::SecondOrderConeIndicator { dim: 3 },
        Polyhedron::whole_space(3),
    )
    .unwrap();
    let y_bar = DVector::from_row_slice(&[-1.0, 1.0, 0.0]);
    let multiplier_set = Polyhedron::new(
        3,
        DMatrix::zeros(0, 3),
        DVector::zeros(0),
        DMatrix::identity(3, 3),
        y_bar.clone(),
    )
    .unwrap();
    CatalogProblem {
        id: "P3",
        problem,
        known: KnownSolution {
            x_bar: DVector::from_row_slice(&[1.0, 1.0, 0.0]),
            multiplier_set,
            reference_multiplier: y_bar,
        },
        notes: "cone-boundary solution off the apex; curvature of the cone \
                contributes a nonzero second subderivative",
        default_start: (
            DVector::from_row_slice(&[0.5, 0.0, 0.5]),
            DVector::zeros(3),
        ),
    }
}

/// Nearest positive semidefinite matrix: phi(x) = ||x - svec(C)||^2/2 with
/// C = [[0.5, 1.5], [1.5, 0.5]], Phi the identity on the length-3 encoding,
/// g the PSD-cone indicator. The eigenvalue clamp gives the rank-one
/// solution [[1,1],[1,1]].
pub fn p4() -> CatalogProblem {
    let c = svec(&DMatrix::from_row_slice(2, 2, &[0.5, 1.5, 1.5, 0.5]));
    let phi = SmoothFunction::quadratic(DMatrix::identity(3, 3), -&c, c.norm_squared() / 2.0);
    let problem = CompositeProblem::new(
        phi,
        SmoothMapping::identity(3),
        ConvexFunction::PsdConeIndicator { order: 2 },
        Polyhedron::whole_space(3),
    )
    .unwrap();
    let x_bar = svec(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
    let y_bar = &c - &x_bar;
    let multiplier_set = Polyhedron::new(
        3,
        DMatrix::zeros(0, 3),
        DVector::zeros(0),
        DMatrix::identity(3, 3),
        y_bar.clone(),
    )
    .unwrap();
    CatalogProblem {
        id: "P4",
        problem,
        known: KnownSolution {
            x_bar,
            multiplier_set,
            reference_multiplier: y_bar,
        },
        notes: "spectral projection with a rank-one solution and a negative \
                semidefinite multiplier matrix; exact solution by eigenvalue \
                clamp",
        default_start: (
            DVector::from_row_slice(&[0.5, 0.0, 0.5]),
            DVector::zeros(3),
        ),
    }
}

pub fn all() -> Vec<CatalogProblem> {
    vec![p1(), p2(), p3(), p4()]
}

pub fn ids() -> Vec<&'static str> {
    vec!["P1", "P2", "P3", "P4"]
}

pub fn by_id(id: &str) -> Result<CatalogProblem> {
    let entry = match id.to_ascii_uppercase().as_str() {
        "P1" => p1(),
        "P2" => p2(),
        "P3" => p3(),
        "P4" => p4(),
        _ => {
            return Err(AlmError::input(format!(
                "unknown problem id {id:?}; known: P1, P2, P3, P4"
            )))
        }
    };
    entry.validate()?;
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_known_solutions_validate() {
        for entry in all() {
            entry.validate().unwrap();
        }
    }

    #[test]
    fn p1_multiplier_vertices() {
        let m = p1().known.multiplier_set;
        let mut vs = m.vertices().unwrap();
        vs.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_eq!(vs.len(), 2);
        assert!((&vs[0] - DVector::from_row_slice(&[0.0, 0.5])).norm() < 1e-12);
        assert!((&vs[1] - DVector::from_row_slice(&[1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn p2_solution_matches_brute_force_oracle() {
        // Independent oracle: dense grid over the box, then coordinate
        // descent polishing with shrinking steps.
        let entry = p2();
        let p = &entry.problem;
        let psi =
            |x: &DVector<f64>| p.phi.eval(x).unwrap() + p.g.value(&p.mapping.eval(x).unwrap());
        let n = 41;
        let mut best = (f64::INFINITY, DVector::zeros(3));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = DVector::from_row_slice(&[
                        -1.0 + 2.0 * i as f64 / (n - 1) as f64,
                        -1.0 + 2.0 * j as f64 / (n - 1) as f64,
                        -1.0 + 2.0 * k as f64 / (n - 1) as f64,
                    ]);
                    let val = psi(&x);
                    if val < best.0 {
                        best = (val, x);
                    }
                }
            }
        }
        let mut x = best.1;
        let mut step = 2.0 / (n - 1) as f64;
        while step > 1e-9 {
            let mut improved = true;
            while improved {
                improved = false;
                for i in 0..3 {
                    for s in [step, -step] {
                        let mut cand = x.clone();
                        cand[i] = (cand[i] + s).clamp(-1.0, 1.0);
                        if psi(&cand) < psi(&x) - 1e-15 {
                            x = cand;
                            improved = true;
                        }
                    }
                }
            }
            step /= 2.0;
        }
        assert!(
            (&x - &entry.known.x_bar).norm() <= 1e-6,
            "polished {x:?} vs frozen {:?}",
            entry.known.x_bar
        );
    }

    #[test]
    fn p3_solution_is_cone_projection() {
        let entry = p3();
        let c = DVector::from_row_slice(&[0.0, 2.0, 0.0]);
        let proj = entry.problem.g.prox(1.0, &c).unwrap();
        assert!((proj - &entry.known.x_bar).norm() < 1e-14);
    }

    #[test]
    fn p3_curvature_oracle() {
        // On the reduced model the second subderivative along (t,t,s) is
        // s^2; off the reduced cone it is infinite.
        let entry = p3();
        let z = &entry.known.x_bar;
        let y = &entry.known.reference_multiplier;
        let d2 = entry
            .problem
            .g
            .second_subderivative_exact(z, y, &DVector::from_row_slice(&[0.7, 0.7, 2.0]))
            .unwrap();
        assert!((d2 - 4.0).abs() < 1e-12);
        let off = entry
            .problem
            .g
            .second_subderivative_exact(z, y, &DVector::from_row_slice(&[1.0, 0.0, 0.0]))
            .unwrap();
        assert!(off.is_infinite());
    }

    #[test]
    fn p4_solution_is_eigenvalue_clamp() {
        let entry = p4();
        let c = svec(&DMatrix::from_row_slice(2, 2, &[0.5, 1.5, 1.5, 0.5]));
        let proj = entry.problem.g.prox(1.0, &c).unwrap();
        assert!((proj - &entry.known.x_bar).norm() < 1e-12);
        let expect = DVector::from_row_slice(&[1.0, 2.0_f64.sqrt(), 1.0]);
        assert!((&entry.known.x_bar - expect).norm() < 1e-12);
    }

    #[test]
    fn by_id_lookup() {
        assert_eq!(by_id("P1").unwrap().id, "P1");
        assert_eq!(by_id("p3").unwrap().id, "P3");
        assert!(matches!(by_id("NOPE"), Err(AlmError::Input(_))));
    }

    #[test]
    fn default_starts_feasible() {
        for entry in all() {
            assert!(entry.problem.theta.feasible(&entry.default_start.0));
            assert_eq!(entry.default_start.1.len(), entry.problem.m());
        }
    }
}
