//! Inexact augmented Lagrangian loop: tolerance schedule, projected
//! gradient subproblem solver, locality-bounded primal-dual updates, and
//! the iteration trace consumed by rate estimation and the CLI.

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::auglag::{kkt_residual, AugEvalContext};
use crate::geometry::DEFAULT_ACTIVE_TOL;
use crate::model::{CompositeProblem, KnownSolution};
use crate::{AlmError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoSchedule {
    Constant(f64),
    Geometric { initial: f64, factor: f64, cap: f64 },
}

impl RhoSchedule {
    pub fn rho_at(&self, k: usize) -> f64 {
        match self {
            Self::Constant(rho) => *rho,
            Self::Geometric { initial, factor, cap } => {
                (initial * factor.powi(k as i32)).min(*cap)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceParams {
    pub sigma: f64,
    pub p: f64,
    pub c_lin: f64,
}

impl Default for ToleranceParams {
    fn default() -> Self {
        Self { sigma: 1.0, p: 1.5, c_lin: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rho_schedule: RhoSchedule,
    pub tol: ToleranceParams,
    pub c_hat: f64,
    pub stop_residual: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho_schedule: RhoSchedule::Constant(10.0),
            tol: ToleranceParams::default(),
            c_hat: 100.0,
            stop_residual: 1e-9,
            max_outer: 200,
            max_inner: 5000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let rho_ok = match &self.rho_schedule {
            RhoSchedule::Constant(rho) => *rho > 0.0,
            RhoSchedule::Geometric { initial, factor, cap } => {
                *initial > 0.0 && *factor >= 1.0 && *cap >= *initial
            }
        };
        if !rho_ok {
            return Err(AlmError::input("penalty schedule violates rho > 0, tau >= 1"));
        }
        if !(self.tol.p > 1.0) {
            return Err(AlmError::input("tolerance exponent p must exceed 1"));
        }
        if !(self.c_hat > 0.0) || !(self.stop_residual > 0.0) {
            return Err(AlmError::input("c_hat and stop_residual must be positive"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(AlmError::input("iteration caps must be positive"));
        }
        Ok(())
    }
}

/// `eps(t) = min(c_lin t, sigma t^p)`; vanishes superlinearly in t.
pub fn tolerance_fn(tol: &ToleranceParams, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (tol.c_lin * t).min(tol.sigma * t.powf(tol.p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxOuter,
    LocalityFailed,
    SubproblemFailed,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxOuter => "max_outer",
            Self::LocalityFailed => "locality_failed",
            Self::SubproblemFailed => "subproblem_failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(Self::Converged),
            "max_outer" => Some(Self::MaxOuter),
            "locality_failed" => Some(Self::LocalityFailed),
            "subproblem_failed" => Some(Self::SubproblemFailed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    /// Empty when the record was parsed from a trace file (the file stores
    /// summary columns only).
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub rho: f64,
    pub eps: f64,
    pub residual: f64,
    /// ||x_k - x_{k-1}|| + ||y_k - y_{k-1}||.
    pub step_norm: f64,
    pub inner_iters: usize,
    pub dist_primal: Option<f64>,
    pub dist_dual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub problem_id: Option<String>,
    pub records: Vec<IterationRecord>,
    pub status: RunStatus,
    /// Iteration indices accepted through the smallest-step fallback after
    /// the locality retries were exhausted.
    pub locality_marked: Vec<usize>,
    pub config: SolverConfig,
}

pub struct SubproblemResult {
    pub x: DVector<f64>,
    pub inner_iters: usize,
    pub stationarity: f64,
    pub converged: bool,
    /// Objective value after each accepted inner step, starting value
    /// included.
    pub f_history: Vec<f64>,
}

/// Minimizes the augmented Lagrangian over Theta for fixed (y, rho) by
/// projected gradient with a Barzilai-Borwein step and a 5-step-memory
/// Armijo safeguard, kept nonincreasing by an explicit guard. Terminates
/// when the projected stationarity measure drops below max(eps, 1e-12).
pub fn solve_subproblem(
    ctx: &AugEvalContext,
    y: &DVector<f64>,
    x_start: &DVector<f64>,
    eps: f64,
    max_inner: usize,
) -> Result<SubproblemResult> {
    let theta = &ctx.problem.theta;
    if !theta.feasible(x_start) {
        return Err(AlmError::input("subproblem start point infeasible"));
    }
    let thresh = eps.max(1e-12);
    let mut x = x_start.clone();
    let mut f_cur = ctx.value(&x, y)?;
    let mut g_cur = ctx.grad_x(&x, y)?;
    let mut ncd = theta.normal_cone_distance(&x, &(-&g_cur), DEFAULT_ACTIVE_TOL)?;
    let mut history = vec![f_cur];
    if ncd <= thresh {
        return Ok(SubproblemResult {
            x,
            inner_iters: 0,
            stationarity: ncd,
            converged: true,
            f_history: history,
        });
    }
    let mut memory: VecDeque<f64> = VecDeque::with_capacity(5);
    memory.push_back(f_cur);
    let mut alpha = 1.0 / (1.0 + g_cur.norm());
    let mut best = (ncd, x.clone());
    let mut iters = 0;
    while iters < max_inner {
        iters += 1;
        let target = theta.project(&(&x - &g_cur * alpha))?;
        let d = &target - &x;
        if d.norm() == 0.0 {
            break;
        }
        let dir_deriv = g_cur.dot(&d);
        let f_ref = memory.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &x + &d * t;
            let f_new = ctx.value(&cand, y)?;
            // Near the minimizer the predicted decrease drops below what
            // doubles can resolve in f; such steps are accepted on the
            // monotone guard alone.
            let flat = (t * dir_deriv).abs() <= f64::EPSILON * (1.0 + f_cur.abs());
            if (flat || f_new <= f_ref + 1e-4 * t * dir_deriv)
                && f_new <= f_cur + 1e-12 * (1.0 + f_cur.abs())
            {
                let g_new = ctx.grad_x(&cand, y)?;
                let s = &cand - &x;
                let gd = &g_new - &g_cur;
                let sy = s.dot(&gd);
                alpha = if sy > f64::EPSILON * s.norm() * gd.norm() {
                    (s.norm_squared() / sy).clamp(1e-8, 1e8)
                } else {
                    1.0
                };
                x = cand;
                f_cur = f_new;
                g_cur = g_new;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        history.push(f_cur);
        if memory.len() == 5 {
            memory.pop_front();
        }
        memory.push_back(f_cur);
        ncd = theta.normal_cone_distance(&x, &(-&g_cur), DEFAULT_ACTIVE_TOL)?;
        if ncd < best.0 {
            best = (ncd, x.clone());
        }
        if ncd <= thresh {
            return Ok(SubproblemResult {
                x,
                inner_iters: iters,
                stationarity: ncd,
                converged: true,
                f_history: history,
            });
        }
    }
    Ok(SubproblemResult {
        x: best.1,
        inner_iters: iters,
        stationarity: best.0,
        converged: false,
        f_history: history,
    })
}

/// Outer loop. Each iteration solves the subproblem to tolerance
/// `eps_k = max(eps(r_k), 1e-13)`, applies the dual update, and enforces
/// the locality bound `step <= c_hat * r_k`. On violation it retries with
/// eps halved twice, then once with rho doubled (for that attempt only);
/// if all four attempts violate, the smallest-step candidate is accepted
/// and the iteration marked, failing the run only when the violation
/// exceeds 10 * c_hat * r_k.
pub fn alm_run(
    problem: &CompositeProblem,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    cfg: &SolverConfig,
    known: Option<&KnownSolution>,
) -> Result<RunTrace> {
    cfg.validate()?;
    if !problem.theta.feasible(x0) {
        return Err(AlmError::input("start point infeasible for Theta"));
    }
    if y0.len() != problem.m() {
        return Err(AlmError::input("dual start dimension mismatch"));
    }
    let dists = |x: &DVector<f64>, y: &DVector<f64>| -> Result<(Option<f64>, Option<f64>)> {
        match known {
            Some(ks) => Ok((
                Some((x - &ks.x_bar).norm()),
                Some(ks.multiplier_set.dist(y)?),
            )),
            None => Ok((None, None)),
        }
    };

    let mut records = Vec::new();
    let mut locality_marked = Vec::new();
    let r0 = kkt_residual(problem, x0, y0)?;
    let (dp, dd) = dists(x0, y0)?;
    records.push(IterationRecord {
        k: 0,
        x: x0.clone(),
        y: y0.clone(),
        rho: cfg.rho_schedule.rho_at(0),
        eps: 0.0,
        residual: r0,
        step_norm: 0.0,
        inner_iters: 0,
        dist_primal: dp,
        dist_dual: dd,
    });

    let mut status = RunStatus::MaxOuter;
    if r0 <= cfg.stop_residual {
        status = RunStatus::Converged;
    } else {
        let mut x = x0.clone();
        let mut y = y0.clone();
        let mut r = r0;
        'outer: for k in 0..cfg.max_outer {
            let rho_base = cfg.rho_schedule.rho_at(k);
            let eps_k = tolerance_fn(&cfg.tol, r).max(1e-13);
            let attempts = [
                (rho_base, eps_k),
                (rho_base, eps_k / 2.0),
                (rho_base, eps_k / 4.0),
                (rho_base * 2.0, eps_k / 4.0),
            ];
            let mut fallback: Option<(SubproblemResult, DVector<f64>, f64, f64)> = None;
            let mut accepted: Option<(SubproblemResult, DVector<f64>, f64, f64)> = None;
            for (rho_a, eps_a) in attempts {
                let ctx = AugEvalContext::new(problem, rho_a)?;
                let sub = solve_subproblem(&ctx, &y, &x, eps_a, cfg.max_inner)?;
                let y_cand = ctx.dual_update(&sub.x, &y)?;
                let step = (&sub.x - &x).norm() + (&y_cand - &y).norm();
                if !sub.converged {
                    // Record the best iterate of the failed solve, then stop.
                    let r_cand = kkt_residual(problem, &sub.x, &y_cand)?;
                    let (dp, dd) = dists(&sub.x, &y_cand)?;
                    records.push(IterationRecord {
                        k: k + 1,
                        x: sub.x,
                        y: y_cand,
                        rho: rho_a,
                        eps: eps_k,
                        residual: r_cand,
                        step_norm: step,
                        inner_iters: sub.inner_iters,
                        dist_primal: dp,
                        dist_dual: dd,
                    });
                    status = RunStatus::SubproblemFailed;
                    break 'outer;
                }
                if step <= cfg.c_hat * r {
                    accepted = Some((sub, y_cand, rho_a, step));
                    break;
                }
                if fallback.as_ref().map_or(true, |f| step < f.3) {
                    fallback = Some((sub, y_cand, rho_a, step));
                }
            }
            let (sub, y_new, rho_used, step, marked) = match accepted {
                Some((sub, y_new, rho_used, step)) => (sub, y_new, rho_used, step, false),
                None => {
                    let (sub, y_new, rho_used, step) =
                        fallback.expect("at least one locality attempt ran");
                    locality_marked.push(k + 1);
                    (sub, y_new, rho_used, step, true)
                }
            };
            let r_new = kkt_residual(problem, &sub.x, &y_new)?;
            let (dp, dd) = dists(&sub.x, &y_new)?;
            records.push(IterationRecord {
                k: k + 1,
                x: sub.x.clone(),
                y: y_new.clone(),
                rho: rho_used,
                eps: eps_k,
                residual: r_new,
                step_norm: step,
                inner_iters: sub.inner_iters,
                dist_primal: dp,
                dist_dual: dd,
            });
            if marked && step > 10.0 * cfg.c_hat * r {
                status = RunStatus::LocalityFailed;
                break 'outer;
            }
            x = sub.x;
            y = y_new;
            r = r_new;
            if r <= cfg.stop_residual {
                status = RunStatus::Converged;
                break 'outer;
            }
        }
    }

    Ok(RunTrace {
        problem_id: None,
        records,
        status,
        locality_marked,
        config: cfg.clone(),
    })
}
