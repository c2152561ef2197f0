//! Difference-quotient estimators for second-order variational objects,
//! and the solution-quality checks built on top of them: SOSC margins,
//! uniform quadratic growth, error-bound constants, the augmented
//! Lagrangian quotient identity, and consecutive-step bounds.
//!
//! Estimator notes. The second-subderivative grid estimator works on
//! plain function values, so two floating-point effects need explicit
//! handling. First, direction perturbations are renormalized to the
//! sphere `||w'|| = ||w||`: radial perturbations are redundant because
//! `Δ_t(λw) = λ² Δ_{λt}(w)`, and keeping them would drag level minima
//! down by the coarse-level radius for anisotropic curvature. Second,
//! each quotient carries a computable cancellation-noise bound of order
//! `eps·|f| / t²`; samples whose bound exceeds `1e-6·(1+|quotient|)` are
//! recorded but excluded from the estimate, and the estimate is the
//! minimum over the finest level that still has usable samples. For
//! curved indicator sets a deterministic repaired direction
//! `(prox(z+tw) - z)/t` is added whenever `z+tw` leaves the set, which
//! is what lets the estimator see boundary curvature at all; membership
//! tests shrink their tolerance with `t` for the same reason.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::auglag::{kkt_residual, AugEvalContext};
use crate::convex::ConvexFunction;
use crate::geometry::{ConeRep, DEFAULT_ACTIVE_TOL};
use crate::model::{CompositeProblem, KnownSolution};
use crate::solver::solve_subproblem;
use crate::{AlmError, Result};

/// Relative spread allowed among the last three usable level minima for
/// the `stabilized` flag. Matched to the noise gate, which admits samples
/// with error up to `1e-6 (1 + |q|)` each.
pub const STABILIZATION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct QuotientGrid {
    pub t0: f64,
    pub theta: f64,
    pub levels: usize,
    /// Direction-perturbation radius at step t is `dir_radius_factor * t`.
    pub dir_radius_factor: f64,
    pub samples_per_level: usize,
    pub seed: u64,
}

impl QuotientGrid {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            t0: 0.1,
            theta: 0.5,
            levels: 20,
            dir_radius_factor: 0.5,
            samples_per_level: 16,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0) || !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(AlmError::input("quotient grid: need t0 > 0, 0 < theta < 1"));
        }
        if self.levels < 3 || self.samples_per_level == 0 {
            return Err(AlmError::input(
                "quotient grid: need at least 3 levels and 1 sample per level",
            ));
        }
        if !(self.dir_radius_factor >= 0.0) {
            return Err(AlmError::input("quotient grid: negative perturbation radius"));
        }
        Ok(())
    }

    pub fn t_at(&self, level: usize) -> f64 {
        self.t0 * self.theta.powi(level as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The checked condition quantifies over an empty set.
    Vacuous,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub check: String,
    /// Main scalar outcome; +inf means an unbounded quotient family.
    pub estimate: f64,
    pub unbounded: bool,
    /// Per-level minima for grid scans; per-parameter statistics for the
    /// sampled checks (see notes).
    pub level_minima: Vec<f64>,
    pub usable_levels: Vec<bool>,
    pub trend_monotone: bool,
    pub stabilized: bool,
    pub sample_count: usize,
    pub excluded: usize,
    pub verdict: Option<Verdict>,
    pub quantities: BTreeMap<String, f64>,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    fn new(check: &str, seed: u64) -> Self {
        Self {
            check: check.to_string(),
            estimate: f64::INFINITY,
            unbounded: false,
            level_minima: Vec::new(),
            usable_levels: Vec::new(),
            trend_monotone: true,
            stabilized: false,
            sample_count: 0,
            excluded: 0,
            verdict: None,
            quantities: BTreeMap::new(),
            seed,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict, Some(Verdict::Pass) | Some(Verdict::Vacuous))
    }
}

/// `Δ_t²f(x,v)(w) = (f(x+tw) - f(x) - t<v,w>) / (t²/2)`, extended-real.
pub fn second_order_quotient(
    f: &ConvexFunction,
    x: &DVector<f64>,
    v: &DVector<f64>,
    t: f64,
    w: &DVector<f64>,
) -> f64 {
    assert!(t > 0.0, "second_order_quotient: t must be positive");
    let fx = f.value(x);
    if !fx.is_finite() {
        return f64::INFINITY;
    }
    let fxt = f.value(&(x + w * t));
    if !fxt.is_finite() {
        return f64::INFINITY;
    }
    (fxt - fx - t * v.dot(w)) / (0.5 * t * t)
}

fn membership_tol(t: f64) -> f64 {
    (1e-3 * t * t).max(64.0 * f64::EPSILON)
}

fn ball_sample(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    loop {
        let u = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let n = u.norm();
        if n <= 1.0 && n > 1e-12 {
            return u;
        }
    }
}

struct ScanLevel {
    t: f64,
    usable_min: f64,
    /// Had at least one noise-admissible sample and no finite sample
    /// rejected as too noisy. The noise gate scales with 1 + |q|, so a
    /// partially gated level keeps its large quotients while dropping the
    /// small ones and its minimum is biased upward; only fully admissible
    /// levels may provide the estimate.
    estimating: bool,
}

struct ScanResult {
    levels: Vec<ScanLevel>,
    estimate: f64,
    estimate_level: Option<usize>,
    samples: usize,
}

/// Direction candidates at one level: the exact direction, a repaired
/// direction when `z + t w` leaves the domain, and sphere-renormalized
/// random perturbations. Returns the repair candidate's index when one
/// was added; its quotient needs a larger noise term because it is built
/// from differences of O(||z||) stored prox coordinates.
fn direction_candidates(
    f: &ConvexFunction,
    z: &DVector<f64>,
    w: &DVector<f64>,
    t: f64,
    delta: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<DVector<f64>>, Option<usize>)> {
    let mut dirs = vec![w.clone()];
    let mut repair = None;
    if !f.value_with_tol(&(z + w * t), membership_tol(t)).is_finite() {
        let p = f.prox(1.0, &(z + w * t))?;
        let repaired = (&p - z) / t;
        if (&repaired - w).norm() <= 100.0 * t {
            repair = Some(dirs.len());
            dirs.push(repaired);
        }
    }
    let wn = w.norm();
    if wn > 0.0 && delta > 0.0 {
        while dirs.len() < count.max(1) {
            let cand = w + ball_sample(rng, w.len()) * delta;
            let cn = cand.norm();
            if cn > 1e-12 {
                dirs.push(cand * (wn / cn));
            }
        }
    }
    Ok((dirs, repair))
}

fn quotient_scan(
    f: &ConvexFunction,
    z: &DVector<f64>,
    w: &DVector<f64>,
    grid: &QuotientGrid,
    v_pool: &dyn Fn(f64) -> Vec<DVector<f64>>,
) -> Result<ScanResult> {
    grid.validate()?;
    let fz = f.value(z);
    if !fz.is_finite() {
        return Err(AlmError::input("quotient scan: f(x) must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut levels = Vec::with_capacity(grid.levels);
    let mut samples = 0;
    for l in 0..grid.levels {
        let t = grid.t_at(l);
        let delta = grid.dir_radius_factor * t;
        let (dirs, repair) =
            direction_candidates(f, z, w, t, delta, grid.samples_per_level, &mut rng)?;
        let vs = v_pool(t);
        let mut usable_min = f64::INFINITY;
        let mut has_usable = false;
        let mut finite_gated = 0usize;
        for (di, wp) in dirs.iter().enumerate() {
            let zt = z + wp * t;
            let fzt = f.value_with_tol(&zt, membership_tol(t));
            let extra = if repair == Some(di) {
                (z.norm() + zt.norm()) * vs.iter().map(|vp| vp.norm()).fold(0.0, f64::max)
            } else {
                0.0
            };
            for vp in &vs {
                samples += 1;
                if !fzt.is_finite() {
                    has_usable = true;
                    continue;
                }
                let lin = t * vp.dot(wp);
                // Exact quotients are nonnegative for a convex f with v a
                // subgradient; negatives are rounding or membership-
                // tolerance artifacts.
                let q = ((fzt - fz - lin) / (0.5 * t * t)).max(0.0);
                let noise = f64::EPSILON * (fz.abs() + fzt.abs() + lin.abs() + extra)
                    / (0.5 * t * t);
                if noise <= 1e-6 * (1.0 + q.abs()) {
                    has_usable = true;
                    usable_min = usable_min.min(q);
                } else {
                    finite_gated += 1;
                }
            }
        }
        let estimating = has_usable && finite_gated == 0;
        levels.push(ScanLevel { t, usable_min, estimating });
    }
    let estimate_level = (0..levels.len()).rev().find(|&l| levels[l].estimating);
    let estimate = match estimate_level {
        Some(l) => levels[l].usable_min,
        None => f64::INFINITY,
    };
    Ok(ScanResult { levels, estimate, estimate_level, samples })
}

fn report_from_scan(check: &str, grid: &QuotientGrid, scan: &ScanResult) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new(check, grid.seed);
    rep.estimate = scan.estimate;
    rep.level_minima = scan.levels.iter().map(|l| l.usable_min).collect();
    rep.usable_levels = scan.levels.iter().map(|l| l.estimating).collect();
    rep.sample_count = scan.samples;
    let t_ref = scan
        .estimate_level
        .map(|l| scan.levels[l].t)
        .unwrap_or_else(|| scan.levels.last().map(|l| l.t).unwrap_or(1.0));
    rep.unbounded = !scan.estimate.is_finite() || scan.estimate > 1.0 / t_ref;
    let usable: Vec<f64> = scan
        .levels
        .iter()
        .filter(|l| l.estimating)
        .map(|l| l.usable_min)
        .collect();
    rep.trend_monotone = usable.windows(2).all(|p| p[1] <= p[0] + 1e-9);
    rep.stabilized = if usable.len() >= 3 {
        let tail = &usable[usable.len() - 3..];
        if tail.iter().all(|m| m.is_finite()) {
            let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            hi - lo <= STABILIZATION_TOL * (1.0 + tail[2].abs())
        } else {
            tail.iter().all(|m| m.is_infinite())
        }
    } else {
        false
    };
    rep
}

/// Grid estimate of the second subderivative `d²f(x,v)(w)`: minimum of
/// second-order quotients over the finest numerically usable level, with
/// per-level minima and trend diagnostics attached.
pub fn second_subderivative_estimate(
    f: &ConvexFunction,
    x: &DVector<f64>,
    v: &DVector<f64>,
    w: &DVector<f64>,
    grid: &QuotientGrid,
) -> Result<DiagnosticsReport> {
    if !f.subdiff_contains(x, v, 1e-8)? {
        return Err(AlmError::input(
            "second_subderivative_estimate: v is not a subgradient at x",
        ));
    }
    let fixed = v.clone();
    let scan = quotient_scan(f, x, w, grid, &move |_| vec![fixed.clone()])?;
    Ok(report_from_scan("d2_estimate", grid, &scan))
}

/// Semi-strict variant: quotients additionally minimize over sampled
/// subgradients `v'` restricted to balls of radius `dir_radius_factor * t`
/// around `v`. Requires a variant with subgradient sampling (polyhedral
/// or piecewise linear-quadratic).
pub fn semi_strict_ssd_estimate(
    f: &ConvexFunction,
    x: &DVector<f64>,
    v: &DVector<f64>,
    w: &DVector<f64>,
    grid: &QuotientGrid,
    subgrad_samples: usize,
) -> Result<DiagnosticsReport> {
    if !f.is_polyhedral() {
        return Err(AlmError::capability(
            "semi-strict estimator needs subgradient sampling, which the \
             curved cone indicators do not support",
        ));
    }
    if !f.subdiff_contains(x, v, 1e-8)? {
        return Err(AlmError::input(
            "semi_strict_ssd_estimate: v is not a subgradient at x",
        ));
    }
    let pool = f.subdiff_sample(x, subgrad_samples.max(1), grid.seed)?;
    let center = v.clone();
    let factor = grid.dir_radius_factor;
    let pool_at = move |t: f64| {
        let radius = factor * t;
        let mut vs = vec![center.clone()];
        for p in &pool {
            if (p - &center).norm() <= radius && (p - &center).norm() > 0.0 {
                vs.push(p.clone());
            }
        }
        vs
    };
    let scan = quotient_scan(f, x, w, grid, &pool_at)?;
    Ok(report_from_scan("semi_strict_estimate", grid, &scan))
}

fn exp_weight(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

/// Unit directions from a union of polyhedral cones: every generator of
/// every piece, then random conic combinations drawn within single pieces
/// (combinations across pieces may leave the union).
fn cone_direction_pool(
    pieces: &[ConeRep],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DVector<f64>>> {
    let mut per_piece: Vec<Vec<DVector<f64>>> = Vec::new();
    for piece in pieces {
        let with = piece.clone().with_generators()?;
        per_piece.push(with.generator_list().unwrap_or(&[]).to_vec());
    }
    let mut pool: Vec<DVector<f64>> = Vec::new();
    for gens in &per_piece {
        for g in gens {
            if !pool.iter().any(|u| (u - g).norm() < 1e-9) {
                pool.push(g.clone());
            }
        }
    }
    if pool.is_empty() {
        return Ok(pool);
    }
    let nonempty: Vec<usize> = (0..per_piece.len())
        .filter(|&i| !per_piece[i].is_empty())
        .collect();
    let mut attempts = 0;
    while pool.len() < count && attempts < 100 * count {
        attempts += 1;
        let pi = nonempty[rng.random_range(0..nonempty.len())];
        let gens = &per_piece[pi];
        let mut w = DVector::zeros(gens[0].len());
        for g in gens {
            w += g * exp_weight(rng);
        }
        let n = w.norm();
        if n > 1e-9 {
            pool.push(w / n);
        }
    }
    Ok(pool)
}

/// Compares the semi-strict and plain second-subderivative estimates over
/// sampled critical-cone directions. Estimates are paired at the finest
/// grid level usable in both scans, where the shared sampling stream makes
/// `d̂² <= d²` structural.
pub fn semi_stability_check(
    f: &ConvexFunction,
    x: &DVector<f64>,
    v: &DVector<f64>,
    cone_samples: usize,
    grid: &QuotientGrid,
) -> Result<DiagnosticsReport> {
    let pieces = f.critical_cone_pieces(x, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed.wrapping_add(0x9E37_79B9));
    let dirs = cone_direction_pool(&pieces, cone_samples.max(1), &mut rng)?;
    let mut rep = DiagnosticsReport::new("semi_stability", grid.seed);
    if dirs.is_empty() {
        rep.verdict = Some(Verdict::Vacuous);
        rep.estimate = 0.0;
        rep.notes.push("critical cone is trivial".to_string());
        return Ok(rep);
    }
    let mut worst = 0.0_f64;
    let mut worst_idx = 0;
    let mut all_within = true;
    for (i, w) in dirs.iter().enumerate() {
        let base = second_subderivative_estimate(f, x, v, w, grid)?;
        let strict = semi_strict_ssd_estimate(f, x, v, w, grid, 32)?;
        let common = (0..base.usable_levels.len().min(strict.usable_levels.len()))
            .rev()
            .find(|&l| base.usable_levels[l] && strict.usable_levels[l]);
        let (d2, d2_strict) = match common {
            Some(l) => (base.level_minima[l], strict.level_minima[l]),
            None => (base.estimate, strict.estimate),
        };
        if d2_strict > d2 + 1e-10 {
            all_within = false;
            rep.notes.push(format!(
                "direction {i}: semi-strict estimate {d2_strict} exceeds plain {d2}"
            ));
        }
        let diff = if d2.is_infinite() && d2_strict.is_infinite() {
            0.0
        } else {
            (d2_strict - d2).abs()
        };
        let tol = 1e-4 * (1.0 + if d2.is_finite() { d2.abs() } else { 0.0 });
        if diff > tol {
            all_within = false;
        }
        if diff > worst {
            worst = diff;
            worst_idx = i;
        }
        rep.sample_count += 1;
    }
    rep.estimate = worst;
    rep.quantities.insert("worst_diff".to_string(), worst);
    rep.notes
        .push(format!("worst direction index {worst_idx} of {}", dirs.len()));
    rep.verdict = Some(if all_within { Verdict::Pass } else { Verdict::Fail });
    Ok(rep)
}

fn stack_rows(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let n = top.ncols().max(bottom.ncols());
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), n);
    out.view_mut((0, 0), (top.nrows(), top.ncols())).copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}

/// SOSC margin at a KKT pair: minimum of `<∇²L w, w> + d²g(Φ(x̄), y)(∇Φ w)`
/// over sampled unit directions of the critical direction set. Vacuous
/// when that set is trivial.
pub fn sosc_check(
    p: &CompositeProblem,
    sol: &KnownSolution,
    y: &DVector<f64>,
    sphere_samples: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    let xbar = &sol.x_bar;
    let r = kkt_residual(p, xbar, y)?;
    if r > 1e-8 {
        return Err(AlmError::input(format!(
            "sosc_check: y is not a multiplier at x_bar (residual {r:.3e})"
        )));
    }
    let z = p.mapping.eval(xbar)?;
    let j = p.mapping.jacobian(xbar)?;
    let grad_l = p.lagrangian_grad_x(xbar, y)?;
    let theta_cone = p
        .theta
        .critical_cone_set(xbar, &(-&grad_l), DEFAULT_ACTIVE_TOL)?;
    let g_pieces = p.g.critical_cone_pieces(&z, y)?;
    let tp = theta_cone
        .halfspace
        .as_ref()
        .expect("critical_cone_set returns halfspace form");
    let mut pieces = Vec::new();
    for piece in &g_pieces {
        let gp = piece.halfspace.as_ref().ok_or_else(|| {
            AlmError::capability("sosc_check: critical cone piece lacks halfspace form")
        })?;
        let a = stack_rows(&tp.a, &(&gp.a * &j));
        let e = stack_rows(&tp.e, &(&gp.e * &j));
        pieces.push(ConeRep::from_halfspace(p.n(), a, e)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = cone_direction_pool(&pieces, sphere_samples.max(1), &mut rng)?;
    let mut rep = DiagnosticsReport::new("sosc", seed);
    if dirs.is_empty() {
        rep.verdict = Some(Verdict::Vacuous);
        rep.notes
            .push("critical direction set is trivial".to_string());
        return Ok(rep);
    }
    let hess = p.lagrangian_hess_xx(xbar, y)?;
    let mut margin = f64::INFINITY;
    for w in &dirs {
        let jw = &j * w;
        let d2 = match p.g.second_subderivative_exact(&z, y, &jw) {
            Ok(val) => val,
            Err(AlmError::Capability(_)) => {
                second_subderivative_estimate(&p.g, &z, y, &jw, &QuotientGrid::with_seed(seed))?
                    .estimate
            }
            Err(e) => return Err(e),
        };
        if !d2.is_finite() {
            // Membership-tolerance artifact at the cone boundary; skip.
            rep.excluded += 1;
            continue;
        }
        let q = (&hess * w).dot(w) + d2;
        margin = margin.min(q);
        rep.sample_count += 1;
    }
    if rep.sample_count == 0 {
        return Err(AlmError::numerical(
            "sosc_check: every sampled direction fell outside the critical cone",
        ));
    }
    rep.estimate = margin;
    rep.quantities.insert("margin".to_string(), margin);
    rep.verdict = Some(if margin > 1e-8 { Verdict::Pass } else { Verdict::Fail });
    Ok(rep)
}

/// Uniform quadratic growth of the augmented Lagrangian around the
/// solution: `κ̂ = min 2(L(x,y,ρ) - L(x̄,y,ρ)) / ||x - x̄||²` over sampled
/// `x ∈ Θ ∩ B_γ(x̄)`, `y ∈ M ∩ B_γ(ȳ)`, and every listed ρ. Per-ρ minima
/// land in `level_minima` in list order.
pub fn uqgc_check(
    p: &CompositeProblem,
    sol: &KnownSolution,
    gamma: f64,
    rho_list: &[f64],
    sample_count: usize,
    kappa_target: f64,
    seed: u64,
) -> Result<DiagnosticsReport> {
    if !(gamma > 0.0) {
        return Err(AlmError::input("uqgc_check: gamma must be positive"));
    }
    if rho_list.is_empty() || rho_list.iter().any(|&r| r <= 0.0) {
        return Err(AlmError::input("uqgc_check: rho list must be positive"));
    }
    let xbar = &sol.x_bar;
    let ybar = &sol.reference_multiplier;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = DiagnosticsReport::new("uqgc", seed);
    let mut pairs = Vec::new();
    for _ in 0..sample_count {
        let x = p.theta.project(&(xbar + ball_sample(&mut rng, xbar.len()) * gamma))?;
        let y = sol
            .multiplier_set
            .project(&(ybar + ball_sample(&mut rng, ybar.len()) * gamma))?;
        if (&x - xbar).norm() <= 1e-12 {
            rep.excluded += 1;
            continue;
        }
        pairs.push((x, y));
    }
    if pairs.is_empty() {
        return Err(AlmError::input(
            "uqgc_check: no usable samples (all coincide with x_bar)",
        ));
    }
    let mut kappa_hat = f64::INFINITY;
    for &rho in rho_list {
        let ctx = AugEvalContext::new(p, rho)?;
        let mut kappa_rho = f64::INFINITY;
        for (x, y) in &pairs {
            let growth = 2.0 * (ctx.value(x, y)? - ctx.value(xbar, y)?)
                / (x - xbar).norm_squared();
            kappa_rho = kappa_rho.min(growth);
        }
        rep.level_minima.push(kappa_rho);
        kappa_hat = kappa_hat.min(kappa_rho);
    }
    rep.sample_count = pairs.len();
    rep.estimate = kappa_hat;
    rep.quantities.insert("kappa_hat".to_string(), kappa_hat);
    rep.notes.push(format!("per-rho minima over rho = {rho_list:?}"));
    rep.verdict = Some(if kappa_hat >= kappa_target {
        Verdict::Pass
    } else {
        Verdict::Fail
    });
    Ok(rep)
}

/// Empirical error-bound constant: `κ̂_eb = max (||x - x̄|| + dist(y, M)) /
/// r(x,y)` over sampled pairs near the solution, excluding zero-residual
/// samples. Existence, not magnitude, is the theory's claim; magnitude is
/// regression-tested against a frozen baseline elsewhere.
pub fn error_bound_estimate(
    p: &CompositeProblem,
    sol: &KnownSolution,
    radius: f64,
    sample_count: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    if !(radius > 0.0) {
        return Err(AlmError::input("error_bound_estimate: radius must be positive"));
    }
    let xbar = &sol.x_bar;
    let ybar = &sol.reference_multiplier;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = DiagnosticsReport::new("error_bound", seed);
    let mut kappa = 0.0_f64;
    for _ in 0..sample_count {
        let x = p.theta.project(&(xbar + ball_sample(&mut rng, xbar.len()) * radius))?;
        let y = ybar + ball_sample(&mut rng, ybar.len()) * radius;
        let r = kkt_residual(p, &x, &y)?;
        if r <= 1e-12 {
            rep.excluded += 1;
            continue;
        }
        let dist = (&x - xbar).norm() + sol.multiplier_set.dist(&y)?;
        kappa = kappa.max(dist / r);
        rep.sample_count += 1;
    }
    if rep.sample_count == 0 {
        return Err(AlmError::input(
            "error_bound_estimate: every sample had zero residual",
        ));
    }
    rep.notes
        .push(format!("{} zero-residual samples excluded", rep.excluded));
    rep.estimate = kappa;
    rep.quantities.insert("kappa_eb".to_string(), kappa);
    rep.verdict = Some(if kappa.is_finite() { Verdict::Pass } else { Verdict::Fail });
    Ok(rep)
}

/// Closed form of `inf_u { Δ_t²g(Φ(x̄), ȳ)(u) + ρ ||Δ_tΦ(x̄)(w) - u||² }`
/// via the substitution `z = Φ(x̄) + t u`, which turns the infimum into a
/// Moreau envelope evaluation at `Φ(x̄ + t w) + ȳ/ρ`.
fn quotient_infimum_closed_form(
    g: &ConvexFunction,
    phi_xbar: &DVector<f64>,
    phi_xt: &DVector<f64>,
    ybar: &DVector<f64>,
    rho: f64,
    t: f64,
) -> Result<f64> {
    let g0 = g.value(phi_xbar);
    let env = g.moreau_value(1.0 / rho, &(phi_xt + ybar / rho))?;
    Ok((2.0 / (t * t))
        * (env - ybar.dot(phi_xt) - ybar.norm_squared() / (2.0 * rho) - g0
            + ybar.dot(phi_xbar)))
}

/// Checks the exact decomposition of the augmented Lagrangian's
/// second-order difference quotient at a KKT pair into smooth quotients
/// plus a penalized infimum, for each `(t, w)` pair.
pub fn aug_quotient_identity_check(
    p: &CompositeProblem,
    sol: &KnownSolution,
    rho: f64,
    t_list: &[f64],
    w_list: &[DVector<f64>],
) -> Result<DiagnosticsReport> {
    if !(rho > 0.0) {
        return Err(AlmError::input("aug_quotient_identity_check: rho must be positive"));
    }
    if t_list.is_empty() || w_list.is_empty() {
        return Err(AlmError::input("aug_quotient_identity_check: empty parameter list"));
    }
    let xbar = &sol.x_bar;
    let ybar = &sol.reference_multiplier;
    let ctx = AugEvalContext::new(p, rho)?;
    let l0 = ctx.value(xbar, ybar)?;
    let aug_grad = ctx.grad_x(xbar, ybar)?;
    let phi0 = p.phi.eval(xbar)?;
    let gphi = p.phi.grad(xbar)?;
    let z = p.mapping.eval(xbar)?;
    let jty = p.mapping.jacobian(xbar)?.transpose() * ybar;
    let mut rep = DiagnosticsReport::new("aug_quotient_identity", 0);
    let mut worst_rel = 0.0_f64;
    let mut worst_abs = 0.0_f64;
    for &t in t_list {
        if !(t > 0.0) {
            return Err(AlmError::input("aug_quotient_identity_check: t must be positive"));
        }
        for w in w_list {
            let xt = xbar + w * t;
            if !p.theta.feasible(&xt) {
                return Err(AlmError::input(
                    "aug_quotient_identity_check: direction leaves Theta",
                ));
            }
            let half_t2 = 0.5 * t * t;
            let lhs = (ctx.value(&xt, ybar)? - l0 - t * aug_grad.dot(w)) / half_t2;
            let phi_t = (p.phi.eval(&xt)? - phi0 - t * gphi.dot(w)) / half_t2;
            let phi_xt = p.mapping.eval(&xt)?;
            let pair_t = (ybar.dot(&phi_xt) - ybar.dot(&z) - t * jty.dot(w)) / half_t2;
            let inf_term =
                quotient_infimum_closed_form(&p.g, &z, &phi_xt, ybar, rho, t)?;
            let rhs = phi_t + pair_t + inf_term;
            let abs = (lhs - rhs).abs();
            let rel = abs / (1.0 + lhs.abs());
            if rel > worst_rel {
                worst_rel = rel;
                worst_abs = abs;
            }
            rep.sample_count += 1;
        }
    }
    rep.estimate = worst_rel;
    rep.quantities.insert("worst_abs_violation".to_string(), worst_abs);
    rep.quantities.insert("worst_rel_violation".to_string(), worst_rel);
    rep.verdict = Some(if worst_rel <= 1e-8 { Verdict::Pass } else { Verdict::Fail });
    Ok(rep)
}

/// Empirical constant in the consecutive-step bound: for sampled pairs
/// near the solution and each ρ, one exact subproblem solve plus dual
/// update, reporting `ĉ_emp = max (||s - x|| + ||y_s - y||) / r(x, y)`.
/// Per-ρ maxima land in `level_minima` in list order.
pub fn consecutive_step_bound_check(
    p: &CompositeProblem,
    sol: &KnownSolution,
    rho_list: &[f64],
    start_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    if rho_list.is_empty() || rho_list.iter().any(|&r| r <= 0.0) {
        return Err(AlmError::input("consecutive_step_bound_check: rho list must be positive"));
    }
    if !(start_radius > 0.0) {
        return Err(AlmError::input("consecutive_step_bound_check: radius must be positive"));
    }
    let xbar = &sol.x_bar;
    let ybar = &sol.reference_multiplier;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = DiagnosticsReport::new("step_bound", seed);
    let mut pairs = Vec::new();
    for _ in 0..samples {
        let x = p
            .theta
            .project(&(xbar + ball_sample(&mut rng, xbar.len()) * start_radius))?;
        let y = ybar + ball_sample(&mut rng, ybar.len()) * start_radius;
        let r = kkt_residual(p, &x, &y)?;
        if r <= 1e-12 {
            rep.excluded += 1;
            continue;
        }
        pairs.push((x, y, r));
    }
    if pairs.is_empty() {
        return Err(AlmError::input(
            "consecutive_step_bound_check: every sample had zero residual",
        ));
    }
    let mut c_emp = 0.0_f64;
    let mut all_converged = true;
    for &rho in rho_list {
        let ctx = AugEvalContext::new(p, rho)?;
        let mut c_rho = 0.0_f64;
        for (x, y, r) in &pairs {
            let sub = solve_subproblem(&ctx, y, x, 1e-12, 50_000)?;
            if !sub.converged {
                all_converged = false;
                continue;
            }
            let ys = ctx.dual_update(&sub.x, y)?;
            let ratio = ((&sub.x - x).norm() + (&ys - y).norm()) / r;
            c_rho = c_rho.max(ratio);
        }
        rep.level_minima.push(c_rho);
        c_emp = c_emp.max(c_rho);
    }
    rep.sample_count = pairs.len();
    rep.estimate = c_emp;
    rep.quantities.insert("c_hat_emp".to_string(), c_emp);
    rep.notes.push(format!("per-rho maxima over rho = {rho_list:?}"));
    rep.verdict = Some(if all_converged && c_emp.is_finite() {
        Verdict::Pass
    } else {
        Verdict::Fail
    });
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::convex::{CplqPiece, CplqPieces};
    use crate::geometry::Polyhedron;
    use crate::model::{SmoothFunction, SmoothMapping};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn half_square() -> ConvexFunction {
        let piece = CplqPiece {
            region: Polyhedron::whole_space(1),
            quad: DMatrix::from_row_slice(1, 1, &[1.0]),
            lin: DVector::zeros(1),
            constant: 0.0,
        };
        ConvexFunction::Cplq(CplqPieces::new(vec![piece]).unwrap())
    }

    fn abs_cplq() -> ConvexFunction {
        let left = CplqPiece {
            region: Polyhedron::nonpos_orthant(1),
            quad: DMatrix::zeros(1, 1),
            lin: v(&[-1.0]),
            constant: 0.0,
        };
        let right = CplqPiece {
            region: Polyhedron::nonneg_orthant(1),
            quad: DMatrix::zeros(1, 1),
            lin: v(&[1.0]),
            constant: 0.0,
        };
        ConvexFunction::Cplq(CplqPieces::new(vec![left, right]).unwrap())
    }

    #[test]
    fn quotient_examples() {
        let g = ConvexFunction::NonpositiveOrthantIndicator { dim: 1 };
        assert_eq!(second_order_quotient(&g, &v(&[0.0]), &v(&[0.0]), 0.1, &v(&[-1.0])), 0.0);
        assert_eq!(
            second_order_quotient(&g, &v(&[0.0]), &v(&[0.0]), 0.3, &v(&[1.0])),
            f64::INFINITY
        );
        let q = second_order_quotient(&half_square(), &v(&[1.0]), &v(&[1.0]), 0.2, &v(&[1.0]));
        assert!((q - 1.0).abs() < 1e-12, "got {q}");
    }

    #[test]
    fn grid_validation() {
        let mut grid = QuotientGrid::with_seed(0);
        grid.theta = 1.0;
        assert!(grid.validate().is_err());
        let mut grid = QuotientGrid::with_seed(0);
        grid.levels = 2;
        assert!(grid.validate().is_err());
    }

    #[test]
    fn d2_estimate_kink_is_zero() {
        let grid = QuotientGrid::with_seed(7);
        let rep =
            second_subderivative_estimate(&abs_cplq(), &v(&[0.0]), &v(&[1.0]), &v(&[1.0]), &grid)
                .unwrap();
        assert!(rep.estimate.abs() <= 1e-8, "got {}", rep.estimate);
        assert!(!rep.unbounded);
    }

    #[test]
    fn d2_estimate_polyhedral_critical_direction_is_zero() {
        let g = ConvexFunction::PolyhedronIndicator(Polyhedron::nonpos_orthant(2));
        let grid = QuotientGrid::with_seed(3);
        let rep =
            second_subderivative_estimate(&g, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), &v(&[0.0, -1.0]), &grid)
                .unwrap();
        assert!(rep.estimate.abs() <= 1e-8, "got {}", rep.estimate);
    }

    #[test]
    fn d2_estimate_quadratic_piece_matches_curvature() {
        // Single quotients are exact to rounding for a pure quadratic.
        let q = second_order_quotient(&half_square(), &v(&[1.0]), &v(&[1.0]), 1e-3, &v(&[2.0]));
        assert!((q - 4.0).abs() <= 1e-6, "quotient {q}");
        let grid = QuotientGrid::with_seed(11);
        let rep =
            second_subderivative_estimate(&half_square(), &v(&[1.0]), &v(&[1.0]), &v(&[2.0]), &grid)
                .unwrap();
        // The noise gate admits samples with error at most 1e-6 (1 + |q|).
        assert!((rep.estimate - 4.0).abs() <= 5e-6, "got {}", rep.estimate);
        assert!(rep.stabilized);
        // Report invariant: the estimate does not undercut any usable
        // level at least as fine as the one it came from.
        let finest = rep.usable_levels.iter().rposition(|&u| u).unwrap();
        assert!(rep.estimate <= rep.level_minima[finest] + 1e-12);
    }

    #[test]
    fn d2_estimate_soc_curvature() {
        let g = ConvexFunction::SecondOrderConeIndicator { dim: 3 };
        let z = v(&[1.0, 1.0, 0.0]);
        let y = v(&[-1.0, 1.0, 0.0]);
        let w = v(&[0.7, 0.7, 2.0]);
        let exact = g.second_subderivative_exact(&z, &y, &w).unwrap();
        assert!((exact - 4.0).abs() < 1e-12);
        let grid = QuotientGrid::with_seed(5);
        let rep = second_subderivative_estimate(&g, &z, &y, &w, &grid).unwrap();
        assert!(
            (rep.estimate - exact).abs() <= 1e-4,
            "estimate {} vs exact {exact}",
            rep.estimate
        );
        assert!(!rep.unbounded);
    }

    #[test]
    fn d2_estimate_flags_unbounded_outside_cone() {
        let g = ConvexFunction::NonpositiveOrthantIndicator { dim: 1 };
        let grid = QuotientGrid::with_seed(2);
        // Outside the domain's tangent cone.
        let rep =
            second_subderivative_estimate(&g, &v(&[0.0]), &v(&[1.0]), &v(&[1.0]), &grid).unwrap();
        assert!(rep.unbounded);
        // Inside the tangent cone but not the critical cone.
        let rep =
            second_subderivative_estimate(&g, &v(&[0.0]), &v(&[1.0]), &v(&[-1.0]), &grid).unwrap();
        assert!(rep.unbounded);
    }

    #[test]
    fn d2_estimate_requires_subgradient() {
        let g = ConvexFunction::NonpositiveOrthantIndicator { dim: 1 };
        let grid = QuotientGrid::with_seed(0);
        let err = second_subderivative_estimate(&g, &v(&[0.0]), &v(&[-1.0]), &v(&[1.0]), &grid)
            .unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
    }

    #[test]
    fn semi_strict_equals_plain_for_singleton_subdifferential() {
        let f = half_square();
        let grid = QuotientGrid::with_seed(9);
        let base =
            second_subderivative_estimate(&f, &v(&[1.0]), &v(&[1.0]), &v(&[1.5]), &grid).unwrap();
        let strict =
            semi_strict_ssd_estimate(&f, &v(&[1.0]), &v(&[1.0]), &v(&[1.5]), &grid, 16).unwrap();
        assert_eq!(base.estimate, strict.estimate);
    }

    #[test]
    fn semi_strict_zero_at_kink() {
        let grid = QuotientGrid::with_seed(13);
        let rep =
            semi_strict_ssd_estimate(&abs_cplq(), &v(&[0.0]), &v(&[1.0]), &v(&[1.0]), &grid, 16)
                .unwrap();
        assert!(rep.estimate.abs() <= 1e-8);
    }

    #[test]
    fn semi_strict_unbounded_off_cone() {
        let grid = QuotientGrid::with_seed(4);
        let rep =
            semi_strict_ssd_estimate(&abs_cplq(), &v(&[0.0]), &v(&[1.0]), &v(&[-1.0]), &grid, 16)
                .unwrap();
        assert!(rep.unbounded);
    }

    #[test]
    fn semi_strict_capability_error_for_curved_cones() {
        let g = ConvexFunction::SecondOrderConeIndicator { dim: 3 };
        let grid = QuotientGrid::with_seed(0);
        let err = semi_strict_ssd_estimate(
            &g,
            &v(&[1.0, 1.0, 0.0]),
            &v(&[-1.0, 1.0, 0.0]),
            &v(&[0.0, 0.0, 1.0]),
            &grid,
            8,
        )
        .unwrap_err();
        assert!(matches!(err, AlmError::Capability(_)));
    }

    #[test]
    fn semi_stability_passes_for_polyhedral_examples() {
        let grid = QuotientGrid::with_seed(21);
        let rep =
            semi_stability_check(&abs_cplq(), &v(&[0.0]), &v(&[1.0]), 8, &grid).unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Pass));

        let g = ConvexFunction::NonpositiveOrthantIndicator { dim: 2 };
        let rep =
            semi_stability_check(&g, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 8, &grid).unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Pass));
    }

    #[test]
    fn semi_stability_smooth_point_sees_piece_curvature() {
        // max(x, x²/2): quadratic piece active at x = 3, curvature 1.
        let left = CplqPiece {
            region: Polyhedron::nonpos_orthant(1),
            quad: DMatrix::from_row_slice(1, 1, &[1.0]),
            lin: DVector::zeros(1),
            constant: 0.0,
        };
        let mid = CplqPiece {
            region: Polyhedron::box_bounds(&[0.0], &[2.0]).unwrap(),
            quad: DMatrix::zeros(1, 1),
            lin: v(&[1.0]),
            constant: 0.0,
        };
        let right = CplqPiece {
            region: Polyhedron::new(
                1,
                DMatrix::from_row_slice(1, 1, &[-1.0]),
                v(&[-2.0]),
                DMatrix::zeros(0, 1),
                DVector::zeros(0),
            )
            .unwrap(),
            quad: DMatrix::from_row_slice(1, 1, &[1.0]),
            lin: DVector::zeros(1),
            constant: 0.0,
        };
        let f = ConvexFunction::Cplq(CplqPieces::new(vec![left, mid, right]).unwrap());
        assert_eq!(f.value(&v(&[3.0])), 4.5);
        let grid = QuotientGrid::with_seed(17);
        let rep = semi_stability_check(&f, &v(&[3.0]), &v(&[3.0]), 4, &grid).unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Pass));
        let d2 = second_subderivative_estimate(&f, &v(&[3.0]), &v(&[3.0]), &v(&[1.0]), &grid)
            .unwrap();
        assert!((d2.estimate - 1.0).abs() <= 1e-5, "got {}", d2.estimate);
    }

    #[test]
    fn sosc_p1_margin_for_both_multipliers() {
        let entry = catalog::p1();
        for y in [v(&[1.0, 0.0]), v(&[0.0, 0.5])] {
            let rep = sosc_check(&entry.problem, &entry.known, &y, 64, 42).unwrap();
            assert_eq!(rep.verdict, Some(Verdict::Pass));
            assert!(rep.estimate >= 0.99, "margin {}", rep.estimate);
        }
    }

    #[test]
    fn sosc_vacuous_under_strict_complementarity() {
        // min x²/2 - x subject to x <= 0: solution 0 with multiplier 1,
        // strict complementarity, so the critical direction set is {0}.
        let p = CompositeProblem::new(
            SmoothFunction::quadratic(
                DMatrix::identity(1, 1),
                v(&[-1.0]),
                0.0,
            ),
            SmoothMapping::identity(1),
            ConvexFunction::NonpositiveOrthantIndicator { dim: 1 },
            Polyhedron::whole_space(1),
        )
        .unwrap();
        let known = KnownSolution {
            x_bar: v(&[0.0]),
            multiplier_set: Polyhedron::new(
                1,
                DMatrix::zeros(0, 1),
                DVector::zeros(0),
                DMatrix::identity(1, 1),
                v(&[1.0]),
            )
            .unwrap(),
            reference_multiplier: v(&[1.0]),
        };
        let rep = sosc_check(&p, &known, &v(&[1.0]), 16, 0).unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Vacuous));
    }

    #[test]
    fn sosc_rejects_non_multiplier() {
        let entry = catalog::p1();
        let err = sosc_check(&entry.problem, &entry.known, &v(&[5.0, 5.0]), 16, 0).unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
    }

    #[test]
    fn uqgc_p1_passes_and_is_monotone_in_rho() {
        let entry = catalog::p1();
        let rep = uqgc_check(&entry.problem, &entry.known, 0.1, &[10.0, 100.0], 200, 0.9, 1)
            .unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Pass));
        assert!(rep.estimate >= 0.9);
        for pair in rep.level_minima.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-6, "per-rho minima {:?}", rep.level_minima);
        }
    }

    #[test]
    fn uqgc_unreachable_target_fails() {
        let entry = catalog::p1();
        let rep = uqgc_check(&entry.problem, &entry.known, 0.1, &[10.0], 100, 10.0, 1).unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Fail));
    }

    #[test]
    fn uqgc_degenerate_sampling_is_input_error() {
        let entry = catalog::p1();
        let err =
            uqgc_check(&entry.problem, &entry.known, 1e-18, &[10.0], 10, 0.9, 1).unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
    }

    #[test]
    fn error_bound_p1_reports_finite_constant() {
        let entry = catalog::p1();
        let rep = error_bound_estimate(&entry.problem, &entry.known, 0.01, 200, 3).unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Pass));
        assert!(rep.estimate.is_finite() && rep.estimate > 0.0);
        assert_eq!(rep.excluded + rep.sample_count, 200);
    }

    #[test]
    fn error_bound_degenerate_radius_is_input_error() {
        let entry = catalog::p1();
        let err = error_bound_estimate(&entry.problem, &entry.known, 1e-18, 5, 3).unwrap_err();
        assert!(matches!(err, AlmError::Input(_)));
    }

    #[test]
    fn lemma_identity_p1_inactive_direction() {
        let entry = catalog::p1();
        let rep = aug_quotient_identity_check(
            &entry.problem,
            &entry.known,
            1.0,
            &[0.1],
            &[v(&[0.0, 1.0])],
        )
        .unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Pass));
        assert!(rep.estimate <= 1e-12, "relative violation {}", rep.estimate);
    }

    #[test]
    fn lemma_identity_infimum_matches_dense_grid() {
        let entry = catalog::p1();
        let p = &entry.problem;
        let (rho, t) = (10.0, 0.1);
        let w = v(&[1.0, 0.0]);
        let xbar = &entry.known.x_bar;
        let ybar = &entry.known.reference_multiplier;
        let z = p.mapping.eval(xbar).unwrap();
        let phi_xt = p.mapping.eval(&(xbar + &w * t)).unwrap();
        let closed =
            quotient_infimum_closed_form(&p.g, &z, &phi_xt, ybar, rho, t).unwrap();
        let c = (&phi_xt - &z) / t;
        let mut grid_min = f64::INFINITY;
        let m = 301;
        for i in 0..m {
            for jdx in 0..m {
                let u = v(&[
                    -3.0 + 6.0 * i as f64 / (m - 1) as f64,
                    -3.0 + 6.0 * jdx as f64 / (m - 1) as f64,
                ]);
                let q = second_order_quotient(&p.g, &z, ybar, t, &u);
                if q.is_finite() {
                    grid_min = grid_min.min(q + rho * (&c - &u).norm_squared());
                }
            }
        }
        assert!(grid_min >= closed - 1e-9, "grid {grid_min} below closed {closed}");
        assert!(grid_min <= closed + 1e-3, "grid {grid_min} far above closed {closed}");
    }

    #[test]
    fn lemma_identity_trivial_for_zero_g() {
        let zero_piece = CplqPiece {
            region: Polyhedron::whole_space(1),
            quad: DMatrix::zeros(1, 1),
            lin: DVector::zeros(1),
            constant: 0.0,
        };
        let p = CompositeProblem::new(
            SmoothFunction::quadratic(DMatrix::identity(2, 2), v(&[-1.0, 0.0]), 0.0),
            SmoothMapping::affine(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), DVector::zeros(1)),
            ConvexFunction::Cplq(CplqPieces::new(vec![zero_piece]).unwrap()),
            Polyhedron::whole_space(2),
        )
        .unwrap();
        let known = KnownSolution {
            x_bar: v(&[1.0, 0.0]),
            multiplier_set: Polyhedron::new(
                1,
                DMatrix::zeros(0, 1),
                DVector::zeros(0),
                DMatrix::identity(1, 1),
                DVector::zeros(1),
            )
            .unwrap(),
            reference_multiplier: v(&[0.0]),
        };
        let rep = aug_quotient_identity_check(
            &p,
            &known,
            5.0,
            &[0.1, 0.01],
            &[v(&[1.0, 0.0]), v(&[0.3, -0.7])],
        )
        .unwrap();
        assert!(rep.estimate <= 1e-12);
    }

    #[test]
    fn step_bound_p1_finite_constant() {
        let entry = catalog::p1();
        let rep = consecutive_step_bound_check(
            &entry.problem,
            &entry.known,
            &[10.0, 100.0],
            0.01,
            25,
            6,
        )
        .unwrap();
        assert_eq!(rep.verdict, Some(Verdict::Pass));
        assert!(rep.estimate.is_finite() && rep.estimate > 0.0);
        assert_eq!(rep.level_minima.len(), 2);
    }
}
