//! JSON-string operations backing the browser demo. Each op takes a
//! request as a JSON string and returns a JSON response string, so the
//! wasm-bindgen layer is a trivial veneer and everything below it is
//! testable on the host target.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use alm_core::auglag::AugEvalContext;
use alm_core::catalog;
use alm_core::convex::ConvexFunction;
use alm_core::rates::estimate_rates;
use alm_core::solver::{alm_run, RhoSchedule, SolverConfig};

fn err_json(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

#[derive(Deserialize)]
struct SolveRequest {
    problem: String,
    #[serde(default)]
    schedule: Option<RhoSchedule>,
    #[serde(default)]
    stop: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

/// Solve a catalog problem and return the per-iteration summary plus a
/// rate classification when enough iterations are available.
pub fn solve_trace_json(request: &str) -> String {
    let req: SolveRequest = match serde_json::from_str(request) {
        Ok(r) => r,
        Err(e) => return err_json(format_args!("bad request: {e}")),
    };
    let entry = match catalog::by_id(&req.problem) {
        Ok(e) => e,
        Err(e) => return err_json(e),
    };
    let mut cfg = SolverConfig::default();
    if let Some(s) = req.schedule {
        cfg.rho_schedule = s;
    }
    if let Some(s) = req.stop {
        cfg.stop_residual = s;
    }
    if let Some(s) = req.seed {
        cfg.seed = s;
    }
    let (x0, y0) = &entry.default_start;
    let trace = match alm_run(&entry.problem, x0, y0, &cfg, Some(&entry.known)) {
        Ok(t) => t,
        Err(e) => return err_json(e),
    };
    let records: Vec<_> = trace
        .records
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "rho": r.rho,
                "eps": r.eps,
                "residual": r.residual,
                "step_norm": r.step_norm,
                "inner_iters": r.inner_iters,
                "dist_primal": r.dist_primal,
                "dist_dual": r.dist_dual,
            })
        })
        .collect();
    let rate = estimate_rates(&trace.records, Some(&entry.known))
        .ok()
        .map(|rep| {
            json!({
                "classification": rep.classification.as_str(),
                "q_hat": rep.q_hat,
            })
        });
    json!({
        "schema_version": 1,
        "problem": entry.id,
        "status": trace.status.as_str(),
        "locality_marked": trace.locality_marked,
        "records": records,
        "rate": rate,
    })
    .to_string()
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ProfileFunction {
    L1 { weight: f64 },
    Box { lo: f64, hi: f64 },
    Nonpos,
}

#[derive(Deserialize)]
struct ProfileRequest {
    g: ProfileFunction,
    r: f64,
    #[serde(default)]
    z_min: Option<f64>,
    #[serde(default)]
    z_max: Option<f64>,
    #[serde(default)]
    n: Option<usize>,
}

/// Sample a scalar convex function, its proximal mapping, and its Moreau
/// envelope over a grid, for the smoothing-profile plot.
pub fn moreau_profile_json(request: &str) -> String {
    let req: ProfileRequest = match serde_json::from_str(request) {
        Ok(r) => r,
        Err(e) => return err_json(format_args!("bad request: {e}")),
    };
    if !(req.r > 0.0) {
        return err_json("r must be positive");
    }
    let g = match req.g {
        ProfileFunction::L1 { weight } => {
            if !(weight >= 0.0) {
                return err_json("weight must be nonnegative");
            }
            ConvexFunction::L1Norm { dim: 1, weight }
        }
        ProfileFunction::Box { lo, hi } => {
            if !(lo <= hi) {
                return err_json("box needs lo <= hi");
            }
            ConvexFunction::BoxIndicator {
                lo: DVector::from_element(1, lo),
                hi: DVector::from_element(1, hi),
            }
        }
        ProfileFunction::Nonpos => ConvexFunction::NonpositiveOrthantIndicator { dim: 1 },
    };
    let z_min = req.z_min.unwrap_or(-3.0);
    let z_max = req.z_max.unwrap_or(3.0);
    let n = req.n.unwrap_or(241).clamp(2, 4001);
    if !(z_min < z_max) {
        return err_json("need z_min < z_max");
    }
    let mut zs = Vec::with_capacity(n);
    let mut value = Vec::with_capacity(n);
    let mut prox = Vec::with_capacity(n);
    let mut envelope = Vec::with_capacity(n);
    for i in 0..n {
        let z = z_min + (z_max - z_min) * i as f64 / (n - 1) as f64;
        let zv = DVector::from_element(1, z);
        let val = g.value(&zv);
        let p = match g.prox(req.r, &zv) {
            Ok(p) => p[0],
            Err(e) => return err_json(e),
        };
        let env = match g.moreau_value(req.r, &zv) {
            Ok(e) => e,
            Err(e) => return err_json(e),
        };
        zs.push(z);
        value.push(if val.is_finite() { Some(val) } else { None });
        prox.push(p);
        envelope.push(env);
    }
    json!({
        "schema_version": 1,
        "r": req.r,
        "z": zs,
        "value": value,
        "prox": prox,
        "envelope": envelope,
    })
    .to_string()
}

#[derive(Deserialize)]
struct GrowthRequest {
    problem: String,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default)]
    rho: Option<f64>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

/// Quadratic-growth scatter around a catalog solution: for random feasible
/// x near x-bar and multipliers y near the reference, the ratio
/// `2 (L(x,y,rho) - L(x_bar,y,rho)) / ||x - x_bar||^2` against the distance.
pub fn growth_scatter_json(request: &str) -> String {
    let req: GrowthRequest = match serde_json::from_str(request) {
        Ok(r) => r,
        Err(e) => return err_json(format_args!("bad request: {e}")),
    };
    let entry = match catalog::by_id(&req.problem) {
        Ok(e) => e,
        Err(e) => return err_json(e),
    };
    let gamma = req.gamma.unwrap_or(0.1);
    let rho = req.rho.unwrap_or(10.0);
    let samples = req.samples.unwrap_or(300).clamp(1, 5000);
    if !(gamma > 0.0) || !(rho > 0.0) {
        return err_json("gamma and rho must be positive");
    }
    let ctx = match AugEvalContext::new(&entry.problem, rho) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let xbar = &entry.known.x_bar;
    let ybar = &entry.known.reference_multiplier;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed.unwrap_or(0));
    let mut ball = |dim: usize| loop {
        let u = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let n = u.norm();
        if n <= 1.0 && n > 1e-12 {
            break u;
        }
    };
    let mut dist = Vec::new();
    let mut ratio = Vec::new();
    let mut kappa_hat = f64::INFINITY;
    for _ in 0..samples {
        let bx = ball(xbar.len());
        let by = ball(ybar.len());
        let x = match entry.problem.theta.project(&(xbar + bx * gamma)) {
            Ok(x) => x,
            Err(e) => return err_json(e),
        };
        let y = match entry.known.multiplier_set.project(&(ybar + by * gamma)) {
            Ok(y) => y,
            Err(e) => return err_json(e),
        };
        let d = (&x - xbar).norm();
        if d <= 1e-12 {
            continue;
        }
        let growth = match (ctx.value(&x, &y), ctx.value(xbar, &y)) {
            (Ok(a), Ok(b)) => 2.0 * (a - b) / (d * d),
            (Err(e), _) | (_, Err(e)) => return err_json(e),
        };
        kappa_hat = kappa_hat.min(growth);
        dist.push(d);
        ratio.push(growth);
    }
    json!({
        "schema_version": 1,
        "problem": entry.id,
        "rho": rho,
        "gamma": gamma,
        "dist": dist,
        "ratio": ratio,
        "kappa_hat": if kappa_hat.is_finite() { Some(kappa_hat) } else { None },
    })
    .to_string()
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn solve_trace(request: &str) -> String {
        crate::solve_trace_json(request)
    }

    #[wasm_bindgen]
    pub fn moreau_profile(request: &str) -> String {
        crate::moreau_profile_json(request)
    }

    #[wasm_bindgen]
    pub fn growth_scatter(request: &str) -> String {
        crate::growth_scatter_json(request)
    }
}
