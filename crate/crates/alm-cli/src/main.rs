//! `alm`: solve catalog problems, run solution-quality diagnostics, and
//! classify convergence rates from trace files.
//!
//! Exit codes: solve maps the run status (0 converged, 2 locality failed,
//! 3 subproblem failed, 4 outer-iteration cap); diagnose returns 0 on
//! pass (including vacuous) and 1 on fail or inconclusive; 64 flags usage
//! errors (unknown problem or check, bad flag values), 65 data errors
//! (malformed or too-short traces).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use alm_core::catalog;
use alm_core::diagnostics::{
    aug_quotient_identity_check, consecutive_step_bound_check, error_bound_estimate,
    semi_stability_check, sosc_check, uqgc_check, DiagnosticsReport, QuotientGrid,
};
use alm_core::rates::estimate_rates;
use alm_core::solver::{alm_run, RhoSchedule, RunStatus, SolverConfig};
use alm_core::trace::{parse_trace, write_trace};
use alm_core::AlmError;

const SCHEMA_VERSION: u64 = 1;

#[derive(Parser)]
#[command(name = "alm", version, about = "Augmented Lagrangian solver harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the solver on a catalog problem and write a trace file.
    Solve(SolveArgs),
    /// Run a solution-quality check on a catalog problem.
    Diagnose(DiagnoseArgs),
    /// Classify convergence rates from a trace file.
    Rates(RatesArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Catalog problem id (P1..P4).
    problem: String,
    /// Constant penalty parameter.
    #[arg(long, conflicts_with = "rho_geometric")]
    rho: Option<f64>,
    /// Geometric penalty schedule R0:TAU[:MAX].
    #[arg(long, value_name = "R0:TAU[:MAX]")]
    rho_geometric: Option<String>,
    /// Locality constant c-hat.
    #[arg(long = "chat")]
    chat: Option<f64>,
    /// Stop when the KKT residual falls below this value.
    #[arg(long)]
    stop: Option<f64>,
    /// Inner tolerance coefficient sigma in min(c_lin t, sigma t^p).
    #[arg(long)]
    tol_sigma: Option<f64>,
    /// Inner tolerance exponent p.
    #[arg(long)]
    tol_p: Option<f64>,
    /// Inner tolerance linear coefficient c_lin.
    #[arg(long)]
    tol_lin: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trace file path (default <id>.trace.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Catalog problem id (P1..P4).
    problem: String,
    /// One of: sosc, uqgc, errbound, semistab, lemma45, stepbound.
    check: String,
    /// Multiplier as comma-separated components (sosc; default reference).
    #[arg(long)]
    multiplier: Option<String>,
    /// Sample count (meaning depends on the check).
    #[arg(long)]
    samples: Option<usize>,
    /// Neighborhood radius for primal/dual sampling (uqgc).
    #[arg(long)]
    gamma: Option<f64>,
    /// Growth constant target (uqgc).
    #[arg(long)]
    kappa: Option<f64>,
    /// Comma-separated penalty values (uqgc, stepbound).
    #[arg(long, value_name = "LIST")]
    rho_list: Option<String>,
    /// Sampling radius (errbound, stepbound).
    #[arg(long)]
    radius: Option<f64>,
    /// Penalty parameter (lemma45).
    #[arg(long)]
    rho: Option<f64>,
    /// Comma-separated step sizes (lemma45).
    #[arg(long, value_name = "LIST")]
    t_list: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    /// Trace file produced by `alm solve`.
    trace: PathBuf,
    /// Catalog id; enables distances to the known solution.
    #[arg(long)]
    problem: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.cmd {
        Cmd::Solve(args) => cmd_solve(&args),
        Cmd::Diagnose(args) => cmd_diagnose(&args),
        Cmd::Rates(args) => cmd_rates(&args),
    };
    ExitCode::from(code)
}

fn error_code(e: &AlmError) -> u8 {
    match e {
        AlmError::Input(_) => 64,
        AlmError::Data(_) => 65,
        AlmError::Capability(_) | AlmError::Numerical(_) => 1,
    }
}

fn fail(e: &AlmError) -> u8 {
    eprintln!("error: {e}");
    error_code(e)
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, u8> {
    let mut out = Vec::new();
    for part in text.split(',') {
        match part.trim().parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) => {
                eprintln!("error: cannot parse {what} entry {part:?} as a number");
                return Err(64);
            }
        }
    }
    if out.is_empty() {
        eprintln!("error: empty {what}");
        return Err(64);
    }
    Ok(out)
}

fn parse_vector(text: &str, what: &str) -> Result<DVector<f64>, u8> {
    parse_f64_list(text, what).map(|v| DVector::from_vec(v))
}

fn build_config(args: &SolveArgs) -> Result<SolverConfig, u8> {
    let mut cfg = SolverConfig::default();
    if let Some(r) = args.rho {
        cfg.rho_schedule = RhoSchedule::Constant(r);
    }
    if let Some(spec) = &args.rho_geometric {
        let parts = parse_f64_list(spec.replace(':', ",").as_str(), "--rho-geometric")?;
        match parts.as_slice() {
            [initial, factor] => {
                cfg.rho_schedule = RhoSchedule::Geometric {
                    initial: *initial,
                    factor: *factor,
                    cap: 1e16,
                };
            }
            [initial, factor, cap] => {
                cfg.rho_schedule = RhoSchedule::Geometric {
                    initial: *initial,
                    factor: *factor,
                    cap: *cap,
                };
            }
            _ => {
                eprintln!("error: --rho-geometric expects R0:TAU or R0:TAU:MAX");
                return Err(64);
            }
        }
    }
    if let Some(c) = args.chat {
        cfg.c_hat = c;
    }
    if let Some(s) = args.stop {
        cfg.stop_residual = s;
    }
    if let Some(s) = args.tol_sigma {
        cfg.tol.sigma = s;
    }
    if let Some(p) = args.tol_p {
        cfg.tol.p = p;
    }
    if let Some(c) = args.tol_lin {
        cfg.tol.c_lin = c;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn cmd_solve(args: &SolveArgs) -> u8 {
    let entry = match catalog::by_id(&args.problem) {
        Ok(e) => e,
        Err(e) => return fail(&e),
    };
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (x0, y0) = &entry.default_start;
    let mut trace = match alm_run(&entry.problem, x0, y0, &cfg, Some(&entry.known)) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    trace.problem_id = Some(entry.id.to_string());
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.trace.csv", entry.id)));
    if let Err(e) = write_trace(&out, &trace) {
        return fail(&e);
    }
    let last = trace.records.last().expect("run always records k=0");
    println!("problem: {}", entry.id);
    println!("status: {}", trace.status.as_str());
    println!("outer_iterations: {}", last.k);
    println!("final_residual: {:e}", last.residual);
    println!("trace: {}", out.display());
    match estimate_rates(&trace.records, Some(&entry.known)) {
        Ok(report) => println!(
            "rate: {} (q_hat = {})",
            report.classification.as_str(),
            report.q_hat
        ),
        Err(e) => println!("rate: unavailable ({e})"),
    }
    match trace.status {
        RunStatus::Converged => 0,
        RunStatus::LocalityFailed => 2,
        RunStatus::SubproblemFailed => 3,
        RunStatus::MaxOuter => 4,
    }
}

/// Axis directions plus two normalized diagonals; a deterministic probe
/// set for the quotient identity.
fn default_directions(n: usize) -> Vec<DVector<f64>> {
    let mut dirs = Vec::new();
    for i in 0..n.min(2) {
        dirs.push(DVector::from_fn(n, |j, _| if j == i { 1.0 } else { 0.0 }));
    }
    let scale = (n as f64).sqrt();
    dirs.push(DVector::from_element(n, 1.0) / scale);
    dirs.push(DVector::from_fn(n, |j, _| if j % 2 == 0 { 1.0 } else { -1.0 }) / scale);
    dirs
}

fn atomic_write(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)
}

fn emit_report(report: &DiagnosticsReport, out: Option<&Path>) -> u8 {
    let mut value = serde_json::to_value(report).expect("report serializes");
    value
        .as_object_mut()
        .expect("report is a JSON object")
        .insert("schema_version".to_string(), SCHEMA_VERSION.into());
    let text = serde_json::to_string_pretty(&value).expect("report serializes");
    println!("{text}");
    if let Some(path) = out {
        if let Err(e) = atomic_write(path, &text) {
            eprintln!("error: cannot write report to {}: {e}", path.display());
            return 65;
        }
    }
    if report.passed() {
        0
    } else {
        1
    }
}

fn cmd_diagnose(args: &DiagnoseArgs) -> u8 {
    let entry = match catalog::by_id(&args.problem) {
        Ok(e) => e,
        Err(e) => return fail(&e),
    };
    let seed = args.seed.unwrap_or(0);
    let p = &entry.problem;
    let known = &entry.known;
    let result = match args.check.as_str() {
        "sosc" => {
            let y = match &args.multiplier {
                Some(text) => match parse_vector(text, "--multiplier") {
                    Ok(v) => v,
                    Err(code) => return code,
                },
                None => known.reference_multiplier.clone(),
            };
            sosc_check(p, known, &y, args.samples.unwrap_or(256), seed)
        }
        "uqgc" => {
            let rho_list = match &args.rho_list {
                Some(text) => match parse_f64_list(text, "--rho-list") {
                    Ok(v) => v,
                    Err(code) => return code,
                },
                None => vec![10.0, 100.0, 1000.0],
            };
            uqgc_check(
                p,
                known,
                args.gamma.unwrap_or(0.1),
                &rho_list,
                args.samples.unwrap_or(500),
                args.kappa.unwrap_or(0.9),
                seed,
            )
        }
        "errbound" => error_bound_estimate(
            p,
            known,
            args.radius.unwrap_or(1e-2),
            args.samples.unwrap_or(1000),
            seed,
        ),
        "semistab" => {
            let z = p.mapping.eval(&known.x_bar).and_then(|z| {
                semi_stability_check(
                    &p.g,
                    &z,
                    &known.reference_multiplier,
                    args.samples.unwrap_or(16),
                    &QuotientGrid::with_seed(seed),
                )
            });
            z
        }
        "lemma45" => {
            let t_list = match &args.t_list {
                Some(text) => match parse_f64_list(text, "--t-list") {
                    Ok(v) => v,
                    Err(code) => return code,
                },
                None => vec![0.1, 0.05, 0.01],
            };
            let dirs = default_directions(p.n());
            aug_quotient_identity_check(p, known, args.rho.unwrap_or(1.0), &t_list, &dirs)
        }
        "stepbound" => {
            let rho_list = match &args.rho_list {
                Some(text) => match parse_f64_list(text, "--rho-list") {
                    Ok(v) => v,
                    Err(code) => return code,
                },
                None => vec![10.0, 100.0],
            };
            consecutive_step_bound_check(
                p,
                known,
                &rho_list,
                args.radius.unwrap_or(1e-2),
                args.samples.unwrap_or(25),
                seed,
            )
        }
        other => {
            eprintln!(
                "error: unknown check {other:?} (expected sosc, uqgc, errbound, semistab, \
                 lemma45, or stepbound)"
            );
            return 64;
        }
    };
    match result {
        Ok(report) => emit_report(&report, args.out.as_deref()),
        Err(e @ AlmError::Capability(_)) => {
            eprintln!("inconclusive: {e}");
            1
        }
        Err(e) => fail(&e),
    }
}

fn cmd_rates(args: &RatesArgs) -> u8 {
    let text = match std::fs::read_to_string(&args.trace) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.trace.display());
            return 65;
        }
    };
    let trace = match parse_trace(&text) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let known = match &args.problem {
        Some(id) => match catalog::by_id(id) {
            Ok(entry) => Some(entry.known),
            Err(e) => return fail(&e),
        },
        None => None,
    };
    let report = match estimate_rates(&trace.records, known.as_ref()) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    println!("trace: {}", args.trace.display());
    if let Some(id) = trace.problem_id.as_deref() {
        println!("problem: {id}");
    }
    println!("records: {}", trace.records.len());
    println!(
        "source: {}",
        if report.used_distances {
            "known-solution distances"
        } else {
            "residuals"
        }
    );
    let primary = if report.used_distances {
        report
            .distance_ratios
            .as_deref()
            .expect("distance classification implies distance ratios")
    } else {
        report.residual_ratios.as_slice()
    };
    println!("k q");
    for (i, q) in primary.iter().enumerate() {
        println!("{} {}", i + 1, q);
    }
    println!("q_hat = {}", report.q_hat);
    println!("classification = {}", report.classification.as_str());
    0
}
