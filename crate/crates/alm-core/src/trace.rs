//! Text format for iteration traces: a commented header followed by CSV
//! summary columns. Parsed records carry the summary columns only; the
//! iterate vectors are not serialized.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::solver::{IterationRecord, RunStatus, RunTrace, SolverConfig};
use crate::{AlmError, Result};

pub const TRACE_VERSION_LINE: &str = "# alm trace v1";
const COLUMNS: &str = "k,rho,eps,residual,step_norm,inner_iters,dist_primal,dist_dual,q_ratio";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_trace(trace: &RunTrace) -> String {
    let mut out = String::new();
    out.push_str(TRACE_VERSION_LINE);
    out.push('\n');
    if let Some(id) = &trace.problem_id {
        let _ = writeln!(out, "# problem: {id}");
    }
    let _ = writeln!(out, "# status: {}", trace.status.as_str());
    let config =
        serde_json::to_string(&trace.config).expect("solver config always serializes");
    let _ = writeln!(out, "# config: {config}");
    if !trace.locality_marked.is_empty() {
        let marks: Vec<String> =
            trace.locality_marked.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "# locality_marked: {}", marks.join(","));
    }
    out.push_str(COLUMNS);
    out.push('\n');
    let mut prev_residual: Option<f64> = None;
    for rec in &trace.records {
        let q = match prev_residual {
            Some(prev) if prev > 0.0 => (rec.residual / prev).to_string(),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            rec.k,
            rec.rho,
            rec.eps,
            rec.residual,
            rec.step_norm,
            rec.inner_iters,
            opt(rec.dist_primal),
            opt(rec.dist_dual),
            q
        );
        prev_residual = Some(rec.residual);
    }
    out
}

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written trace.
pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    let text = render_trace(trace);
    let tmp = path.with_file_name(format!(
        "{}.tmp{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trace".to_string()),
        std::process::id()
    ));
    std::fs::write(&tmp, text)
        .map_err(|e| AlmError::data(format!("writing {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| AlmError::data(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| AlmError::data(format!("line {line_no}: bad number {field:?}")))
}

fn parse_opt_f64(field: &str, line_no: usize) -> Result<Option<f64>> {
    let t = field.trim();
    if t.is_empty() {
        Ok(None)
    } else {
        parse_f64(t, line_no).map(Some)
    }
}

/// Parses a rendered trace. Unknown header keys are ignored; the version
/// line, status, config, and the column row are required. Parsed records
/// have empty iterate vectors.
pub fn parse_trace(text: &str) -> Result<RunTrace> {
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, first)) if first.trim() == TRACE_VERSION_LINE => {}
        _ => return Err(AlmError::data("not an alm trace: version line missing")),
    }
    let mut problem_id = None;
    let mut status = None;
    let mut config: Option<SolverConfig> = None;
    let mut locality_marked = Vec::new();
    let mut header_done = false;
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((key, value)) = rest.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "problem" => problem_id = Some(value.to_string()),
                    "status" => {
                        status = Some(RunStatus::parse(value).ok_or_else(|| {
                            AlmError::data(format!("line {line_no}: unknown status {value:?}"))
                        })?)
                    }
                    "config" => {
                        config = Some(serde_json::from_str(value).map_err(|e| {
                            AlmError::data(format!("line {line_no}: bad config: {e}"))
                        })?)
                    }
                    "locality_marked" => {
                        for part in value.split(',') {
                            let part = part.trim();
                            if part.is_empty() {
                                continue;
                            }
                            locality_marked.push(part.parse().map_err(|_| {
                                AlmError::data(format!("line {line_no}: bad mark {part:?}"))
                            })?);
                        }
                    }
                    _ => {} // forward compatibility
                }
            }
            continue;
        }
        if !header_done {
            if line != COLUMNS {
                return Err(AlmError::data(format!(
                    "line {line_no}: expected column header {COLUMNS:?}"
                )));
            }
            header_done = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(AlmError::data(format!(
                "line {line_no}: expected 9 fields, got {}",
                fields.len()
            )));
        }
        records.push(IterationRecord {
            k: fields[0].trim().parse().map_err(|_| {
                AlmError::data(format!("line {line_no}: bad iteration index"))
            })?,
            x: DVector::zeros(0),
            y: DVector::zeros(0),
            rho: parse_f64(fields[1], line_no)?,
            eps: parse_f64(fields[2], line_no)?,
            residual: parse_f64(fields[3], line_no)?,
            step_norm: parse_f64(fields[4], line_no)?,
            inner_iters: fields[5].trim().parse().map_err(|_| {
                AlmError::data(format!("line {line_no}: bad inner iteration count"))
            })?,
            dist_primal: parse_opt_f64(fields[6], line_no)?,
            dist_dual: parse_opt_f64(fields[7], line_no)?,
        });
        // field 8 (q_ratio) is derived; ignored on input.
    }
    let status = status.ok_or_else(|| AlmError::data("trace missing status line"))?;
    let config = config.ok_or_else(|| AlmError::data("trace missing config line"))?;
    if !header_done {
        return Err(AlmError::data("trace missing column header"));
    }
    Ok(RunTrace {
        problem_id,
        records,
        status,
        locality_marked,
        config,
    })
}
