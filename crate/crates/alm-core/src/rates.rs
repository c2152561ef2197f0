//! Empirical convergence-rate classification from iteration traces.

use serde::Serialize;

use crate::model::KnownSolution;
use crate::solver::IterationRecord;
use crate::{AlmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateClass {
    QLinear,
    QSuperlinear,
    Inconclusive,
}

impl RateClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::QLinear => "q_linear",
            Self::QSuperlinear => "q_superlinear",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub residual_ratios: Vec<f64>,
    /// Present when a known solution supplied distances.
    pub distance_ratios: Option<Vec<f64>>,
    /// Geometric mean of the last min(5, available) primary ratios.
    pub q_hat: f64,
    pub classification: RateClass,
    /// True when classification ran on distances rather than residuals.
    pub used_distances: bool,
}

fn ratios(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in values.windows(2) {
        if w[0] <= 0.0 {
            break;
        }
        out.push(w[1] / w[0]);
    }
    out
}

fn distance(rec: &IterationRecord, known: &KnownSolution) -> Result<f64> {
    let dp = match rec.dist_primal {
        Some(d) => d,
        None if rec.x.len() > 0 => (&rec.x - &known.x_bar).norm(),
        None => {
            return Err(AlmError::data(
                "record carries neither distance columns nor iterates",
            ))
        }
    };
    let dd = match rec.dist_dual {
        Some(d) => d,
        None if rec.y.len() > 0 => known.multiplier_set.dist(&rec.y)?,
        None => {
            return Err(AlmError::data(
                "record carries neither distance columns nor iterates",
            ))
        }
    };
    Ok(dp.hypot(dd))
}

/// Classifies the tail behavior of a run. Distances to a known solution
/// are preferred when available; otherwise KKT residuals stand in. The
/// estimate uses the last min(5, available) successive ratios r_{k+1}/r_k:
/// Q-linear when all of them are at most 0.95, Q-superlinear when they are
/// additionally strictly decreasing with the final ratio at most half the
/// geometric mean.
pub fn estimate_rates(
    records: &[IterationRecord],
    known: Option<&KnownSolution>,
) -> Result<RateReport> {
    if records.len() < 5 {
        return Err(AlmError::data(
            "rate estimation needs at least 5 iteration records",
        ));
    }
    let residuals: Vec<f64> = records.iter().map(|r| r.residual).collect();
    let residual_ratios = ratios(&residuals);
    let distance_ratios = match known {
        Some(ks) => {
            let ds = records
                .iter()
                .map(|r| distance(r, ks))
                .collect::<Result<Vec<f64>>>()?;
            Some(ratios(&ds))
        }
        None => None,
    };
    let used_distances = distance_ratios.is_some();
    let primary = distance_ratios.as_ref().unwrap_or(&residual_ratios);
    if primary.is_empty() {
        return Err(AlmError::data("no usable successive ratios in trace"));
    }
    let tail = &primary[primary.len() - primary.len().min(5)..];
    let q_hat = tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64;
    let q_hat = q_hat.exp();
    let linear = tail.iter().all(|&r| r <= 0.95);
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let classification = if linear && decreasing && *tail.last().unwrap() <= q_hat / 2.0 {
        RateClass::QSuperlinear
    } else if linear {
        RateClass::QLinear
    } else {
        RateClass::Inconclusive
    };
    Ok(RateReport {
        residual_ratios,
        distance_ratios,
        q_hat,
        classification,
        used_distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn recs(residuals: &[f64]) -> Vec<IterationRecord> {
        residuals
            .iter()
            .enumerate()
            .map(|(k, &r)| IterationRecord {
                k,
                x: DVector::zeros(0),
                y: DVector::zeros(0),
                rho: 10.0,
                eps: 0.0,
                residual: r,
                step_norm: 0.0,
                inner_iters: 0,
                dist_primal: None,
                dist_dual: None,
            })
            .collect()
    }

    #[test]
    fn geometric_half_is_linear() {
        let res: Vec<f64> = (0..8).map(|k| 0.5_f64.powi(k)).collect();
        let rep = estimate_rates(&recs(&res), None).unwrap();
        assert_eq!(rep.classification, RateClass::QLinear);
        assert!((rep.q_hat - 0.5).abs() < 1e-12);
        assert!(!rep.used_distances);
    }

    #[test]
    fn factorial_tail_is_linear_not_superlinear() {
        // Ratios 1/k decrease but the final one stays above half the
        // geometric mean of the tail, so the stricter label is withheld.
        let mut d = vec![1.0];
        for k in 1..8 {
            let last = *d.last().unwrap();
            d.push(last / k as f64);
        }
        let rep = estimate_rates(&recs(&d), None).unwrap();
        assert_eq!(rep.classification, RateClass::QLinear);
    }

    #[test]
    fn quadratic_decay_is_superlinear() {
        let mut d = vec![0.5];
        for _ in 0..5 {
            let last = *d.last().unwrap();
            d.push(last * last);
        }
        let rep = estimate_rates(&recs(&d), None).unwrap();
        assert_eq!(rep.classification, RateClass::QSuperlinear);
    }

    #[test]
    fn harmonic_decay_is_inconclusive() {
        let d: Vec<f64> = (0..25).map(|k| 1.0 / (k + 1) as f64).collect();
        let rep = estimate_rates(&recs(&d), None).unwrap();
        assert_eq!(rep.classification, RateClass::Inconclusive);
    }

    #[test]
    fn short_traces_are_rejected() {
        let err = estimate_rates(&recs(&[1.0, 0.5, 0.25, 0.125]), None).unwrap_err();
        assert!(matches!(err, AlmError::Data(_)));
    }

    #[test]
    fn stored_distance_columns_take_priority() {
        let entry = crate::catalog::p1();
        let mut records = recs(&[1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]);
        for (k, rec) in records.iter_mut().enumerate() {
            let d = 0.4_f64.powi(k as i32);
            rec.dist_primal = Some(d);
            rec.dist_dual = Some(0.0);
        }
        let rep = estimate_rates(&records, Some(&entry.known)).unwrap();
        assert!(rep.used_distances);
        assert!((rep.q_hat - 0.4).abs() < 1e-12);
        assert!((rep.residual_ratios[0] - 0.5).abs() < 1e-12);
        assert_eq!(rep.classification, RateClass::QLinear);
    }

    #[test]
    fn distances_recomputed_from_iterates_when_columns_missing() {
        let entry = crate::catalog::p1();
        let mut records = recs(&[1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]);
        for (k, rec) in records.iter_mut().enumerate() {
            let t = 0.3_f64.powi(k as i32);
            rec.x = DVector::from_row_slice(&[t, 0.0]);
            rec.y = DVector::from_row_slice(&[1.0, 0.0]);
        }
        let rep = estimate_rates(&records, Some(&entry.known)).unwrap();
        assert!(rep.used_distances);
        assert!((rep.q_hat - 0.3).abs() < 1e-12);
    }

    #[test]
    fn missing_distances_and_iterates_is_data_error() {
        let entry = crate::catalog::p1();
        let records = recs(&[1.0, 0.5, 0.25, 0.125, 0.0625]);
        let err = estimate_rates(&records, Some(&entry.known)).unwrap_err();
        assert!(matches!(err, AlmError::Data(_)));
    }
}
