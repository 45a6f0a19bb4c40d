//! Per-cell summary statistics of Monte Carlo records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Algorithm;
use crate::sim::monte_carlo::TrialRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStatistics {
    pub gamma: f64,
    pub algorithm: Algorithm,
    /// Median over converged trials; NaN when none converged.
    pub median_error: f64,
    /// Root mean square over converged trials; NaN when none converged.
    pub rms_error: f64,
    pub trials: usize,
    pub converged_fraction: f64,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

pub fn rms(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some((values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt())
}

/// One entry per (gamma, algorithm) cell, ordered by gamma then algorithm
/// name.
pub fn aggregate_stats(records: &[TrialRecord]) -> Result<Vec<TrialStatistics>> {
    if records.is_empty() {
        return Err(Error::EmptyCell);
    }
    let mut cells: BTreeMap<(u64, Algorithm), (f64, Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        if !r.gamma_deg.is_finite() {
            return Err(Error::NonFinite("gamma"));
        }
        if r.gamma_deg <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "gamma must be positive, got {}",
                r.gamma_deg
            )));
        }
        // Positive floats order the same as their bit patterns.
        let key = (r.gamma_deg.to_bits(), r.algorithm);
        let cell = cells.entry(key).or_insert((r.gamma_deg, Vec::new(), 0));
        cell.2 += 1;
        if r.converged && r.error_m.is_finite() {
            cell.1.push(r.error_m);
        }
    }
    Ok(cells
        .into_iter()
        .map(|((_, algorithm), (gamma, errors, trials))| TrialStatistics {
            gamma,
            algorithm,
            median_error: median(&errors).unwrap_or(f64::NAN),
            rms_error: rms(&errors).unwrap_or(f64::NAN),
            trials,
            converged_fraction: errors.len() as f64 / trials as f64,
        })
        .collect())
}
