//! Result tables: one row per (gamma, algorithm) cell.

use std::path::Path;

use super::{io_err, IoError, IoResult};
use crate::sim::TrialStatistics;

pub const HEADER: [&str; 6] = [
    "gamma_deg",
    "algorithm",
    "median_error_m",
    "rms_error_m",
    "trials",
    "converged_fraction",
];

/// Six significant digits, positional for exponents in `[-4, 6)` and
/// scientific otherwise.
pub fn format_sig6(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.00000".into();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        sci
    }
}

/// Rows sorted by gamma, then algorithm name.
pub fn render_results(stats: &[TrialStatistics]) -> IoResult<String> {
    if stats.is_empty() {
        return Err(IoError::InsufficientData("no statistics to write".into()));
    }
    let mut rows: Vec<&TrialStatistics> = stats.iter().collect();
    rows.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.algorithm.cmp(&b.algorithm)));

    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let to_data = |e: csv::Error| IoError::InsufficientData(e.to_string());
    w.write_record(HEADER).map_err(to_data)?;
    for s in rows {
        w.write_record([
            format_sig6(s.gamma),
            s.algorithm.to_string(),
            format_sig6(s.median_error),
            format_sig6(s.rms_error),
            s.trials.to_string(),
            format_sig6(s.converged_fraction),
        ])
        .map_err(to_data)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::InsufficientData(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_results(stats: &[TrialStatistics], path: &Path) -> IoResult<()> {
    let text = render_results(stats)?;
    std::fs::write(path, text).map_err(io_err(path))
}
