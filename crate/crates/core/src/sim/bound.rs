//! Depth error caused by a line-of-sight angular error at a given
//! intersection angle.
//!
//! Two sight lines from stations `±x` meet at depth `Y = x / tan(γ/2)`.
//! Rotating one of them inward by `δ` moves the intersection to
//! `Y' = x / tan(γ/2 − δ)`; the returned error is `Y' − Y`.

use crate::error::{Error, Result};

pub fn intersection_error_bound(gamma_deg: f64, delta_deg: f64, half_baseline: f64) -> Result<f64> {
    if !(gamma_deg.is_finite() && delta_deg.is_finite() && half_baseline.is_finite()) {
        return Err(Error::NonFinite("bound input"));
    }
    if !(gamma_deg > 0.0 && gamma_deg < 180.0) {
        return Err(Error::InvalidInput(format!(
            "gamma must lie in (0, 180), got {gamma_deg}"
        )));
    }
    if delta_deg < 0.0 {
        return Err(Error::InvalidInput(format!("delta must be >= 0, got {delta_deg}")));
    }
    let margin_deg = gamma_deg / 2.0 - delta_deg;
    if margin_deg <= 0.0 {
        return Err(Error::UnboundedError { margin_deg });
    }
    let depth = |half_angle_deg: f64| half_baseline / half_angle_deg.to_radians().tan();
    Ok(depth(margin_deg) - depth(gamma_deg / 2.0))
}
