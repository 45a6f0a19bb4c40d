//! Laser-range localization and the single-shot line-of-sight baseline.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::camera::{Pixel, Point3, ProjectionMatrix};
use crate::error::{Error, Result};
use crate::solver::{gauss_newton, SolveReport, SolverConfig};

/// Minimum separation between an iterate and a range station, meters.
pub const STATION_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeObservation {
    /// Platform position when the range was taken.
    pub station: Point3,
    /// Measured distance to the target, meters.
    pub range: f64,
}

impl RangeObservation {
    pub fn new(station: Point3, range: f64) -> Result<Self> {
        if !station.iter().all(|v| v.is_finite()) || !range.is_finite() {
            return Err(Error::NonFinite("range observation"));
        }
        if range <= 0.0 {
            return Err(Error::InvalidInput(format!("range must be positive, got {range}")));
        }
        Ok(Self { station, range })
    }
}

/// A single direction-plus-distance measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosObservation {
    pub station: Point3,
    /// Unit line-of-sight direction in the world frame.
    pub ray: Vector3<f64>,
    pub range: f64,
}

impl LosObservation {
    pub fn new(station: Point3, ray: Vector3<f64>, range: f64) -> Result<Self> {
        if !station.iter().chain(ray.iter()).all(|v| v.is_finite()) || !range.is_finite() {
            return Err(Error::NonFinite("line-of-sight observation"));
        }
        if (ray.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "ray must be unit length, got norm {}",
                ray.norm()
            )));
        }
        if range <= 0.0 {
            return Err(Error::InvalidInput(format!("range must be positive, got {range}")));
        }
        Ok(Self { station, ray, range })
    }

    /// Ray through `pixel` of a calibrated frame, anchored at the camera center.
    pub fn from_projection(projection: &ProjectionMatrix, pixel: &Pixel, range: f64) -> Result<Self> {
        let station = projection
            .camera_center()
            .ok_or_else(|| Error::DegenerateGeometry("projection has no finite camera center".into()))?;
        let ray = projection
            .ray_direction(pixel)
            .ok_or_else(|| Error::DegenerateGeometry("pixel ray is undefined".into()))?;
        Self::new(station, ray, range)
    }
}

fn offsets(observations: &[RangeObservation], x0: &Point3) -> Result<Vec<(Vector3<f64>, f64)>> {
    observations
        .iter()
        .enumerate()
        .map(|(index, obs)| {
            let d = x0 - obs.station;
            let dist = d.norm();
            if dist <= STATION_EPSILON {
                Err(Error::StationCoincidence { index })
            } else {
                Ok((d, dist))
            }
        })
        .collect()
}

/// `dφ = φ − f(x0)`: measured minus predicted distance per station.
pub fn range_residuals(observations: &[RangeObservation], x0: &Point3) -> Result<DVector<f64>> {
    let offs = offsets(observations, x0)?;
    Ok(DVector::from_iterator(
        observations.len(),
        observations.iter().zip(&offs).map(|(obs, (_, dist))| obs.range - dist),
    ))
}

/// Jacobian `h`: row `i` is the unit vector from station `i` toward `x0`.
///
/// The denominator is the predicted distance at `x0`, which keeps the matrix
/// the exact derivative of [`range_residuals`]' prediction.
pub fn range_jacobian(observations: &[RangeObservation], x0: &Point3) -> Result<DMatrix<f64>> {
    let offs = offsets(observations, x0)?;
    let mut h = DMatrix::zeros(observations.len(), 3);
    for (i, (d, dist)) in offs.iter().enumerate() {
        h.set_row(i, &(d / *dist).transpose());
    }
    Ok(h)
}

pub fn solve_range(observations: &[RangeObservation], x0: &Point3, config: &SolverConfig) -> Result<SolveReport> {
    if observations.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "{} range(s) cannot fix 3 unknowns",
            observations.len()
        )));
    }
    gauss_newton(*x0, config, |x| {
        Ok((range_residuals(observations, x)?, range_jacobian(observations, x)?))
    })
}

/// `station + range·ray`.
pub fn los_single_shot(obs: &LosObservation) -> Point3 {
    obs.station + obs.ray * obs.range
}
