//! Pixel-only localization by Gauss-Newton on the pinhole model.

use nalgebra::{DMatrix, DVector};

use crate::camera::{Pixel, Point3, ProjectionMatrix, DEPTH_EPSILON};
use crate::error::{Error, Result};
use crate::solver::{gauss_newton, SolveReport, SolverConfig};

/// One frame: its projection matrix and the measured target pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisionObservation {
    pub projection: ProjectionMatrix,
    pub pixel: Pixel,
}

impl VisionObservation {
    pub fn new(projection: ProjectionMatrix, pixel: Pixel) -> Result<Self> {
        if !pixel.x.is_finite() || !pixel.y.is_finite() {
            return Err(Error::NonFinite("pixel"));
        }
        Ok(Self { projection, pixel })
    }
}

fn depth_checked(obs: &VisionObservation, frame: usize, x0: &Point3) -> Result<nalgebra::Vector3<f64>> {
    let h = obs.projection.homogeneous(x0);
    if h[2].abs() <= DEPTH_EPSILON {
        return Err(Error::DepthDegenerate { frame });
    }
    Ok(h)
}

/// `dψ = ψ − F(X0)` ordered `(x̃₁ − x̂₁, ỹ₁ − ŷ₁, …)`.
pub fn vision_residuals(observations: &[VisionObservation], x0: &Point3) -> Result<DVector<f64>> {
    if observations.is_empty() {
        return Err(Error::InsufficientViews(0));
    }
    let mut r = DVector::zeros(2 * observations.len());
    for (i, obs) in observations.iter().enumerate() {
        let h = depth_checked(obs, i, x0)?;
        r[2 * i] = obs.pixel.x - h[0] / h[2];
        r[2 * i + 1] = obs.pixel.y - h[1] / h[2];
    }
    Ok(r)
}

/// Analytic Jacobian `H` of the projected pixels with respect to the target.
///
/// Row `2i` is `m_j/M₃ − m_{8+j}·M₁/M₃²`, row `2i+1` is
/// `m_{4+j}/M₃ − m_{8+j}·M₂/M₃²` for `j = 0, 1, 2`.
pub fn vision_jacobian(observations: &[VisionObservation], x0: &Point3) -> Result<DMatrix<f64>> {
    if observations.is_empty() {
        return Err(Error::InsufficientViews(0));
    }
    let mut jac = DMatrix::zeros(2 * observations.len(), 3);
    for (i, obs) in observations.iter().enumerate() {
        let h = depth_checked(obs, i, x0)?;
        let (m1, m2, m3) = (h[0], h[1], h[2]);
        let p = &obs.projection;
        for j in 0..3 {
            jac[(2 * i, j)] = p.m(j) / m3 - p.m(8 + j) * m1 / (m3 * m3);
            jac[(2 * i + 1, j)] = p.m(4 + j) / m3 - p.m(8 + j) * m2 / (m3 * m3);
        }
    }
    Ok(jac)
}

/// Iterative least-squares target estimate from pixels alone.
pub fn solve_vision(observations: &[VisionObservation], x0: &Point3, config: &SolverConfig) -> Result<SolveReport> {
    if observations.len() < 2 {
        return Err(Error::DegenerateGeometry(format!(
            "{} frame(s) give {} equations for 3 unknowns",
            observations.len(),
            2 * observations.len()
        )));
    }
    gauss_newton(*x0, config, |x| {
        Ok((vision_residuals(observations, x)?, vision_jacobian(observations, x)?))
    })
}
