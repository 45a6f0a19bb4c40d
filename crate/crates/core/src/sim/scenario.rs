//! Synthetic flight geometry around a ground target at the world origin.
//!
//! The default track is a horizontal arc at constant height and constant
//! slant range, so every observation shares the same inclination angle
//! `θ = arccos(height / slant_range)`. Azimuths are spread evenly so the
//! first and last lines of sight subtend exactly `gamma`:
//! `sin(Δa/2) = slant·sin(γ/2) / r` with `r` the horizontal radius.

use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, PlatformPose, Point3, ProjectionMatrix};
use crate::error::{Error, Result};
use crate::fusion::ObservationSet;
use crate::track::{observation_set_from_frames, TrackFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trajectory {
    /// Constant height and slant range.
    #[default]
    Arc,
    /// Straight chord between the arc endpoints; slant range dips mid-track.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    /// Platform height above the target, meters.
    pub height: f64,
    /// Platform-to-target distance at the track endpoints, meters.
    pub slant_range: f64,
    pub n_obs: usize,
    /// Angle between the first and last lines of sight, degrees.
    pub gamma: f64,
    pub trajectory: Trajectory,
    pub camera: CameraIntrinsics,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            height: 2000.0,
            slant_range: 5000.0,
            n_obs: 10,
            gamma: 30.0,
            trajectory: Trajectory::Arc,
            camera: CameraIntrinsics::default(),
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.height > 0.0 && self.height < self.slant_range) || !self.slant_range.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need 0 < height < slant_range, got height={} slant_range={}",
                self.height, self.slant_range
            )));
        }
        if self.n_obs < 2 {
            return Err(Error::InvalidInput(format!("n_obs must be >= 2, got {}", self.n_obs)));
        }
        if !(self.gamma > 0.0 && self.gamma < 180.0) {
            return Err(Error::InvalidInput(format!(
                "gamma must lie in (0, 180), got {}",
                self.gamma
            )));
        }
        self.camera.validate()
    }

    /// Inclination of every arc line of sight from the vertical, degrees.
    pub fn observation_angle_deg(&self) -> f64 {
        (self.height / self.slant_range).acos().to_degrees()
    }
}

/// Ground truth of one simulated track.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub target: Point3,
    pub true_poses: Vec<PlatformPose>,
    pub camera: CameraIntrinsics,
}

impl Scenario {
    /// Noise-free pixels and ranges as track frames.
    pub fn true_frames(&self) -> Result<Vec<TrackFrame>> {
        self.true_poses
            .iter()
            .enumerate()
            .map(|(i, pose)| {
                let pixel = ProjectionMatrix::build(&self.camera, pose)
                    .project(&self.target)
                    .map_err(|_| Error::DepthDegenerate { frame: i })?;
                Ok(TrackFrame {
                    pose: *pose,
                    pixel,
                    range: Some((self.target - pose.position()).norm()),
                })
            })
            .collect()
    }
}

/// Builds the platform track for `spec`, boresight-locked on the origin.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let radius = (spec.slant_range * spec.slant_range - spec.height * spec.height).sqrt();
    let half_gamma = (spec.gamma / 2.0).to_radians();
    let sin_half_span = spec.slant_range * half_gamma.sin() / radius;
    if sin_half_span > 1.0 {
        let max_gamma = 2.0 * (radius / spec.slant_range).asin().to_degrees();
        return Err(Error::GeometryInfeasible(format!(
            "gamma {} deg exceeds the {:.4} deg reachable at height {} m and slant range {} m",
            spec.gamma, max_gamma, spec.height, spec.slant_range
        )));
    }
    let span = 2.0 * sin_half_span.asin();
    let at_azimuth = |a: f64| Point3::new(radius * a.cos(), radius * a.sin(), spec.height);
    let last = (spec.n_obs - 1) as f64;
    let first_pos = at_azimuth(-span / 2.0);
    let last_pos = at_azimuth(span / 2.0);

    let target = Point3::zeros();
    let true_poses = (0..spec.n_obs)
        .map(|i| {
            let s = i as f64 / last;
            let position = match spec.trajectory {
                Trajectory::Arc => at_azimuth(-span / 2.0 + span * s),
                Trajectory::Line => first_pos + (last_pos - first_pos) * s,
            };
            PlatformPose::looking_at(position, &target)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Scenario {
        target,
        true_poses,
        camera: spec.camera,
    })
}

/// Alias of [`generate_scenario`] for the default arc trajectory.
pub fn generate_arc_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    generate_scenario(&ScenarioSpec {
        trajectory: Trajectory::Arc,
        ..*spec
    })
}

/// Noise-free observation set of a scenario.
pub fn synthesize_observations(sc: &Scenario) -> Result<ObservationSet> {
    observation_set_from_frames(&sc.camera, &sc.true_frames()?)
}
