//! End-to-end localization: seeding and dispatch for every algorithm.
//!
//! Seeds follow one chain: forward intersection seeds the vision and range
//! solves, and the vision estimate seeds all fused solves. When the vision
//! solve fails, the fused solves fall back to the forward intersection and
//! their reports carry [`SolveWarning::InitializerFallback`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::camera::{forward_intersection, Pixel, Point3, Triangulation};
use crate::error::{Error, Result};
use crate::fusion::{solve_fused_unnormalized, solve_fused_with, FusionOptions, ObservationSet};
use crate::range::{los_single_shot, solve_range, LosObservation};
use crate::ridge::{solve_fused_ridge_with, RidgeConfig};
use crate::solver::{SolveReport, SolveWarning, SolverConfig};
use crate::vision::solve_vision;

/// Localization algorithms. Variants are declared in name order so the
/// derived ordering sorts by identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Min-max normalized fusion.
    Fused,
    /// Fusion without normalization.
    FusedRaw,
    /// Normalized fusion with the ridge step.
    FusedRidge,
    /// Single-frame line-of-sight plus range.
    Los,
    Range,
    Vision,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Fused,
        Algorithm::FusedRaw,
        Algorithm::FusedRidge,
        Algorithm::Los,
        Algorithm::Range,
        Algorithm::Vision,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Fused => "fused",
            Algorithm::FusedRaw => "fused_raw",
            Algorithm::FusedRidge => "fused_ridge",
            Algorithm::Los => "los",
            Algorithm::Range => "range",
            Algorithm::Vision => "vision",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalizationConfig {
    pub solver: SolverConfig,
    pub ridge: RidgeConfig,
    pub fusion: FusionOptions,
}

/// Result of one algorithm on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub algorithm: Algorithm,
    pub estimate: Point3,
    pub converged: bool,
    /// Absent for the closed-form line-of-sight baseline.
    pub report: Option<SolveReport>,
}

impl Outcome {
    fn from_report(algorithm: Algorithm, report: SolveReport) -> Self {
        Self {
            algorithm,
            estimate: report.estimate,
            converged: report.converged,
            report: Some(report),
        }
    }
}

/// Frame used by the line-of-sight baseline: the middle ranged frame.
pub fn los_frame(obs: &ObservationSet) -> usize {
    obs.range_frames()[obs.ranges().len() / 2]
}

pub fn los_estimate(obs: &ObservationSet) -> Result<Point3> {
    let j = obs.ranges().len() / 2;
    let frame = &obs.vision()[obs.range_frames()[j]];
    let los = LosObservation::from_projection(&frame.projection, &frame.pixel, obs.ranges()[j].range)?;
    Ok(los_single_shot(&los))
}

pub fn initial_triangulation(obs: &ObservationSet) -> Result<Triangulation> {
    let projections: Vec<_> = obs.vision().iter().map(|v| v.projection).collect();
    let pixels: Vec<Pixel> = obs.vision().iter().map(|v| v.pixel).collect();
    forward_intersection(&projections, &pixels)
}

/// Runs several algorithms on one dataset, sharing the seed computations.
/// Results come back in the order requested.
pub fn locate_all(
    obs: &ObservationSet,
    algorithms: &[Algorithm],
    cfg: &LocalizationConfig,
) -> Vec<(Algorithm, Result<Outcome>)> {
    let triangulation = initial_triangulation(obs).map(|t| t.point);
    let needs_vision = algorithms.iter().any(|a| {
        matches!(
            a,
            Algorithm::Vision | Algorithm::Fused | Algorithm::FusedRidge | Algorithm::FusedRaw
        )
    });
    let vision = if needs_vision {
        Some(
            triangulation
                .clone()
                .and_then(|x0| solve_vision(obs.vision(), &x0, &cfg.solver)),
        )
    } else {
        None
    };

    // Fused seed: a converged vision estimate, else the triangulation.
    let fused_seed = || -> Result<(Point3, bool)> {
        match &vision {
            Some(Ok(r)) if r.converged => Ok((r.estimate, false)),
            _ => triangulation.clone().map(|x| (x, true)),
        }
    };

    algorithms
        .iter()
        .map(|&algorithm| {
            let outcome = match algorithm {
                Algorithm::Vision => vision
                    .clone()
                    .expect("vision computed")
                    .map(|r| Outcome::from_report(algorithm, r)),
                Algorithm::Range => triangulation
                    .clone()
                    .and_then(|x0| solve_range(obs.ranges(), &x0, &cfg.solver))
                    .map(|r| Outcome::from_report(algorithm, r)),
                Algorithm::Los => los_estimate(obs).map(|estimate| Outcome {
                    algorithm,
                    estimate,
                    converged: true,
                    report: None,
                }),
                Algorithm::Fused | Algorithm::FusedRidge | Algorithm::FusedRaw => {
                    fused_seed().and_then(|(x0, fallback)| {
                        let mut report = match algorithm {
                            Algorithm::Fused => solve_fused_with(obs, &x0, &cfg.solver, &cfg.fusion)?,
                            Algorithm::FusedRidge => {
                                solve_fused_ridge_with(obs, &x0, &cfg.solver, &cfg.ridge, &cfg.fusion)?
                            }
                            _ => solve_fused_unnormalized(obs, &x0, &cfg.solver)?,
                        };
                        if fallback {
                            report.warn(SolveWarning::InitializerFallback);
                        }
                        Ok(Outcome::from_report(algorithm, report))
                    })
                }
            };
            (algorithm, outcome)
        })
        .collect()
}

pub fn locate(obs: &ObservationSet, algorithm: Algorithm, cfg: &LocalizationConfig) -> Result<Outcome> {
    locate_all(obs, &[algorithm], cfg)
        .pop()
        .expect("one algorithm requested")
        .1
}
