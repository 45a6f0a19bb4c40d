//! Ground-target localization from an airborne camera and laser range
//! finder.
//!
//! The crate estimates the position of a stationary target from a track of
//! platform poses, pixel observations and slant ranges. Solvers:
//!
//! * [`vision::solve_vision`]: multi-view reprojection least squares;
//! * [`range::solve_range`]: multilateration from the ranges;
//! * [`fusion::solve_fused`]: joint solve on min-max normalized residuals;
//! * [`ridge::solve_fused_ridge`]: the same with a Hoerl-Kennard-Baldwin
//!   ridge step;
//! * [`range::los_single_shot`]: one ray plus one range.
//!
//! [`pipeline::locate_all`] seeds and runs them together, [`sim`] drives
//! Monte Carlo studies and [`io`] handles configuration and files.
//!
//! ```
//! use vlfuse::pipeline::{locate, Algorithm, LocalizationConfig};
//! use vlfuse::sim::{generate_scenario, synthesize_observations, ScenarioSpec};
//!
//! let scenario = generate_scenario(&ScenarioSpec::default()).unwrap();
//! let obs = synthesize_observations(&scenario).unwrap();
//! let out = locate(&obs, Algorithm::FusedRidge, &LocalizationConfig::default()).unwrap();
//! assert!((out.estimate - scenario.target).norm() < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod error;
pub mod fusion;
pub mod io;
pub mod numeric;
pub mod pipeline;
pub mod range;
pub mod ridge;
pub mod sim;
pub mod solver;
pub mod track;
pub mod vision;

pub use camera::{CameraIntrinsics, Pixel, PlatformPose, Point3, ProjectionMatrix};
pub use error::{Error, Result};
pub use fusion::ObservationSet;
pub use pipeline::{locate, locate_all, Algorithm, LocalizationConfig, Outcome};
pub use solver::{SolveReport, SolveWarning, SolverConfig};
