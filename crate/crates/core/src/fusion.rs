//! Joint vision + range localization.
//!
//! Pixel residuals and range residuals are stacked into one system. Because
//! the two blocks carry different units, each block is min-max normalized
//! onto `[0, 1]`; the affine offset introduced by the normalization becomes
//! a fourth column of the design matrix `T` acting on `[dX; w]`.
//!
//! By default `w` is held at 1. The offset column then moves to the
//! response, the minima cancel, and the step is a Gauss-Newton step with
//! each block weighted by the inverse of its residual spread. With
//! [`HomogeneousMode::Free`] the 4-vector is solved unconstrained instead;
//! the fitted `w` then absorbs a common offset of each block, which at small
//! intersection angles is nearly collinear with the depth direction of the
//! ranges.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::camera::Point3;
use crate::error::{Error, Result};
use crate::numeric::{condition_number, rank_with_tolerance, solve_least_squares, DEFAULT_RANK_TOLERANCE};
use crate::range::{range_jacobian, range_residuals, RangeObservation};
use crate::solver::{check_finite_residual, gauss_newton, rms, SolveReport, SolveWarning, SolverConfig};
use crate::vision::{vision_jacobian, vision_residuals, VisionObservation};

/// Smallest residual spread accepted by the min-max map, native units.
pub const SPREAD_EPSILON: f64 = 1e-12;

/// Slack `|w − 1|` above which a fused report carries a warning.
pub const SLACK_WARNING: f64 = 0.5;

/// Distance (meters) within which a range station must match its frame's
/// camera center.
const STATION_MATCH_TOLERANCE: f64 = 1e-6;

/// Pixel and range measurements of one track.
///
/// Every range belongs to a frame: `range_frames()[j]` is the index of the
/// vision frame whose platform position is the station of range `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    vision: Vec<VisionObservation>,
    ranges: Vec<RangeObservation>,
    range_frames: Vec<usize>,
}

impl ObservationSet {
    /// One pixel pair and one range per frame, aligned by index.
    pub fn new(vision: Vec<VisionObservation>, ranges: Vec<RangeObservation>) -> Result<Self> {
        if vision.len() != ranges.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vision frames but {} ranges",
                vision.len(),
                ranges.len()
            )));
        }
        let frames = (0..ranges.len()).collect();
        Self::with_range_frames(vision, ranges, frames)
    }

    /// Frames where only some carry a range (vision-only rows allowed).
    pub fn with_range_frames(
        vision: Vec<VisionObservation>,
        ranges: Vec<RangeObservation>,
        range_frames: Vec<usize>,
    ) -> Result<Self> {
        if vision.len() < 2 {
            return Err(Error::InsufficientViews(vision.len()));
        }
        if ranges.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "fusion needs at least 2 ranged frames, got {}",
                ranges.len()
            )));
        }
        if range_frames.len() != ranges.len() {
            return Err(Error::DimensionMismatch("range_frames must index every range".into()));
        }
        if range_frames.windows(2).any(|w| w[0] >= w[1]) || range_frames.iter().any(|&f| f >= vision.len()) {
            return Err(Error::InvalidInput(
                "range frame indices must be strictly increasing and within the vision frames".into(),
            ));
        }
        for (j, (&frame, range)) in range_frames.iter().zip(&ranges).enumerate() {
            let center = vision[frame]
                .projection
                .camera_center()
                .ok_or_else(|| Error::DegenerateGeometry(format!("frame {frame} projection has no camera center")))?;
            if (center - range.station).norm() > STATION_MATCH_TOLERANCE {
                return Err(Error::InvalidInput(format!(
                    "range {j} station is {:.3e} m from the camera center of frame {frame}",
                    (center - range.station).norm()
                )));
            }
        }
        Ok(Self {
            vision,
            ranges,
            range_frames,
        })
    }

    pub fn vision(&self) -> &[VisionObservation] {
        &self.vision
    }

    pub fn ranges(&self) -> &[RangeObservation] {
        &self.ranges
    }

    pub fn range_frames(&self) -> &[usize] {
        &self.range_frames
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        self.vision.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vision.is_empty()
    }
}

/// Residuals and design blocks of both sensors at one linearization point.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedSystem {
    /// `dψ`, pixels, length `2n`.
    pub dpsi: DVector<f64>,
    /// `dφ`, meters, one entry per range.
    pub dphi: DVector<f64>,
    /// `H`, `2n×3`.
    pub vision_jacobian: DMatrix<f64>,
    /// `h`, one row per range.
    pub range_jacobian: DMatrix<f64>,
}

impl StackedSystem {
    /// `Γ = [H; h]`.
    pub fn design(&self) -> DMatrix<f64> {
        let (nv, nr) = (self.vision_jacobian.nrows(), self.range_jacobian.nrows());
        let mut g = DMatrix::zeros(nv + nr, 3);
        g.rows_mut(0, nv).copy_from(&self.vision_jacobian);
        g.rows_mut(nv, nr).copy_from(&self.range_jacobian);
        g
    }

    /// `[dψ; dφ]`.
    pub fn residual(&self) -> DVector<f64> {
        let mut r = DVector::zeros(self.dpsi.len() + self.dphi.len());
        r.rows_mut(0, self.dpsi.len()).copy_from(&self.dpsi);
        r.rows_mut(self.dpsi.len(), self.dphi.len()).copy_from(&self.dphi);
        r
    }
}

pub fn stack_observations(obs: &ObservationSet, x0: &Point3) -> Result<StackedSystem> {
    Ok(StackedSystem {
        dpsi: vision_residuals(&obs.vision, x0)?,
        dphi: range_residuals(&obs.ranges, x0)?,
        vision_jacobian: vision_jacobian(&obs.vision, x0)?,
        range_jacobian: range_jacobian(&obs.ranges, x0)?,
    })
}

/// Min/max of each residual block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstants {
    pub vis_min: f64,
    pub vis_max: f64,
    pub rng_min: f64,
    pub rng_max: f64,
}

fn min_max(v: &DVector<f64>) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

impl NormalizationConstants {
    pub fn from_residuals(dpsi: &DVector<f64>, dphi: &DVector<f64>) -> Result<Self> {
        if dpsi.len() < 2 || dphi.len() < 2 {
            return Err(Error::DimensionMismatch(
                "normalization needs at least 2 entries per block".into(),
            ));
        }
        let (vis_min, vis_max) = min_max(dpsi);
        let (rng_min, rng_max) = min_max(dphi);
        if !(vis_max - vis_min > SPREAD_EPSILON) {
            return Err(Error::DegenerateSpread { block: "vision" });
        }
        if !(rng_max - rng_min > SPREAD_EPSILON) {
            return Err(Error::DegenerateSpread { block: "range" });
        }
        Ok(Self {
            vis_min,
            vis_max,
            rng_min,
            rng_max,
        })
    }

    /// Builds `T` and `dΦ` from a stacked system with these constants.
    pub fn apply(&self, s: &StackedSystem) -> Result<NormalizedSystem> {
        let (nv, nr) = (s.dpsi.len(), s.dphi.len());
        if s.vision_jacobian.nrows() != nv || s.range_jacobian.nrows() != nr {
            return Err(Error::DimensionMismatch(
                "residual and Jacobian row counts differ".into(),
            ));
        }
        let vs = self.vis_max - self.vis_min;
        let rs = self.rng_max - self.rng_min;
        let mut t = DMatrix::zeros(nv + nr, 4);
        let mut response = DVector::zeros(nv + nr);
        for i in 0..nv {
            for j in 0..3 {
                t[(i, j)] = s.vision_jacobian[(i, j)] / vs;
            }
            t[(i, 3)] = -self.vis_min / vs;
            response[i] = (s.dpsi[i] - self.vis_min) / vs;
        }
        for i in 0..nr {
            for j in 0..3 {
                t[(nv + i, j)] = s.range_jacobian[(i, j)] / rs;
            }
            t[(nv + i, 3)] = -self.rng_min / rs;
            response[nv + i] = (s.dphi[i] - self.rng_min) / rs;
        }
        Ok(NormalizedSystem {
            t,
            response,
            constants: *self,
        })
    }
}

/// The normalized augmented system `dΦ ≈ T·[dX; w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSystem {
    /// `T`, `(2n + n_r)×4`.
    pub t: DMatrix<f64>,
    /// `dΦ`; every entry lies in `[0, 1]` when built from its own residuals.
    pub response: DVector<f64>,
    pub constants: NormalizationConstants,
}

pub fn normalize_stacked(
    dpsi: &DVector<f64>,
    dphi: &DVector<f64>,
    vision_jacobian: &DMatrix<f64>,
    range_jacobian: &DMatrix<f64>,
) -> Result<NormalizedSystem> {
    let constants = NormalizationConstants::from_residuals(dpsi, dphi)?;
    constants.apply(&StackedSystem {
        dpsi: dpsi.clone(),
        dphi: dphi.clone(),
        vision_jacobian: vision_jacobian.clone(),
        range_jacobian: range_jacobian.clone(),
    })
}

/// When the min-max constants are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// Recompute from the current residuals every iteration.
    #[default]
    PerIteration,
    /// Compute once at the initial value and reuse.
    Initial,
}

/// Treatment of the fourth unknown `w` of `[dX; w]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomogeneousMode {
    /// Hold `w = 1` and move the offset column to the response.
    #[default]
    Fixed,
    /// Solve `w` together with `dX`; `|w − 1|` is reported as slack.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionOptions {
    pub normalization: NormalizationMode,
    pub homogeneous: HomogeneousMode,
}

impl NormalizedSystem {
    /// Design matrix and response actually regressed under `mode`: `(T, dΦ)`
    /// when `w` is free, `(T[:, 0..3], dΦ − T[:, 3])` when it is fixed.
    pub fn regression(&self, mode: HomogeneousMode) -> (DMatrix<f64>, DVector<f64>) {
        match mode {
            HomogeneousMode::Free => (self.t.clone(), self.response.clone()),
            HomogeneousMode::Fixed => (self.t.columns(0, 3).into_owned(), &self.response - self.t.column(3)),
        }
    }
}

/// Supplies the min-max constants for each iteration under a
/// [`NormalizationMode`].
pub(crate) struct Normalizer {
    mode: NormalizationMode,
    frozen: Option<Result<NormalizationConstants>>,
}

impl Normalizer {
    pub fn new(mode: NormalizationMode) -> Self {
        Self { mode, frozen: None }
    }

    pub fn constants(&mut self, stacked: &StackedSystem) -> Result<NormalizationConstants> {
        let fresh = || NormalizationConstants::from_residuals(&stacked.dpsi, &stacked.dphi);
        match self.mode {
            NormalizationMode::PerIteration => fresh(),
            NormalizationMode::Initial => self.frozen.get_or_insert_with(fresh).clone(),
        }
    }
}

pub(crate) fn check_fusion_input(obs: &ObservationSet, x0: &Point3) -> Result<()> {
    if obs.len() < 2 {
        return Err(Error::InsufficientViews(obs.len()));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("initial value"));
    }
    Ok(())
}

pub(crate) fn check_initial_rank(stacked: &StackedSystem) -> Result<()> {
    if rank_with_tolerance(&stacked.design(), DEFAULT_RANK_TOLERANCE)? < 3 {
        return Err(Error::DegenerateGeometry(
            "stacked design matrix has rank below 3 at the initial value".into(),
        ));
    }
    Ok(())
}

/// Outcome of one normalized (or fallback) linear step.
pub(crate) struct FusedStep {
    pub dx: Point3,
    pub w: Option<f64>,
    pub residual_rms: f64,
}

/// Unnormalized step on `Γ`, used when a block has no spread.
pub(crate) fn fallback_step(stacked: &StackedSystem, report: &mut SolveReport) -> Result<FusedStep> {
    let g = stacked.design();
    let r = stacked.residual();
    let ls = solve_least_squares(&g, &r)?;
    if ls.rank_deficient {
        report.warn(SolveWarning::RankDeficientStep);
    }
    let cond = condition_number(&g)?;
    report.condition_history.push(cond * cond);
    report.warn(SolveWarning::SpreadFallback);
    let fitted = &g * &ls.solution;
    Ok(FusedStep {
        dx: Point3::new(ls.solution[0], ls.solution[1], ls.solution[2]),
        w: None,
        residual_rms: rms(&(r - fitted)),
    })
}

/// Normalized fusion with the default options.
pub fn solve_fused(obs: &ObservationSet, x0: &Point3, config: &SolverConfig) -> Result<SolveReport> {
    solve_fused_with(obs, x0, config, &FusionOptions::default())
}

pub fn solve_fused_with(
    obs: &ObservationSet,
    x0: &Point3,
    config: &SolverConfig,
    options: &FusionOptions,
) -> Result<SolveReport> {
    config.validate()?;
    check_fusion_input(obs, x0)?;
    let mut report = SolveReport::new(*x0);
    let mut normalizer = Normalizer::new(options.normalization);
    let mut last_rms = f64::NAN;

    for iteration in 0..config.max_iterations {
        let stacked = stack_observations(obs, &report.estimate)?;
        check_finite_residual(&stacked.residual(), iteration)?;
        if iteration == 0 {
            check_initial_rank(&stacked)?;
        }
        let step = match normalizer.constants(&stacked) {
            Ok(c) => {
                let (t, response) = c.apply(&stacked)?.regression(options.homogeneous);
                let ls = solve_least_squares(&t, &response)?;
                if ls.rank_deficient {
                    report.warn(SolveWarning::RankDeficientStep);
                }
                let cond = condition_number(&t)?;
                report.condition_history.push(cond * cond);
                let fitted = &t * &ls.solution;
                FusedStep {
                    dx: Point3::new(ls.solution[0], ls.solution[1], ls.solution[2]),
                    w: Some(ls.solution.get(3).copied().unwrap_or(1.0)),
                    residual_rms: rms(&(&response - fitted)),
                }
            }
            Err(Error::DegenerateSpread { .. }) => fallback_step(&stacked, &mut report)?,
            Err(e) => return Err(e),
        };
        if let Some(w) = step.w {
            report.homogeneous_slack = (w - 1.0).abs();
        }
        last_rms = step.residual_rms;
        if report.apply_step(&step.dx, config)? {
            break;
        }
    }
    report.final_residual_rms = last_rms;
    if report.homogeneous_slack > SLACK_WARNING {
        report.warn(SolveWarning::LargeHomogeneousSlack);
    }
    report.finish_unconverged();
    Ok(report)
}

/// Gauss-Newton on `Γ = [H; h]` and `[dψ; dφ]` with no normalization.
pub fn solve_fused_unnormalized(obs: &ObservationSet, x0: &Point3, config: &SolverConfig) -> Result<SolveReport> {
    check_fusion_input(obs, x0)?;
    gauss_newton(*x0, config, |x| {
        let s = stack_observations(obs, x)?;
        Ok((s.residual(), s.design()))
    })
}
