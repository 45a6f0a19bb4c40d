//! Iteration settings, the per-solve diagnostic report, and the plain
//! Gauss-Newton loop shared by the vision, range and unnormalized solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::camera::Point3;
use crate::error::{Error, Result};
use crate::numeric::{condition_number, rank_with_tolerance, solve_least_squares, DEFAULT_RANK_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Exit when the correction norm drops to this many meters.
    pub threshold: f64,
    pub max_iterations: usize,
    /// A correction larger than this (meters) aborts the solve as diverged.
    pub divergence_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            threshold: 1e-4,
            max_iterations: 500,
            divergence_guard: 1e7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::InvalidInput(format!(
                "threshold must be > 0, got {}",
                self.threshold
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidInput("max_iterations must be >= 1".into()));
        }
        if !(self.divergence_guard > 0.0) {
            return Err(Error::InvalidInput("divergence_guard must be > 0".into()));
        }
        Ok(())
    }
}

/// Non-fatal conditions noticed during a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolveWarning {
    /// `max_iterations` reached before the correction fell below threshold.
    MaxIterations,
    /// A step was solved on a rank-deficient design matrix (minimum-norm step).
    RankDeficientStep,
    /// A residual block had no spread; that iteration used the unnormalized step.
    SpreadFallback,
    /// The homogeneous component of the fused unknown drifted more than 0.5 from 1.
    LargeHomogeneousSlack,
    /// The ridge signal term vanished and `k` was set to zero.
    ZeroSignal,
    /// The supplied initial value was not the preferred seed (e.g. the vision
    /// solve failed and forward intersection was used instead).
    InitializerFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub estimate: Point3,
    pub converged: bool,
    pub iterations: usize,
    /// `‖dX‖` of every applied correction, meters.
    pub correction_norms: Vec<f64>,
    /// RMS residual at the returned estimate: native units for single-sensor
    /// and unnormalized solves, normalized units for the min-max fused solves.
    pub final_residual_rms: f64,
    /// Condition number of the normal matrix used for each step.
    pub condition_history: Vec<f64>,
    /// Condition number of `TᵀT + kI` per iteration (ridge solves only).
    pub regularized_condition_history: Vec<f64>,
    /// Ridge parameter per iteration (ridge solves only).
    pub ridge_history: Vec<f64>,
    /// `|w − 1|` of the last normalized step (fused solves only).
    pub homogeneous_slack: f64,
    pub warnings: Vec<SolveWarning>,
}

impl SolveReport {
    pub(crate) fn new(estimate: Point3) -> Self {
        Self {
            estimate,
            converged: false,
            iterations: 0,
            correction_norms: Vec::new(),
            final_residual_rms: f64::NAN,
            condition_history: Vec::new(),
            regularized_condition_history: Vec::new(),
            ridge_history: Vec::new(),
            homogeneous_slack: 0.0,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn warn(&mut self, w: SolveWarning) {
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    pub fn has_warning(&self, w: SolveWarning) -> bool {
        self.warnings.contains(&w)
    }

    /// Applies one correction, enforcing the divergence guard.
    pub(crate) fn apply_step(&mut self, dx: &Point3, config: &SolverConfig) -> Result<bool> {
        let norm = dx.norm();
        let iteration = self.iterations + 1;
        if !norm.is_finite() {
            return Err(Error::Diverged {
                iteration,
                reason: "non-finite correction".into(),
            });
        }
        if norm > config.divergence_guard {
            return Err(Error::Diverged {
                iteration,
                reason: format!(
                    "correction {norm:.3e} m exceeds guard {:.3e} m",
                    config.divergence_guard
                ),
            });
        }
        self.estimate += dx;
        self.iterations = iteration;
        self.correction_norms.push(norm);
        let done = norm <= config.threshold;
        if done {
            self.converged = true;
        }
        Ok(done)
    }

    pub(crate) fn finish_unconverged(&mut self) {
        if !self.converged {
            self.warn(SolveWarning::MaxIterations);
        }
    }
}

pub(crate) fn rms(v: &DVector<f64>) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        (v.norm_squared() / v.len() as f64).sqrt()
    }
}

pub(crate) fn check_finite_residual(r: &DVector<f64>, iteration: usize) -> Result<()> {
    if r.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged {
            iteration,
            reason: "residuals became non-finite".into(),
        })
    }
}

/// Undamped Gauss-Newton: `dX = argmin ‖J·dX − r‖`, `X ← X + dX` until
/// `‖dX‖ ≤ threshold`. `model` returns the residual `observed − predicted`
/// and its Jacobian with respect to the unknown.
pub(crate) fn gauss_newton<F>(x0: Point3, config: &SolverConfig, mut model: F) -> Result<SolveReport>
where
    F: FnMut(&Point3) -> Result<(DVector<f64>, DMatrix<f64>)>,
{
    config.validate()?;
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("initial value"));
    }
    let mut report = SolveReport::new(x0);
    let (mut r, mut j) = model(&x0)?;
    check_finite_residual(&r, 0)?;
    if j.nrows() < 3 || rank_with_tolerance(&j, DEFAULT_RANK_TOLERANCE)? < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "design matrix ({}x3) has rank below 3 at the initial value",
            j.nrows()
        )));
    }

    for _ in 0..config.max_iterations {
        let step = solve_least_squares(&j, &r)?;
        if step.rank_deficient {
            report.warn(SolveWarning::RankDeficientStep);
        }
        let cond = condition_number(&j)?;
        report.condition_history.push(cond * cond);
        let dx = Point3::new(step.solution[0], step.solution[1], step.solution[2]);
        let done = report.apply_step(&dx, config)?;
        let (r_next, j_next) = model(&report.estimate)?;
        check_finite_residual(&r_next, report.iterations)?;
        r = r_next;
        j = j_next;
        if done {
            break;
        }
    }
    report.final_residual_rms = rms(&r);
    report.finish_unconverged();
    Ok(report)
}
