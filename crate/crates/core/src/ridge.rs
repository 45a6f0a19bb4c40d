//! Ridge-regularized fused solve.
//!
//! Each iteration builds the normalized system `dΦ ≈ T·[dX; w]` exactly as
//! [`crate::fusion::solve_fused`] does, then replaces the plain least-squares
//! step with `(TᵀT + kI)⁻¹Tᵀ·dΦ`. The ridge parameter `k` comes from the
//! Hoerl-Kennard-Baldwin rule `k = t·δ0² / (X̂ᵀTᵀT·X̂)`, where `X̂` is the
//! unregularized augmented solution, `t` the rank of `T` and `δ0²` the
//! residual variance of that fit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::camera::Point3;
use crate::error::{Error, Result};
use crate::fusion::{
    check_fusion_input, check_initial_rank, fallback_step, stack_observations, FusionOptions, HomogeneousMode,
    Normalizer, ObservationSet, SLACK_WARNING,
};
use crate::numeric::{
    condition_number, ensure_finite_matrix, ensure_finite_vector, rank_with_tolerance, solve_least_squares,
    DEFAULT_RANK_TOLERANCE,
};
use crate::solver::{check_finite_residual, rms, SolveReport, SolveWarning, SolverConfig};

/// Signal terms at or below this are treated as zero.
const SIGNAL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RidgeMode {
    /// Recompute `k` from the current normalized system every iteration.
    #[default]
    PerIteration,
    /// Compute `k` once, at the first iteration, and keep it.
    InitialOnly,
}

/// Divisor used for the residual variance `δ0²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceDivisor {
    /// `m − t` with `m` the number of rows of `T`.
    #[default]
    Rows,
    /// `n − t` with `n` the number of track points (frames).
    TrackPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RidgeConfig {
    pub mode: RidgeMode,
    /// Relative singular-value cutoff for the rank `t`.
    pub rank_tolerance: f64,
    /// `δ0²` at or below this value forces `k = 0`. Set to infinity to turn
    /// the ridge off entirely.
    pub variance_floor: f64,
    pub divisor: VarianceDivisor,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            mode: RidgeMode::PerIteration,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
            variance_floor: 0.0,
            divisor: VarianceDivisor::Rows,
        }
    }
}

impl RidgeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rank_tolerance > 0.0) || !self.rank_tolerance.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rank_tolerance must be > 0, got {}",
                self.rank_tolerance
            )));
        }
        if !(self.variance_floor >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "variance_floor must be >= 0, got {}",
                self.variance_floor
            )));
        }
        Ok(())
    }
}

/// Output of [`hkb_ridge_parameter`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HkbParameter {
    pub k: f64,
    /// Rank `t` of `T`.
    pub rank: usize,
    pub delta0_sq: f64,
    /// `X̂ᵀTᵀT·X̂` vanished, so `k` was set to 0.
    pub zero_signal: bool,
}

/// Hoerl-Kennard-Baldwin ridge parameter for `dΦ ≈ T·x`, using the row
/// count of `T` in the variance divisor.
pub fn hkb_ridge_parameter(t: &DMatrix<f64>, dphi: &DVector<f64>) -> Result<HkbParameter> {
    hkb_with(t, dphi, DEFAULT_RANK_TOLERANCE, t.nrows())
}

/// As [`hkb_ridge_parameter`] with an explicit rank tolerance and the count
/// `observations` from which the rank is subtracted in the divisor.
pub fn hkb_with(
    t: &DMatrix<f64>,
    dphi: &DVector<f64>,
    rank_tolerance: f64,
    observations: usize,
) -> Result<HkbParameter> {
    ensure_finite_matrix(t, "T")?;
    ensure_finite_vector(dphi, "dPhi")?;
    if t.nrows() < t.ncols() {
        return Err(Error::InsufficientRows {
            rows: t.nrows(),
            rank: rank_with_tolerance(t, rank_tolerance)?,
        });
    }
    let fit = solve_least_squares(t, dphi)?;
    hkb_at(t, dphi, &fit.solution, rank_tolerance, observations)
}

/// The ridge parameter evaluated at a supplied estimate `x_hat` instead of
/// the unconstrained least-squares fit.
pub fn hkb_at(
    t: &DMatrix<f64>,
    dphi: &DVector<f64>,
    x_hat: &DVector<f64>,
    rank_tolerance: f64,
    observations: usize,
) -> Result<HkbParameter> {
    if x_hat.len() != t.ncols() || dphi.len() != t.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "T is {}x{}, dPhi has {} entries, estimate has {}",
            t.nrows(),
            t.ncols(),
            dphi.len(),
            x_hat.len()
        )));
    }
    let rank = rank_with_tolerance(t, rank_tolerance)?;
    if observations <= rank {
        return Err(Error::InsufficientRows {
            rows: observations,
            rank,
        });
    }
    let fitted = t * x_hat;
    // At the least-squares fit this is dΦᵀ(I − T(TᵀT)⁻¹Tᵀ)dΦ.
    let delta0_sq = (dphi - &fitted).norm_squared() / (observations - rank) as f64;
    let signal = fitted.norm_squared();
    if signal <= SIGNAL_FLOOR {
        return Ok(HkbParameter {
            k: 0.0,
            rank,
            delta0_sq,
            zero_signal: true,
        });
    }
    Ok(HkbParameter {
        k: (rank as f64 * delta0_sq / signal).max(0.0),
        rank,
        delta0_sq,
        zero_signal: false,
    })
}

/// `(TᵀT + kI)⁻¹Tᵀ·dΦ`.
pub fn ridge_solve_step(t: &DMatrix<f64>, dphi: &DVector<f64>, k: f64) -> Result<DVector<f64>> {
    ensure_finite_matrix(t, "T")?;
    ensure_finite_vector(dphi, "dPhi")?;
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ridge parameter must be finite and >= 0, got {k}"
        )));
    }
    if t.nrows() != dphi.len() {
        return Err(Error::DimensionMismatch(format!(
            "T has {} rows but dPhi has {} entries",
            t.nrows(),
            dphi.len()
        )));
    }
    if k == 0.0 && rank_with_tolerance(t, DEFAULT_RANK_TOLERANCE)? < t.ncols() {
        return Err(Error::SingularSystem);
    }
    let p = t.ncols();
    let normal = t.transpose() * t + DMatrix::identity(p, p) * k;
    let rhs = t.transpose() * dphi;
    let chol = normal.cholesky().ok_or(Error::SingularSystem)?;
    Ok(chol.solve(&rhs))
}

/// Fused solve with a ridge-regularized step.
///
/// `x0` is the iteration seed; the localization pipeline passes the vision
/// solve result here.
pub fn solve_fused_ridge(
    obs: &ObservationSet,
    x0: &Point3,
    config: &SolverConfig,
    ridge: &RidgeConfig,
) -> Result<SolveReport> {
    solve_fused_ridge_with(obs, x0, config, ridge, &FusionOptions::default())
}

/// As [`solve_fused_ridge`] with explicit normalization options.
pub fn solve_fused_ridge_with(
    obs: &ObservationSet,
    x0: &Point3,
    config: &SolverConfig,
    ridge: &RidgeConfig,
    options: &FusionOptions,
) -> Result<SolveReport> {
    config.validate()?;
    ridge.validate()?;
    check_fusion_input(obs, x0)?;
    let mut report = SolveReport::new(*x0);
    let mut fixed_k: Option<f64> = None;
    let mut normalizer = Normalizer::new(options.normalization);
    let mut last_rms = f64::NAN;
    let divisor_count = |rows: usize| match ridge.divisor {
        VarianceDivisor::Rows => rows,
        VarianceDivisor::TrackPoints => obs.len(),
    };

    for iteration in 0..config.max_iterations {
        let stacked = stack_observations(obs, &report.estimate)?;
        check_finite_residual(&stacked.residual(), iteration)?;
        if iteration == 0 {
            check_initial_rank(&stacked)?;
        }
        let (dx, w) = match normalizer.constants(&stacked) {
            Ok(c) => {
                let sys = c.apply(&stacked)?;
                let (t, response) = sys.regression(options.homogeneous);
                let k = match (ridge.mode, fixed_k) {
                    (RidgeMode::InitialOnly, Some(k)) => k,
                    _ => {
                        let rows = divisor_count(sys.t.nrows());
                        let hkb = match options.homogeneous {
                            HomogeneousMode::Free => hkb_with(&sys.t, &sys.response, ridge.rank_tolerance, rows)?,
                            HomogeneousMode::Fixed => {
                                let dx = solve_least_squares(&t, &response)?.solution;
                                let x_hat = DVector::from_vec(vec![dx[0], dx[1], dx[2], 1.0]);
                                hkb_at(&sys.t, &sys.response, &x_hat, ridge.rank_tolerance, rows)?
                            }
                        };
                        if hkb.zero_signal {
                            report.warn(SolveWarning::ZeroSignal);
                        }
                        let k = if hkb.delta0_sq <= ridge.variance_floor {
                            0.0
                        } else {
                            hkb.k
                        };
                        fixed_k = Some(k);
                        k
                    }
                };
                let sol = ridge_solve_step(&t, &response, k)?;
                let normal = t.transpose() * &t;
                report.condition_history.push(condition_number(&normal)?);
                let shifted = &normal + DMatrix::identity(t.ncols(), t.ncols()) * k;
                report.regularized_condition_history.push(condition_number(&shifted)?);
                report.ridge_history.push(k);
                last_rms = rms(&(&response - &t * &sol));
                (
                    Point3::new(sol[0], sol[1], sol[2]),
                    Some(sol.get(3).copied().unwrap_or(1.0)),
                )
            }
            Err(Error::DegenerateSpread { .. }) => {
                let step = fallback_step(&stacked, &mut report)?;
                let cond = *report.condition_history.last().expect("fallback records condition");
                report.regularized_condition_history.push(cond);
                report.ridge_history.push(0.0);
                last_rms = step.residual_rms;
                (step.dx, None)
            }
            Err(e) => return Err(e),
        };
        if let Some(w) = w {
            report.homogeneous_slack = (w - 1.0).abs();
        }
        if report.apply_step(&dx, config)? {
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
