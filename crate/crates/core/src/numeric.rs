//! Small dense linear-algebra kernel shared by every solver.
//!
//! Plain least-squares solves go through an SVD so that the condition number
//! of the design matrix is not squared by forming `AᵀA`. The ridge path in
//! [`crate::ridge`] is the only place a normal matrix is built explicitly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used for rank decisions.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// Result of [`solve_least_squares`].
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: DVector<f64>,
    /// Numerical rank of the design matrix at [`DEFAULT_RANK_TOLERANCE`].
    pub rank: usize,
    /// Set when the design matrix lost column rank; `solution` is then the
    /// minimum-norm minimizer.
    pub rank_deficient: bool,
}

pub(crate) fn ensure_finite_matrix(a: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!("{what} is empty")));
    }
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_finite_vector(b: &DVector<f64>, what: &'static str) -> Result<()> {
    if b.is_empty() {
        return Err(Error::DimensionMismatch(format!("{what} is empty")));
    }
    if b.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    a.clone().svd(false, false).singular_values
}

fn extremes(values: &DVector<f64>) -> (f64, f64) {
    values
        .iter()
        .fold((0.0_f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)))
}

/// Minimizes `‖b − A·x‖²` for a tall (or square) `A`.
pub fn solve_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LeastSquares> {
    ensure_finite_matrix(a, "design matrix")?;
    ensure_finite_vector(b, "right-hand side")?;
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "design matrix has {} rows but right-hand side has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    if a.nrows() < a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "least squares needs rows >= cols, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }

    let svd = a.clone().svd(true, true);
    let (sigma_max, _) = extremes(&svd.singular_values);
    let cutoff = DEFAULT_RANK_TOLERANCE * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();

    let solution = if sigma_max == 0.0 {
        DVector::zeros(a.ncols())
    } else {
        svd.solve(b, cutoff)
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .column(0)
            .into_owned()
    };

    Ok(LeastSquares {
        solution,
        rank,
        rank_deficient: rank < a.ncols(),
    })
}

/// Ratio of the largest to the smallest singular value.
///
/// Returns `f64::INFINITY` when the smallest singular value is zero to
/// working precision.
pub fn condition_number(a: &DMatrix<f64>) -> Result<f64> {
    ensure_finite_matrix(a, "matrix")?;
    let (hi, lo) = extremes(&singular_values(a));
    let floor = hi * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    if hi == 0.0 || lo <= floor {
        Ok(f64::INFINITY)
    } else {
        Ok(hi / lo)
    }
}

/// Number of singular values above `tol × σ_max`.
pub fn rank_with_tolerance(a: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("rank tolerance must be > 0, got {tol}")));
    }
    ensure_finite_matrix(a, "matrix")?;
    let values = singular_values(a);
    let (hi, _) = extremes(&values);
    if hi == 0.0 {
        return Ok(0);
    }
    Ok(values.iter().filter(|&&s| s > tol * hi).count())
}
