use std::time::Duration;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::l2_norm;
use crate::solvers::Status;

/// Default success threshold on the relative error.
pub const SUCCESS_TOL: f64 = 1e-3;
/// Objective values closer than this count as a tie.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Success,
    /// The recovered point is at least as good for the model as the truth.
    ModelFailure,
    /// The solver stopped at a point worse than the truth.
    AlgorithmFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub classification: Classification,
    pub rel_error: f64,
    pub f_truth: f64,
    pub f_recovered: f64,
    /// `None` when the outcome did not come from a solver run.
    pub solver_status: Option<Status>,
    pub wall_time: Duration,
}

/// Compares a recovered vector with the ground truth under objective `f`.
///
/// Success when the relative error is below `success_tol`. Otherwise a
/// model failure if `f(x_true) > f(x_rec)`, an algorithm failure if
/// `f(x_true) < f(x_rec)`, and a tie (within [`TIE_TOL`]) counts as a
/// model failure.
pub fn classify<F>(
    f: F,
    x_true: &DVector<f64>,
    x_rec: &DVector<f64>,
    success_tol: f64,
) -> Result<TrialOutcome>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    if x_true.len() != x_rec.len() {
        return Err(Error::DimensionMismatch {
            expected: x_true.len(),
            got: x_rec.len(),
        });
    }
    let truth_norm = l2_norm(x_true);
    if truth_norm == 0.0 || l2_norm(x_rec) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let rel_error = (x_rec - x_true).norm() / truth_norm;
    let f_truth = f(x_true)?;
    let f_recovered = f(x_rec)?;
    let classification = if rel_error < success_tol {
        Classification::Success
    } else if f_truth > f_recovered - TIE_TOL {
        Classification::ModelFailure
    } else {
        Classification::AlgorithmFailure
    };
    Ok(TrialOutcome {
        classification,
        rel_error,
        f_truth,
        f_recovered,
        solver_status: None,
        wall_time: Duration::ZERO,
    })
}
