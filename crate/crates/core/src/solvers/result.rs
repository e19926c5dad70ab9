use std::fmt::Write as _;
use std::io::Write;
use std::time::Duration;

use nalgebra::DVector;

use super::config::Scheme;
use crate::error::Result;
use crate::linalg::{ratio_objective, AffineProjector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIterations,
    Unbounded,
    InnerFailure,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max_iterations",
            Status::Unbounded => "unbounded",
            Status::InnerFailure => "inner_failure",
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Status::Unbounded | Status::InnerFailure)
    }
}

/// One outer iteration.
///
/// For A1/A2 `alpha` is `α(k) = ‖x(k)‖₁/‖x(k)‖₂` and `dca_objective` is
/// `‖x(k)‖₁ − α(k−1)‖x(k)‖₂`. For BS `alpha` is the incumbent ratio (the
/// smallest ratio over all points seen, i.e. the current estimate of the
/// optimal value), `bs_alpha` is the bisection parameter tried at this step,
/// `dca_objective` is the resulting `T(bs_alpha)` (`-inf` when the linear
/// subproblem was unbounded) and `bracket` is `[lb, ub]` before the update.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub alpha: f64,
    pub dca_objective: f64,
    pub step_norm: f64,
    pub phi_residual: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub bs_alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub scheme: Scheme,
    pub x_star: DVector<f64>,
    pub status: Status,
    pub trace: Vec<TraceRecord>,
    /// Outer iterations performed (1 for basis pursuit).
    pub iterations: usize,
    /// Total inner ADMM iterations, initialization included.
    pub inner_iterations: usize,
    pub wall_time: Duration,
}

impl SolverResult {
    pub fn final_alpha(&self) -> f64 {
        ratio_objective(&self.x_star).unwrap_or(f64::NAN)
    }

    /// `alpha` column of the trace.
    pub fn alpha_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.alpha).collect()
    }

    /// `key=value` lines: scheme, status, iterations, final α, feasibility
    /// residual and wall time.
    pub fn to_record(&self, p: &AffineProjector) -> String {
        let mut s = String::new();
        let resid = p.relative_residual(&self.x_star).unwrap_or(f64::NAN);
        let _ = writeln!(s, "scheme={}", self.scheme);
        let _ = writeln!(s, "status={}", self.status.name());
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "inner_iterations={}", self.inner_iterations);
        let _ = writeln!(s, "final_alpha={:.12}", self.final_alpha());
        let _ = writeln!(s, "feasibility_residual={resid:e}");
        let _ = writeln!(s, "wall_time_s={:.6}", self.wall_time.as_secs_f64());
        s
    }

    /// Columns `k,alpha,dca_objective,step_norm,phi_residual,lb,ub,bs_alpha`;
    /// the last four are empty where they do not apply.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "k,alpha,dca_objective,step_norm,phi_residual,lb,ub,bs_alpha"
        )?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.trace {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{},{},{},{}",
                r.k,
                r.alpha,
                r.dca_objective,
                r.step_norm,
                opt(r.phi_residual),
                opt(r.bracket.map(|b| b.0)),
                opt(r.bracket.map(|b| b.1)),
                opt(r.bs_alpha),
            )?;
        }
        Ok(())
    }
}
