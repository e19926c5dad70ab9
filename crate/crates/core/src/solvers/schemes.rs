use std::time::Instant;

use nalgebra::DVector;

use super::admm::{self, InnerState, Subproblem};
use super::config::{InitPolicy, Scheme, SolverConfig, LP_RHO_SCALE};
use super::result::{SolverResult, Status, TraceRecord};
use crate::error::{Error, Result};
use crate::linalg::{check_len, grad_w, l1_norm, ratio_objective, AffineProjector};

/// Slack on `α(k+1) ≤ α(k)` before a step of A1/A2 is rejected as
/// non-descent.
pub const ALPHA_MONOTONE_SLACK: f64 = 1e-12;

/// Relative slack on DCA descent before a step is rejected.
const DCA_DESCENT_SLACK: f64 = 1e-8;

pub(crate) fn lp_rho(p: &AffineProjector, cfg: &SolverConfig) -> f64 {
    cfg.lp_rho.unwrap_or(LP_RHO_SCALE / p.rhs_norm())
}

fn relative_step(new: &DVector<f64>, old: &DVector<f64>) -> f64 {
    (new - old).norm() / new.norm()
}

/// `α·x/‖x‖₂`, the linearization of `α‖·‖₂` at `x`.
fn linearization(x: &DVector<f64>, alpha: f64) -> DVector<f64> {
    x * (alpha / x.norm())
}

/// Approximate minimizer of `‖x‖₁ − ⟨x, c⟩` over `{Ax = b}`, warm-started
/// from `warm` and updated in place.
pub fn solve_lp_subproblem(
    p: &AffineProjector,
    c: &DVector<f64>,
    rho: f64,
    warm: &mut InnerState,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    check_len(c, p.cols())?;
    check_len(&warm.x, p.cols())?;
    let sub = Subproblem {
        c,
        anchor: c,
        beta: 0.0,
    };
    admm::solve(p, &sub, rho, warm, cfg)?;
    Ok(warm.x.clone())
}

/// Approximate minimizer of `‖x‖₁ − ⟨x, c⟩ + (β/2)‖x − anchor‖₂²` over
/// `{Ax = b}`.
pub fn solve_a2_subproblem(
    p: &AffineProjector,
    c: &DVector<f64>,
    anchor: &DVector<f64>,
    beta: f64,
    rho: f64,
    warm: &mut InnerState,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    check_len(c, p.cols())?;
    check_len(anchor, p.cols())?;
    check_len(&warm.x, p.cols())?;
    if !(beta > 0.0) {
        return Err(Error::InvalidConfig(
            "A2 subproblem requires beta > 0".into(),
        ));
    }
    let sub = Subproblem { c, anchor, beta };
    admm::solve(p, &sub, rho, warm, cfg)?;
    Ok(warm.x.clone())
}

fn failure_status(e: &Error) -> Status {
    match e {
        Error::Unbounded => Status::Unbounded,
        _ => Status::InnerFailure,
    }
}

/// Basis pursuit by the `c = 0` linear subproblem, started at the
/// least-norm point.
pub fn solve_l1_bp(p: &AffineProjector, cfg: &SolverConfig) -> SolverResult {
    let start = Instant::now();
    let (x, status, inner) = basis_pursuit(p, cfg);
    let trace = vec![TraceRecord {
        k: 1,
        alpha: ratio_objective(&x).unwrap_or(f64::NAN),
        dca_objective: l1_norm(&x),
        step_norm: relative_step(&x, p.least_norm_point()),
        phi_residual: None,
        bracket: None,
        bs_alpha: None,
    }];
    SolverResult {
        scheme: Scheme::L1Bp,
        x_star: x,
        status,
        trace,
        iterations: 1,
        inner_iterations: inner,
        wall_time: start.elapsed(),
    }
}

fn basis_pursuit(p: &AffineProjector, cfg: &SolverConfig) -> (DVector<f64>, Status, usize) {
    let c = DVector::zeros(p.cols());
    let mut state = InnerState::from_point(p.least_norm_point());
    let sub = Subproblem {
        c: &c,
        anchor: &c,
        beta: 0.0,
    };
    match admm::solve(p, &sub, lp_rho(p, cfg), &mut state, cfg) {
        Ok(rep) => (state.x, Status::Converged, rep.iterations),
        Err(Error::InnerFailure { iterations, .. }) => (state.x, Status::InnerFailure, iterations),
        Err(_) => (state.x, Status::InnerFailure, cfg.inner_max),
    }
}

/// Starting point per `init_policy`, with the inner iterations it cost.
pub(crate) fn initial_point(
    p: &AffineProjector,
    cfg: &SolverConfig,
) -> Result<(DVector<f64>, usize)> {
    match &cfg.init_policy {
        InitPolicy::L1Solution => {
            let (x, _, inner) = basis_pursuit(p, cfg);
            Ok((x, inner))
        }
        InitPolicy::LeastNorm => Ok((p.least_norm_point().clone(), 0)),
        InitPolicy::Provided(v) => {
            let x = p.project(v)?;
            if x.norm() == 0.0 {
                return Err(Error::ZeroVector);
            }
            Ok((x, 0))
        }
    }
}

/// Output of one DCA run for `min ‖x‖₁ − α‖x‖₂ s.t. Ax = b`.
#[derive(Debug, Clone)]
pub struct DcaOutcome {
    pub x: DVector<f64>,
    /// `‖x‖₁ − α‖x‖₂` at the returned point.
    pub t_value: f64,
    /// Objective after each accepted step, starting with the value at `x0`.
    pub objectives: Vec<f64>,
    pub iterations: usize,
    pub inner_iterations: usize,
}

/// DCA for the `L1 − αL2` model:
/// `x(k+1) = argmin ‖x‖₁ − ⟨x, α·x(k)/‖x(k)‖₂⟩ s.t. Ax = b`.
///
/// `Err(Unbounded)` means some linearized subproblem had no minimizer,
/// which certifies `T(α) = −∞`.
pub fn dca_l1_minus_alpha_l2(
    p: &AffineProjector,
    alpha: f64,
    x0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<DcaOutcome> {
    check_len(x0, p.cols())?;
    if x0.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut state = InnerState::from_point(x0);
    let mut best = Incumbent::new(x0);
    run_dca(p, alpha, x0, &mut state, &mut best, cfg)
}

/// Smallest-ratio point seen so far.
#[derive(Debug, Clone)]
struct Incumbent {
    x: DVector<f64>,
    ratio: f64,
}

impl Incumbent {
    fn new(x: &DVector<f64>) -> Self {
        Self {
            x: x.clone(),
            ratio: ratio_objective(x).unwrap_or(f64::INFINITY),
        }
    }

    fn offer(&mut self, x: &DVector<f64>) {
        if let Ok(r) = ratio_objective(x) {
            if r < self.ratio {
                self.ratio = r;
                self.x.copy_from(x);
            }
        }
    }
}

fn run_dca(
    p: &AffineProjector,
    alpha: f64,
    x0: &DVector<f64>,
    state: &mut InnerState,
    best: &mut Incumbent,
    cfg: &SolverConfig,
) -> Result<DcaOutcome> {
    let rho = lp_rho(p, cfg);
    let objective = |x: &DVector<f64>| l1_norm(x) - alpha * x.norm();
    let mut x = x0.clone();
    let mut f = objective(&x);
    let mut objectives = vec![f];
    let mut inner_iterations = 0;
    let mut iterations = 0;
    for _ in 0..cfg.outer_max {
        iterations += 1;
        let c = linearization(&x, alpha);
        let sub = Subproblem {
            c: &c,
            anchor: &c,
            beta: 0.0,
        };
        let rep = admm::solve(p, &sub, rho, state, cfg)?;
        inner_iterations += rep.iterations;
        let f_new = objective(&state.x);
        // a rise means the inner solve hit its accuracy floor
        if f_new > f + DCA_DESCENT_SLACK * f.abs().max(1.0) {
            break;
        }
        let step = relative_step(&state.x, &x);
        x.copy_from(&state.x);
        f = f_new;
        objectives.push(f);
        best.offer(&x);
        if step <= cfg.outer_tol {
            break;
        }
    }
    Ok(DcaOutcome {
        x,
        t_value: f,
        objectives,
        iterations,
        inner_iterations,
    })
}

/// Bisection on `α` over `[1, √n]` using the sign of `T(α)`.
///
/// Each DCA run starts from the incumbent (smallest ratio seen), so a
/// positive `T(α)` certifies that every point seen has ratio above `α`, and
/// `ub` is also tightened to the incumbent ratio. `x_star` is the incumbent.
pub fn solve_bs(p: &AffineProjector, cfg: &SolverConfig) -> SolverResult {
    let start = Instant::now();
    let n = p.cols();
    let mut trace = Vec::new();
    let (x0, mut inner_iterations) = match initial_point(p, cfg) {
        Ok(v) => v,
        Err(_) => (p.least_norm_point().clone(), 0),
    };
    let mut best = Incumbent::new(&x0);
    let mut state = InnerState::from_point(&x0);
    let (mut lb, mut ub) = (1.0f64, (n as f64).sqrt());
    let mut alpha = 0.5 * (lb + ub);
    let mut status = Status::MaxIterations;
    let mut iterations = 0;

    for k in 1..=cfg.bs_outer_max {
        iterations = k;
        let bracket = (lb, ub);
        let start_point = best.x.clone();
        state.restart_at(&start_point);
        let t_value = match run_dca(p, alpha, &start_point, &mut state, &mut best, cfg) {
            Ok(out) => {
                inner_iterations += out.inner_iterations;
                out.t_value
            }
            Err(Error::Unbounded) => {
                state = InnerState::from_point(&best.x);
                f64::NEG_INFINITY
            }
            Err(e) => {
                status = failure_status(&e);
                break;
            }
        };
        let root = t_value.abs() <= cfg.bs_zero_tol;
        if t_value < -cfg.bs_zero_tol {
            ub = ub.min(alpha);
        } else if t_value > cfg.bs_zero_tol {
            lb = alpha;
        }
        ub = ub.min(best.ratio).max(lb);
        trace.push(TraceRecord {
            k,
            alpha: best.ratio,
            dca_objective: t_value,
            step_norm: relative_step(&best.x, &start_point),
            phi_residual: None,
            bracket: Some(bracket),
            bs_alpha: Some(alpha),
        });
        if root {
            status = Status::Converged;
            break;
        }
        let next = 0.5 * (lb + ub);
        let moved = (next - alpha).abs();
        alpha = next;
        if moved <= cfg.bs_alpha_tol {
            status = Status::Converged;
            break;
        }
    }

    SolverResult {
        scheme: Scheme::Bs,
        x_star: best.x,
        status,
        trace,
        iterations,
        inner_iterations,
        wall_time: start.elapsed(),
    }
}

/// Adaptive scheme with the linear subproblem.
pub fn solve_a1(p: &AffineProjector, cfg: &SolverConfig) -> SolverResult {
    adaptive(p, cfg, Scheme::A1, 0.0, lp_rho(p, cfg))
}

/// Adaptive scheme with the proximal subproblem, weight `cfg.beta`.
pub fn solve_a2(p: &AffineProjector, cfg: &SolverConfig) -> SolverResult {
    adaptive(p, cfg, Scheme::A2, cfg.beta, cfg.rho)
}

/// Shared loop of A1 (`beta = 0`) and A2. A step that raises `α` beyond
/// `ALPHA_MONOTONE_SLACK` can only come from inner-solve error; it is
/// discarded and the run stops at the previous iterate.
fn adaptive(
    p: &AffineProjector,
    cfg: &SolverConfig,
    scheme: Scheme,
    beta: f64,
    rho: f64,
) -> SolverResult {
    let start = Instant::now();
    let (mut x, mut inner_iterations) = match initial_point(p, cfg) {
        Ok(v) => v,
        Err(_) => (p.least_norm_point().clone(), 0),
    };
    let mut alpha = ratio_objective(&x).unwrap_or(f64::NAN);
    let mut state = InnerState::from_point(&x);
    let mut trace = Vec::new();
    let mut status = Status::MaxIterations;
    let mut iterations = 0;

    for k in 1..=cfg.outer_max {
        let c = linearization(&x, alpha);
        let sub = Subproblem {
            c: &c,
            anchor: &x,
            beta,
        };
        match admm::solve(p, &sub, rho, &mut state, cfg) {
            Ok(rep) => inner_iterations += rep.iterations,
            Err(e) => {
                status = failure_status(&e);
                break;
            }
        }
        let x_new = &state.x;
        let alpha_new = match ratio_objective(x_new) {
            Ok(a) => a,
            Err(_) => {
                status = Status::InnerFailure;
                break;
            }
        };
        if alpha_new > alpha + ALPHA_MONOTONE_SLACK {
            status = Status::Converged;
            break;
        }
        iterations = k;
        let step = relative_step(x_new, &x);
        trace.push(TraceRecord {
            k,
            alpha: alpha_new,
            dca_objective: l1_norm(x_new) - alpha * x_new.norm(),
            step_norm: step,
            // at x(k) the prox-gradient map is β(x(k) − x(k+1))
            phi_residual: (beta > 0.0).then(|| beta * (&x - x_new).norm()),
            bracket: None,
            bs_alpha: None,
        });
        x.copy_from(x_new);
        alpha = alpha_new;
        if step <= cfg.outer_tol {
            status = Status::Converged;
            break;
        }
    }

    SolverResult {
        scheme,
        x_star: x,
        status,
        trace,
        iterations,
        inner_iterations,
        wall_time: start.elapsed(),
    }
}

/// Runs the scheme named in `cfg`.
pub fn solve(p: &AffineProjector, cfg: &SolverConfig) -> SolverResult {
    match cfg.scheme {
        Scheme::Bs => solve_bs(p, cfg),
        Scheme::A1 => solve_a1(p, cfg),
        Scheme::A2 => solve_a2(p, cfg),
        Scheme::L1Bp => solve_l1_bp(p, cfg),
    }
}

/// `‖Φ(x)‖₂` with `Φ(x) = β(x − prox_{g/β}(x − ∇w(x)/β))` and `g` the L1
/// norm plus the indicator of `{Ax = b}`. Zero exactly at critical points
/// of the ratio model.
pub fn phi_residual(
    p: &AffineProjector,
    x: &DVector<f64>,
    beta: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    Ok(phi_map(p, x, beta, cfg)?.norm())
}

/// `Φ(x)` itself; see [`phi_residual`].
pub fn phi_map(
    p: &AffineProjector,
    x: &DVector<f64>,
    beta: f64,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    check_len(x, p.cols())?;
    let c = -grad_w(x)?;
    let mut state = InnerState::from_point(x);
    let prox = solve_a2_subproblem(p, &c, x, beta, cfg.rho, &mut state, cfg)?;
    Ok((x - prox) * beta)
}
