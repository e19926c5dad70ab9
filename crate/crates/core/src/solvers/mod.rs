//! The L1/L2 schemes (bisection, A1, A2), the basis-pursuit baseline, their
//! shared inner ADMM, and the criticality diagnostic.

mod admm;
mod config;
mod crossover;
mod newton;
mod result;
mod schemes;

pub use admm::InnerState;
pub use config::{InitPolicy, Scheme, SolverConfig, LP_RHO_SCALE};
pub use result::{SolverResult, Status, TraceRecord};
pub use schemes::{
    dca_l1_minus_alpha_l2, phi_map, phi_residual, solve, solve_a1, solve_a2, solve_a2_subproblem,
    solve_bs, solve_l1_bp, solve_lp_subproblem, DcaOutcome, ALPHA_MONOTONE_SLACK,
};
