//! Sparse recovery by minimizing `‖x‖₁/‖x‖₂` subject to `Ax = b`.
//!
//! Three schemes share one inner ADMM kernel:
//!
//! - **BS** bisects on `α` using the sign of `T(α) = inf ‖x‖₁ − α‖x‖₂`,
//!   whose root is the optimal ratio;
//! - **A1** updates `α` to the current ratio after every linearized L1 solve;
//! - **A2** does the same with a proximal term `(β/2)‖x − x(k)‖₂²`, which
//!   makes it a proximal-gradient method with guaranteed sufficient decrease.
//!
//! Basis pursuit (`min ‖x‖₁`) serves as baseline and default initializer.
//! [`harness`] reproduces the oversampled-DCT experiment protocol: seeded
//! instances, the success / model-failure / algorithm-failure taxonomy, and
//! per-cell aggregate reports.

pub mod error;
pub mod harness;
pub mod instance_io;
pub mod linalg;
pub mod problem;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{grad_w, ratio_objective, shrink, AffineProjector, DenseMatrix};
pub use problem::{gen_instance, InstanceMeta, ProblemInstance, RngStream, ValueMode};
pub use solvers::{Scheme, SolverConfig, SolverResult, Status};

pub use nalgebra::{DMatrix, DVector};
