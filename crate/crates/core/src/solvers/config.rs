use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::ValueMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Bisection on the root of `T(α)`.
    Bs,
    /// Adaptive `α` with a linear subproblem.
    A1,
    /// Adaptive `α` with a proximally regularized subproblem.
    A2,
    /// Basis pursuit, `min ‖x‖₁ s.t. Ax = b`.
    L1Bp,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Bs, Scheme::A1, Scheme::A2, Scheme::L1Bp];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Bs => "bs",
            Scheme::A1 => "a1",
            Scheme::A2 => "a2",
            Scheme::L1Bp => "l1bp",
        }
    }

    /// Whether the scheme minimizes the L1/L2 ratio (as opposed to plain L1).
    pub fn is_ratio_model(&self) -> bool {
        !matches!(self, Scheme::L1Bp)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bs" => Ok(Scheme::Bs),
            "a1" => Ok(Scheme::A1),
            "a2" => Ok(Scheme::A2),
            "l1bp" | "l1" | "bp" => Ok(Scheme::L1Bp),
            other => Err(Error::InvalidConfig(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitPolicy {
    /// Start from the basis-pursuit solution.
    L1Solution,
    /// Start from `Aᵀ(AAᵀ)⁻¹b`.
    LeastNorm,
    /// Start from the given vector, projected onto the feasible set.
    Provided(DVector<f64>),
}

/// Hyperparameters shared by all schemes. Fields irrelevant to a scheme
/// are ignored by it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Proximal weight of A2's subproblem; must be positive for A2.
    pub beta: f64,
    /// ADMM penalty for A2's subproblem.
    pub rho: f64,
    /// ADMM penalty for the linear subproblems (BP, DCA steps, A1). `None`
    /// picks `LP_RHO_SCALE/‖b‖₂`.
    pub lp_rho: Option<f64>,
    pub outer_max: usize,
    /// Relative step `‖x(k) − x(k−1)‖₂/‖x(k)‖₂` that ends the outer loop.
    pub outer_tol: f64,
    pub inner_max: usize,
    /// Relative ADMM residual, measured against `max(1, ‖x‖₂)`.
    pub inner_tol: f64,
    pub bs_outer_max: usize,
    pub bs_alpha_tol: f64,
    /// Band around zero in which `T(α)` counts as a root.
    pub bs_zero_tol: f64,
    pub init_policy: InitPolicy,
    pub divergence_norm_cap: f64,
}

/// Numerator of the automatic linear-subproblem penalty `LP_RHO_SCALE/‖b‖₂`.
pub const LP_RHO_SCALE: f64 = 10.0;

impl SolverConfig {
    /// Defaults for Gaussian-valued signals (`β = 1`, `ρ = 20`).
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            beta: 1.0,
            rho: 20.0,
            lp_rho: None,
            outer_max: 100,
            outer_tol: 1e-8,
            inner_max: 100_000,
            inner_tol: 1e-10,
            bs_outer_max: 10,
            bs_alpha_tol: 1e-2,
            bs_zero_tol: 1e-8,
            init_policy: InitPolicy::L1Solution,
            divergence_norm_cap: 1e12,
        }
    }

    /// Defaults with A2's `(β, ρ)` chosen by value regime: `(1, 20)` for
    /// Gaussian values, `(1e-5, 0.3)` for dynamic-range values.
    pub fn for_regime(scheme: Scheme, mode: ValueMode) -> Self {
        let mut cfg = Self::new(scheme);
        if let ValueMode::DynamicRange(_) = mode {
            cfg.beta = 1e-5;
            cfg.rho = 0.3;
        }
        cfg
    }

    pub fn with_init(mut self, init: InitPolicy) -> Self {
        self.init_policy = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("bs_alpha_tol", self.bs_alpha_tol),
            ("bs_zero_tol", self.bs_zero_tol),
            ("divergence_norm_cap", self.divergence_norm_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if let Some(r) = self.lp_rho {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "lp_rho must be positive and finite, got {r}"
                )));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if self.scheme == Scheme::A2 && self.beta == 0.0 {
            return Err(Error::InvalidConfig("A2 requires beta > 0".into()));
        }
        for (name, v) in [
            ("outer_max", self.outer_max),
            ("inner_max", self.inner_max),
            ("bs_outer_max", self.bs_outer_max),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}
