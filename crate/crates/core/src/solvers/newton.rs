//! Semismooth Newton on the dual of the proximal subproblem
//!
//! ```text
//! min ‖x‖₁ − ⟨c, x⟩ + (β/2)‖x − a‖₂²   s.t.  Ax = b,   β > 0.
//! ```
//!
//! For a multiplier `λ` the Lagrangian is minimized by
//! `x(λ) = shrink(βa + c − Aᵀλ, 1)/β`, and the dual function
//! `g(λ) = L(x(λ), λ)` is concave and differentiable with gradient
//! `Ax(λ) − b`. Its generalized Hessian is `−A_S A_Sᵀ/β` on the support `S`
//! of `x(λ)`, so each step solves an `m x m` system. Steps are damped by
//! backtracking on `g`, or accepted when they cut the residual.
//!
//! With coherent columns `A_S A_Sᵀ` is close to singular and the last digits
//! of feasibility come slowly, while the support settles early. The caller
//! re-solves on the face and checks optimality, so a stable support with a
//! small residual is returned as well.

use nalgebra::{DMatrix, DVector};

use super::admm::Subproblem;
use crate::linalg::{l1_norm, AffineProjector, TOL_FEAS};

/// Ridge on `A_S A_Sᵀ`, relative to `trace(AAᵀ)/m`.
const RIDGE: f64 = 1e-10;
/// Feasibility target relative to `TOL_FEAS·‖b‖₂`.
const TARGET: f64 = 1e-2;
/// Residual, relative to `‖b‖₂`, below which a support that has not changed
/// for `STABLE_STEPS` steps is returned.
const SUPPORT_RESIDUAL: f64 = 1e-5;
const STABLE_STEPS: usize = 3;
const MAX_BACKTRACK: usize = 40;

/// `x(λ)` and the reduced vector `βa + c − Aᵀλ`.
fn primal(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    lambda: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let a = p.matrix().as_matrix();
    let mut z = sub.c.clone();
    z.axpy(sub.beta, sub.anchor, 1.0);
    z.gemv_tr(-1.0, a, lambda, 1.0);
    let inv_beta = 1.0 / sub.beta;
    let x = z.map(|t| inv_beta * crate::linalg::shrink_scalar(t, 1.0));
    (x, z)
}

fn dual_value(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    lambda: &DVector<f64>,
    x: &DVector<f64>,
) -> f64 {
    let r = p.matrix().as_matrix() * x - p.rhs();
    l1_norm(x) - sub.c.dot(x) + 0.5 * sub.beta * (x - sub.anchor).norm_squared() + lambda.dot(&r)
}

/// Runs up to `max_iter` damped Newton steps from `lambda`. Returns
/// `x(λ)` and `λ` once `‖Ax(λ) − b‖₂` is far below the feasibility
/// tolerance or the support has settled, `None` otherwise.
pub(crate) fn dual_newton(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    mut lambda: DVector<f64>,
    max_iter: usize,
) -> Option<(DVector<f64>, DVector<f64>)> {
    debug_assert!(sub.beta > 0.0);
    let a = p.matrix().as_matrix();
    let m = a.nrows();
    let target = TARGET * TOL_FEAS * p.rhs_norm();
    let gram_scale = a.norm_squared() / m as f64;
    let (mut x, _) = primal(p, sub, &lambda);
    let mut g = dual_value(p, sub, &lambda, &x);
    let mut stable = 0;
    for _ in 0..max_iter {
        let r = a * &x - p.rhs();
        let r_norm = r.norm();
        if r_norm <= target || (stable >= STABLE_STEPS && r_norm <= SUPPORT_RESIDUAL * p.rhs_norm())
        {
            return Some((x, lambda));
        }
        let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
        let mut h = DMatrix::from_diagonal_element(m, m, RIDGE * gram_scale);
        for &i in &support {
            let col = a.column(i);
            h.ger(1.0, &col, &col, 1.0);
        }
        let chol = h.cholesky()?;
        let d = chol.solve(&(r.clone() * sub.beta));
        // ascent direction: ⟨∇g, d⟩ = ⟨r, d⟩ > 0
        let slope = r.dot(&d);
        if !(slope > 0.0) {
            return None;
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACK {
            let trial = &lambda + &d * step;
            let (x_t, _) = primal(p, sub, &trial);
            let g_t = dual_value(p, sub, &trial, &x_t);
            let r_t = (a * &x_t - p.rhs()).norm();
            if g_t >= g + 1e-4 * step * slope || r_t <= (1.0 - 0.5 * step) * r_norm {
                let same = x
                    .iter()
                    .zip(x_t.iter())
                    .all(|(u, v)| (*u != 0.0) == (*v != 0.0));
                stable = if same { stable + 1 } else { 0 };
                lambda = trial;
                x = x_t;
                g = g_t;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    let r_norm = (a * &x - p.rhs()).norm();
    (r_norm <= target || (stable >= STABLE_STEPS && r_norm <= SUPPORT_RESIDUAL * p.rhs_norm()))
        .then_some((x, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn matches_closed_form_on_a_line() {
        // x1 + x2 = 1, c = 0, a = 0, β = 1: minimizer (1/2, 1/2)
        let a = DenseMatrix::from_row_major(1, 2, &[1.0, 1.0]).unwrap();
        let p = AffineProjector::new(a, DVector::from_element(1, 1.0)).unwrap();
        let z = DVector::zeros(2);
        let sub = Subproblem {
            c: &z,
            anchor: &z,
            beta: 1.0,
        };
        let (x, _) = dual_newton(&p, &sub, DVector::zeros(1), 50).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }
}
