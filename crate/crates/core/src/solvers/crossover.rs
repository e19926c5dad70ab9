//! Simplex crossover for the linear subproblem
//!
//! ```text
//! min ‖x‖₁ − ⟨c, x⟩   s.t.  Ax = b
//! ```
//!
//! started from an approximate ADMM solution. Variables are free with the
//! convex piecewise-linear cost `|x_j| − c_j x_j`, so a basis is `m`
//! linearly independent columns together with the sign of each basic value.
//! With `λ` solving `A_Bᵀλ = c_B − σ_B` and `q = c − Aᵀλ`, moving a
//! nonbasic `x_j` by `t·s` changes the objective at rate `1 − s·q_j`, so
//! the basis is optimal when `|q_j| ≤ 1` off the basis. A column with
//! `|q_j| > 1` and no basic value blocking its ray proves unboundedness.
//!
//! Vertices of these problems are usually degenerate (fewer than `m`
//! nonzeros), so the pivots run on `b` perturbed along the initial basis,
//! which makes every basic value nonzero. The final basis is then evaluated
//! at the true `b`; basic values that end up with the wrong sign must be
//! negligible, since each one costs at most twice its magnitude in
//! objective. Otherwise their signs are flipped and pivoting resumes under
//! a smaller perturbation.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::linalg::AffineProjector;

/// Allowed excess of `|q_j|` over one at optimality.
const OPT_TOL: f64 = 1e-9;
/// Smallest pivot element accepted by the ratio test, relative to the
/// largest entry of the column.
const PIVOT_TOL: f64 = 1e-9;
/// Relative residual a column needs to join the initial basis: the strict
/// value keeps the basis well conditioned, the loose one completes it.
const RANK_TOL_STRICT: f64 = 1e-3;
const RANK_TOL_LOOSE: f64 = 1e-10;
/// Pivots in a row without objective progress before switching to
/// Bland's rule.
const DEGENERATE_STREAK: usize = 20;
/// Size of the perturbation of `b`, relative to the largest basic value,
/// and its decay between rounds.
const PERTURBATION: f64 = 1e-7;
const PERTURBATION_DECAY: f64 = 1e-3;
/// Pivot rounds; the last one runs on the unperturbed `b`.
const ROUNDS: usize = 3;
/// Primal feasibility slack of the ratio test, relative to the current
/// perturbation (or to the largest starting basic value once it is zero).
const FEAS_TOL: f64 = 1e-2;
const FEAS_TOL_UNPERTURBED: f64 = 1e-13;
/// Tolerated total magnitude of wrong-sign basic values, relative to
/// `‖x‖₁`.
const SIGN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Crossover {
    /// Optimal vertex with its dual vector `q` (`|q| ≤ 1 + OPT_TOL`,
    /// `q_B = σ_B`).
    Optimal {
        x: DVector<f64>,
        q: DVector<f64>,
    },
    Unbounded,
    /// Pivot limit reached or the basis became singular.
    GaveUp,
}

/// Runs at most `max_pivots` primal simplex pivots from a basis built from
/// the ADMM iterate `y` (largest magnitudes first) and dual `u`.
pub(crate) fn crossover(
    p: &AffineProjector,
    c: &DVector<f64>,
    y: &DVector<f64>,
    u: &DVector<f64>,
    max_pivots: usize,
) -> Crossover {
    let a = p.matrix().as_matrix();
    let m = a.nrows();
    let Some(mut basis) = initial_basis(a, y, u) else {
        return Crossover::GaveUp;
    };
    let hint = |j: usize| {
        if y[j] != 0.0 {
            y[j].signum()
        } else if u[j] != 0.0 {
            u[j].signum()
        } else {
            1.0
        }
    };
    let Some(x0) = columns(a, &basis).lu().solve(p.rhs()) else {
        return Crossover::GaveUp;
    };
    // Basic signs are part of the basis state: set here and on entry.
    let mut signs: Vec<f64> = basis
        .iter()
        .zip(x0.iter())
        .map(|(&j, &v)| if v != 0.0 { v.signum() } else { hint(j) })
        .collect();
    let scale = x0.amax().max(f64::MIN_POSITIVE);
    let mut budget = max_pivots;
    let mut perturbation = PERTURBATION;
    for round in 0..ROUNDS {
        // spread the offsets so ties between basic values are unlikely
        let delta = DVector::from_fn(m, |k, _| {
            let spread = 1.0 + (k as f64 * 0.618_033_988_75).fract();
            signs[k] * perturbation * scale * spread
        });
        let b_pert = p.rhs() + columns(a, &basis) * delta;
        let feas_tol = if perturbation > 0.0 {
            FEAS_TOL * perturbation
        } else {
            FEAS_TOL_UNPERTURBED
        } * scale;
        let (lu, q) = match pivot(a, c, &b_pert, feas_tol, &mut basis, &mut signs, &mut budget) {
            Pivoted::Optimal { lu, q } => (lu, q),
            Pivoted::Unbounded => return Crossover::Unbounded,
            Pivoted::GaveUp => return Crossover::GaveUp,
        };
        let Some(x_b) = lu.solve(p.rhs()) else {
            return Crossover::GaveUp;
        };
        let wrong: f64 = x_b
            .iter()
            .zip(&signs)
            .filter(|(&v, &s)| v * s < 0.0)
            .map(|(v, _)| v.abs())
            .sum();
        if wrong <= SIGN_SLACK * x_b.abs().sum() {
            return finish(&basis, &signs, &x_b, q);
        }
        // The basis is optimal for the perturbed `b` only. Take the signs
        // at the true `b` and pivot again under a smaller perturbation,
        // the last round with none.
        for (s, &v) in signs.iter_mut().zip(x_b.iter()) {
            if v * *s < 0.0 {
                *s = -*s;
            }
        }
        perturbation = if round + 2 == ROUNDS {
            0.0
        } else {
            perturbation * PERTURBATION_DECAY
        };
    }
    Crossover::GaveUp
}

fn columns(a: &DMatrix<f64>, basis: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), basis.len(), |i, k| a[(i, basis[k])])
}

enum Pivoted {
    Optimal {
        lu: LU<f64, Dyn, Dyn>,
        q: DVector<f64>,
    },
    Unbounded,
    GaveUp,
}

/// Primal simplex on right-hand side `rhs` from the given basis, drawing
/// pivots from `budget`.
fn pivot(
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    rhs: &DVector<f64>,
    feas_tol: f64,
    basis: &mut [usize],
    signs: &mut [f64],
    budget: &mut usize,
) -> Pivoted {
    let (m, n) = (a.nrows(), a.ncols());
    let mut in_basis = vec![false; n];
    for &j in basis.iter() {
        in_basis[j] = true;
    }
    let mut degenerate = 0;
    let mut last_obj = f64::INFINITY;
    loop {
        let a_b = columns(a, basis);
        let lu = a_b.clone().lu();
        let lu_t = a_b.transpose().lu();
        let Some(x_b) = lu.solve(rhs) else {
            return Pivoted::GaveUp;
        };
        let obj: f64 = (0..m).map(|k| (signs[k] - c[basis[k]]) * x_b[k]).sum();
        degenerate = if obj < last_obj - 1e-14 * obj.abs().max(1.0) {
            0
        } else {
            degenerate + 1
        };
        last_obj = last_obj.min(obj);
        let dual_rhs = DVector::from_fn(m, |k, _| c[basis[k]] - signs[k]);
        let Some(lambda) = lu_t.solve(&dual_rhs) else {
            return Pivoted::GaveUp;
        };
        let mut q = c.clone();
        q.gemv_tr(-1.0, a, &lambda, 1.0);

        let eligible = |j: usize| !in_basis[j] && q[j].abs() > 1.0 + OPT_TOL;
        let entering = if degenerate >= DEGENERATE_STREAK {
            (0..n).find(|&j| eligible(j))
        } else {
            (0..n)
                .filter(|&j| eligible(j))
                .max_by(|&i, &j| q[i].abs().total_cmp(&q[j].abs()))
        };
        let Some(j) = entering else {
            return Pivoted::Optimal { lu, q };
        };
        if *budget == 0 {
            return Pivoted::GaveUp;
        }
        *budget -= 1;
        let s = q[j].signum();
        let Some(w) = lu.solve(&a.column(j).into_owned()) else {
            return Pivoted::GaveUp;
        };
        let pivot_tol = PIVOT_TOL * w.amax();

        // Harris ratio test. Basic k shrinks toward zero when σ_k·s·w_k > 0;
        // the first pass bounds the step with values relaxed by `feas_tol`,
        // the second takes the largest pivot within that bound.
        let shrinking = |k: usize| signs[k] * s * w[k] > pivot_tol;
        let bound = (0..m)
            .filter(|&k| shrinking(k))
            .map(|k| (signs[k] * x_b[k] + feas_tol) / (signs[k] * s * w[k]))
            .fold(f64::INFINITY, f64::min);
        if bound == f64::INFINITY {
            return Pivoted::Unbounded;
        }
        let leave = (0..m)
            .filter(|&k| shrinking(k) && signs[k] * x_b[k] / (signs[k] * s * w[k]) <= bound)
            .max_by(|&i, &k| w[i].abs().total_cmp(&w[k].abs()));
        let Some(r) = leave else {
            return Pivoted::GaveUp;
        };
        in_basis[basis[r]] = false;
        in_basis[j] = true;
        basis[r] = j;
        signs[r] = s;
    }
}

/// Vertex and dual vector of a basis that is optimal at the true `b`.
fn finish(basis: &[usize], signs: &[f64], x_b: &DVector<f64>, mut q: DVector<f64>) -> Crossover {
    let mut x = DVector::zeros(q.len());
    for (k, &col) in basis.iter().enumerate() {
        x[col] = x_b[k];
        q[col] = signs[k];
    }
    Crossover::Optimal { x, q }
}

/// `m` independent columns chosen greedily: support of `y` by decreasing
/// magnitude, then the rest by decreasing `|u_j|`. A first pass only takes
/// columns far from the span of those already chosen.
fn initial_basis(a: &DMatrix<f64>, y: &DVector<f64>, u: &DVector<f64>) -> Option<Vec<usize>> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let key = |k: usize| (y[k].abs(), u[k].abs());
        let (yi, ui) = key(i);
        let (yj, uj) = key(j);
        yj.total_cmp(&yi).then(uj.total_cmp(&ui))
    });
    let mut q: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut taken = vec![false; n];
    for tol in [RANK_TOL_STRICT, RANK_TOL_LOOSE] {
        for &j in &order {
            if taken[j] {
                continue;
            }
            let col = a.column(j).into_owned();
            let norm = col.norm();
            let mut r = col;
            for _ in 0..2 {
                for e in &q {
                    let proj = e.dot(&r);
                    r.axpy(-proj, e, 1.0);
                }
            }
            let rn = r.norm();
            if rn > tol * norm {
                q.push(r / rn);
                basis.push(j);
                taken[j] = true;
                if basis.len() == m {
                    return Some(basis);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn finds_vertex_of_plane_section() {
        let a = DenseMatrix::from_row_major(1, 3, &[1.0, 1.0, 1.0]).unwrap();
        let p = AffineProjector::new(a, DVector::from_element(1, 1.0)).unwrap();
        let z = DVector::zeros(3);
        match crossover(
            &p,
            &z,
            &DVector::from_column_slice(&[0.2, 0.5, 0.3]),
            &z,
            10,
        ) {
            Crossover::Optimal { x, .. } => {
                assert!((x.sum() - 1.0).abs() < 1e-12);
                assert!((x.abs().sum() - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_unbounded_ray() {
        let a = DenseMatrix::from_row_major(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let p = AffineProjector::new(a, DVector::from_column_slice(&[1.0, 1.0])).unwrap();
        let c = DVector::from_column_slice(&[2.0, -1.0, 0.0]);
        let z = DVector::zeros(3);
        assert_eq!(
            crossover(&p, &c, p.least_norm_point(), &z, 10),
            Crossover::Unbounded
        );
    }

    #[test]
    fn optimal_dual_is_a_certificate() {
        let a =
            DenseMatrix::from_row_major(2, 4, &[1.0, 2.0, 0.5, -1.0, 0.0, 1.0, 3.0, 1.0]).unwrap();
        let p = AffineProjector::new(a.clone(), DVector::from_column_slice(&[1.0, 2.0])).unwrap();
        let c = DVector::from_column_slice(&[0.3, -0.2, 0.1, 0.0]);
        let Crossover::Optimal { x, q } =
            crossover(&p, &c, p.least_norm_point(), &DVector::zeros(4), 20)
        else {
            panic!("expected optimum");
        };
        assert!(p.relative_residual(&x).unwrap() < 1e-12);
        assert!(q.iter().all(|v| v.abs() <= 1.0 + OPT_TOL));
        // ⟨q, x⟩ = ‖x‖₁ and q − c ⊥ null(A): every feasible z has an
        // objective of at least ⟨q − c, z⟩ = ⟨q − c, x⟩
        assert!((q.dot(&x) - x.abs().sum()).abs() < 1e-12);
        let mut d = &q - &c;
        let mut scratch = DVector::zeros(2);
        p.project_null_mut(&mut d, &mut scratch);
        assert!(d.norm() < 1e-12);
    }
}
