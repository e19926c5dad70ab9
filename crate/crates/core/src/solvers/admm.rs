//! Inner ADMM for
//!
//! ```text
//! min ‖x‖₁ − ⟨x, c⟩ + (β/2)‖x − a‖₂²   s.t.  Ax = b
//! ```
//!
//! split as `x = y` with the affine constraint on `x` and the L1 term on `y`:
//!
//! ```text
//! x ← proj((β·a − u + ρ·y + c)/(β + ρ))
//! y ← shrink(x + u/ρ, 1/ρ)
//! u ← u + ρ(x − y)
//! ```
//!
//! `β = 0` is the linear subproblem. It may be unbounded below; any step
//! `d = x(j+1) − x(j)` lies in the null space of `A`, and a null-space `d`
//! with `⟨c, d⟩ > ‖d‖₁` proves unboundedness, so steps are tested against
//! that certificate as the iteration runs.
//!
//! The iterate is periodically polished on the support `S` and signs `σ`
//! of `y`: restricted to that face the subproblem is an equality-constrained
//! least-squares problem with a closed form. The polished point `x̂` is
//! accepted early when a KKT certificate exists, i.e. a multiplier `λ`
//! with `q = c − β(x̂ − a) − Aᵀλ` equal to `σ` on `S` and bounded by one in
//! magnitude elsewhere. The multiplier is fitted to the ADMM dual `u` and
//! then corrected to satisfy the equations on `S` exactly. Once the
//! residuals converge without a certificate the polished point is still
//! taken whenever it does not increase the objective.

use nalgebra::{DMatrix, DVector};

use super::config::SolverConfig;
use super::crossover::{crossover, Crossover};
use super::newton::dual_newton;
use crate::error::{Error, Result};
use crate::linalg::{l1_norm, shrink_scalar, AffineProjector, TOL_FEAS};

/// Warm-startable ADMM iterate. `x` is always feasible after a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub u: DVector<f64>,
}

impl InnerState {
    /// `x = y = point`, `u = 0`.
    pub fn from_point(point: &DVector<f64>) -> Self {
        Self {
            x: point.clone(),
            y: point.clone(),
            u: DVector::zeros(point.len()),
        }
    }

    /// Restart primal variables at `point`, keeping the dual.
    pub fn restart_at(&mut self, point: &DVector<f64>) {
        self.x.copy_from(point);
        self.y.copy_from(point);
    }
}

/// Data of one subproblem; `anchor` is only read when `beta > 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Subproblem<'a> {
    pub c: &'a DVector<f64>,
    pub anchor: &'a DVector<f64>,
    pub beta: f64,
}

impl<'a> Subproblem<'a> {
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let mut f = l1_norm(x) - self.c.dot(x);
        if self.beta > 0.0 {
            f += 0.5 * self.beta * (x - self.anchor).norm_squared();
        }
        f
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct InnerReport {
    pub iterations: usize,
    pub polished: bool,
}

/// Relative slack on `⟨c, d⟩ − ‖d‖₁` before a step counts as a recession
/// certificate.
const RECESSION_MARGIN: f64 = 1e-8;
const RECESSION_CHECK_EVERY: usize = 5;
/// Certificate checks start `CERTIFY_EVERY` iterations apart and the gap
/// grows by a quarter after every failed check, up to `CERTIFY_MAX_GAP`.
const CERTIFY_EVERY: usize = 10;
const CERTIFY_MAX_GAP: usize = 200;
/// Once the ADMM residual is below this, certificate checks also try a
/// simplex crossover (linear subproblem, pivot budget
/// `CROSSOVER_PIVOTS_PER_ROW·m` per attempt) or a dual Newton solve
/// (proximal subproblem, `NEWTON_STEPS` steps per attempt).
const CROSSOVER_RESIDUAL: f64 = 1e-4;
/// Residual reduction required before retrying a failed crossover or
/// Newton polish.
const RETRY_FACTOR: f64 = 10.0;
const ACTIVE_SET_SWAPS: usize = 32;
const CROSSOVER_PIVOTS_PER_ROW: usize = 50;
const NEWTON_STEPS: usize = 50;
/// Residual balancing of the linear subproblem's penalty.
const BALANCE_EVERY: usize = 100;
const BALANCE_RATIO: f64 = 10.0;
/// Allowed excess of `|q_j|` over one off the support.
const CERTIFY_TOL: f64 = 1e-9;
/// Relaxed certificate: a point whose multiplier exceeds the box by `ε`
/// is optimal to within `ε·‖x‖₁`.
const NEAR_TOL: f64 = 1e-5;
const NEAR_STREAK: usize = 20;
/// Minimum drop between consecutive sorted magnitudes of `y` for the
/// truncated face.
const GAP_RATIO: f64 = 100.0;

pub(crate) fn solve(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    rho: f64,
    state: &mut InnerState,
    cfg: &SolverConfig,
) -> Result<InnerReport> {
    let n = p.cols();
    let m = p.rows();
    debug_assert_eq!(sub.c.len(), n);
    let beta = sub.beta;
    let mut rho = rho;
    let mut inv_rho = 1.0 / rho;
    let denom = 1.0 / (beta + rho);
    let mut v = DVector::zeros(n);
    let mut x_prev = DVector::zeros(n);
    let mut scratch = DVector::zeros(m);
    let mut scratch_d = DVector::zeros(m);
    let mut d = DVector::zeros(n);
    let mut faces = FaceCache::default();

    // square systems have a single feasible point
    if m == n {
        state.x.copy_from(p.least_norm_point());
        state.y.copy_from(p.least_norm_point());
        return Ok(InnerReport {
            iterations: 0,
            polished: true,
        });
    }
    // The warm start is often already optimal (outer fixed points).
    if certify(p, sub, state, &mut faces) {
        return Ok(InnerReport {
            iterations: 0,
            polished: true,
        });
    }
    let mut next_check = 1;
    let mut newton_gate = CROSSOVER_RESIDUAL;
    let mut crossover_gate = CROSSOVER_RESIDUAL;
    let mut check_gap = CERTIFY_EVERY;

    let mut last_residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for j in 1..=cfg.inner_max {
        iterations = j;
        // x-update
        {
            let (y, u, c) = (state.y.as_slice(), state.u.as_slice(), sub.c.as_slice());
            let vs = v.as_mut_slice();
            if beta > 0.0 {
                let a = sub.anchor.as_slice();
                for i in 0..n {
                    vs[i] = (beta * a[i] - u[i] + rho * y[i] + c[i]) * denom;
                }
            } else {
                for i in 0..n {
                    vs[i] = y[i] + (c[i] - u[i]) * inv_rho;
                }
            }
        }
        std::mem::swap(&mut x_prev, &mut state.x);
        state.x.copy_from(&v);
        p.project_mut(&mut state.x, &mut scratch);

        // y- and u-updates, fused with the residual norms
        let mut primal_sq = 0.0;
        let mut dual_sq = 0.0;
        let mut x_sq = 0.0;
        {
            let x = state.x.as_slice();
            let y = state.y.as_mut_slice();
            let u = state.u.as_mut_slice();
            for i in 0..n {
                let y_new = shrink_scalar(x[i] + u[i] * inv_rho, inv_rho);
                let dy = y_new - y[i];
                y[i] = y_new;
                let r = x[i] - y_new;
                u[i] += rho * r;
                primal_sq += r * r;
                dual_sq += dy * dy;
                x_sq += x[i] * x[i];
            }
        }
        let x_norm = x_sq.sqrt();
        let scale = x_norm.max(1.0);
        let residual = primal_sq.sqrt().max(dual_sq.sqrt()) / scale;
        last_residual = residual;
        if !x_norm.is_finite() || x_norm > cfg.divergence_norm_cap {
            return Err(Error::Unbounded);
        }
        if residual <= cfg.inner_tol {
            converged = true;
            break;
        }
        if j == next_check {
            if certify(p, sub, state, &mut faces) {
                return Ok(InnerReport {
                    iterations,
                    polished: true,
                });
            }
            if beta == 0.0 && residual <= crossover_gate {
                match crossover(p, sub.c, &state.y, &state.u, CROSSOVER_PIVOTS_PER_ROW * m) {
                    Crossover::Optimal { x, q } => {
                        state.x.copy_from(&x);
                        state.y.copy_from(&x);
                        state.u.copy_from(&q.map(|t| t.clamp(-1.0, 1.0)));
                        return Ok(InnerReport {
                            iterations,
                            polished: true,
                        });
                    }
                    Crossover::Unbounded => return Err(Error::Unbounded),
                    Crossover::GaveUp => crossover_gate = residual / RETRY_FACTOR,
                }
            }
            if beta > 0.0 && residual <= newton_gate {
                if newton_polish(p, sub, state, &mut faces) {
                    return Ok(InnerReport {
                        iterations,
                        polished: true,
                    });
                }
                newton_gate = residual / RETRY_FACTOR;
            }
            next_check = j + check_gap;
            check_gap = (check_gap + check_gap / 4).min(CERTIFY_MAX_GAP);
        }
        if beta == 0.0 && j % BALANCE_EVERY == 0 {
            let (r, s) = (primal_sq.sqrt(), rho * dual_sq.sqrt());
            if r > BALANCE_RATIO * s {
                rho *= 2.0;
            } else if s > BALANCE_RATIO * r {
                rho *= 0.5;
            }
            inv_rho = 1.0 / rho;
        }
        if beta == 0.0 && j % RECESSION_CHECK_EVERY == 0 {
            d.copy_from(&state.x);
            d -= &x_prev;
            if is_recession_certificate(p, sub.c, &mut d, &mut scratch_d) {
                return Err(Error::Unbounded);
            }
        }
    }

    if !converged && last_residual > 10.0 * cfg.inner_tol {
        return Err(Error::InnerFailure {
            iterations,
            residual: last_residual,
        });
    }
    let polished = certify(p, sub, state, &mut faces) || polish(p, sub, state);
    Ok(InnerReport {
        iterations,
        polished,
    })
}

/// Dual Newton from the multiplier fitted to the ADMM state, then the
/// face certificate at its solution.
fn newton_polish(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    state: &mut InnerState,
    faces: &mut FaceCache,
) -> bool {
    let a = p.matrix().as_matrix();
    let mut v = sub.c.clone();
    v.axpy(-sub.beta, &state.x, 1.0);
    v.axpy(sub.beta, sub.anchor, 1.0);
    let mut lambda0 = a * (&v - &state.u);
    p.solve_gram_mut(&mut lambda0);
    let Some((x, _)) = dual_newton(p, sub, lambda0, NEWTON_STEPS) else {
        return false;
    };
    let Some(x) = active_set(p, sub, &x, ACTIVE_SET_SWAPS) else {
        return false;
    };
    let saved = state.clone();
    state.y.copy_from(&x);
    if certify(p, sub, state, faces) {
        return true;
    }
    *state = saved;
    false
}

/// Primal active-set method on the proximal subproblem from the support of
/// `x`. Each pass moves toward the face minimizer and stops at the first
/// entry that would change sign, dropping it; at a face minimizer the
/// largest multiplier violation joins the support.
fn active_set(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    x: &DVector<f64>,
    max_swaps: usize,
) -> Option<DVector<f64>> {
    let a = p.matrix().as_matrix();
    let m = a.nrows();
    let mut support = full_support(x);
    let mut signs = signs_of(x, &support);
    let mut cur: Vec<f64> = support.iter().map(|&i| x[i]).collect();
    for _ in 0..=max_swaps {
        let face = Face::build(p, support.clone(), signs.clone())?;
        let x_s = face.solve_on(p, sub, x)?;
        let blocking = (0..support.len())
            .filter(|&j| x_s[j] * signs[j] <= 0.0)
            .map(|j| (j, cur[j] / (cur[j] - x_s[j])))
            .min_by(|l, r| l.1.total_cmp(&r.1));
        if let Some((j, t)) = blocking {
            for (c, &v) in cur.iter_mut().zip(x_s.iter()) {
                *c += t * (v - *c);
            }
            // a blocking entry leaves the support unless that costs rank,
            // in which case it crosses zero onto the neighbouring face
            let mut rest = support.clone();
            rest.remove(j);
            let keeps_rank = rest.len() >= m && {
                let a_r = DMatrix::from_fn(m, rest.len(), |r, k| a[(r, rest[k])]);
                let sv = a_r.singular_values();
                sv.min() > 1e-12 * sv.max()
            };
            if keeps_rank {
                support = rest;
                signs.remove(j);
                cur.remove(j);
            } else {
                signs[j] = -signs[j];
                cur[j] = 0.0;
            }
            continue;
        }
        let mut z = DVector::zeros(x.len());
        for (&i, &v) in support.iter().zip(x_s.iter()) {
            z[i] = v;
        }
        let mut v = sub.c.clone();
        v.axpy(-sub.beta, &z, 1.0);
        v.axpy(sub.beta, sub.anchor, 1.0);
        let mut lambda0 = a * &v;
        p.solve_gram_mut(&mut lambda0);
        let lambda = face.multiplier(p, &v, lambda0)?;
        let mut q = v;
        q.gemv_tr(-1.0, a, &lambda, 1.0);
        for &i in &support {
            q[i] = 0.0;
        }
        let i = q.iamax();
        if q[i].abs() <= 1.0 + CERTIFY_TOL {
            return Some(z);
        }
        let pos = support.partition_point(|&k| k < i);
        support.insert(pos, i);
        signs.insert(pos, q[i].signum());
        cur = x_s.iter().copied().collect();
        cur.insert(pos, 0.0);
    }
    None
}

/// True when `d`, after exact projection onto `null(A)`, satisfies
/// `⟨c, d⟩ > ‖d‖₁` with margin. Overwrites `d`.
fn is_recession_certificate(
    p: &AffineProjector,
    c: &DVector<f64>,
    d: &mut DVector<f64>,
    scratch: &mut DVector<f64>,
) -> bool {
    let cheap = c.dot(d) - l1_norm(d);
    if cheap <= 0.0 {
        return false;
    }
    p.project_null_mut(d, scratch);
    let l1 = l1_norm(d);
    let gain = c.dot(d) - l1;
    l1 > 0.0 && gain > RECESSION_MARGIN * (l1 + c.norm() * d.norm())
}

/// Face of `y`: support indices, their signs, and the columns of `A`.
struct Face {
    support: Vec<usize>,
    signs: Vec<f64>,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rank_eps: f64,
}

impl Face {
    /// Full support of `y`.
    fn of(p: &AffineProjector, y: &DVector<f64>) -> Option<Self> {
        let support = full_support(y);
        let signs = signs_of(y, &support);
        Self::build(p, support, signs)
    }

    fn build(p: &AffineProjector, support: Vec<usize>, signs: Vec<f64>) -> Option<Self> {
        if support.is_empty() {
            return None;
        }
        let a = p.matrix().as_matrix();
        let a_s = DMatrix::from_fn(a.nrows(), support.len(), |i, j| a[(i, support[j])]);
        let svd = a_s.svd(true, true);
        let rank_eps = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        Some(Self {
            support,
            signs,
            svd,
            rank_eps,
        })
    }

    /// Minimizer on the span of the face columns with the face signs
    /// fixed, as coefficients on the support.
    fn solve_on(
        &self,
        p: &AffineProjector,
        sub: &Subproblem<'_>,
        y: &DVector<f64>,
    ) -> Option<DVector<f64>> {
        let k = self.support.len();
        let g = DVector::from_fn(k, |j, _| {
            let i = self.support[j];
            if sub.beta > 0.0 {
                sub.anchor[i] + (sub.c[i] - self.signs[j]) / sub.beta
            } else {
                y[i]
            }
        });
        let a = p.matrix().as_matrix();
        let mut r = -p.rhs();
        for (j, &i) in self.support.iter().enumerate() {
            r.axpy(g[j], &a.column(i), 1.0);
        }
        let delta = self.svd.solve(&r, self.rank_eps).ok()?;
        Some(g - delta)
    }

    /// Minimizer of the subproblem over the face, if it keeps the signs
    /// and is feasible.
    fn candidate(
        &self,
        p: &AffineProjector,
        sub: &Subproblem<'_>,
        y: &DVector<f64>,
    ) -> Option<DVector<f64>> {
        let x_s = self.solve_on(p, sub, y)?;
        let a = p.matrix().as_matrix();
        if x_s
            .iter()
            .zip(&self.signs)
            .any(|(&v, &sg)| v == 0.0 || v.signum() != sg)
        {
            return None;
        }
        let mut x = DVector::zeros(y.len());
        for (&i, &v) in self.support.iter().zip(x_s.iter()) {
            x[i] = v;
        }
        let feas = (a * &x - p.rhs()).norm();
        (feas <= TOL_FEAS * p.rhs_norm()).then_some(x)
    }

    /// `λ` with `(v − Aᵀλ)_S = σ`, closest to `λ0`. `None` if the equations
    /// on `S` are inconsistent.
    fn multiplier(
        &self,
        p: &AffineProjector,
        v: &DVector<f64>,
        lambda0: DVector<f64>,
    ) -> Option<DVector<f64>> {
        let a = p.matrix().as_matrix();
        let k = self.support.len();
        let e = DVector::from_fn(k, |j, _| {
            let i = self.support[j];
            v[i] - self.signs[j] - a.column(i).dot(&lambda0)
        });
        // A_Sᵀ = V Σ Uᵀ, so pinv(A_Sᵀ) e = U Σ⁺ Vᵀ e
        let u = self.svd.u.as_ref()?;
        let v_t = self.svd.v_t.as_ref()?;
        let mut coeff = v_t * &e;
        for (c, &sv) in coeff.iter_mut().zip(self.svd.singular_values.iter()) {
            *c = if sv > self.rank_eps { *c / sv } else { 0.0 };
        }
        Some(lambda0 + u * coeff)
    }
}

fn signs_of(v: &DVector<f64>, support: &[usize]) -> Vec<f64> {
    support.iter().map(|&i| v[i].signum()).collect()
}

/// `support` extended to `size` indices by the largest `|u_j|` outside it,
/// with the signs of `u`. Targets vertices whose support `y` has not fully
/// picked up yet.
fn padded_face(
    u: &DVector<f64>,
    support: &[usize],
    signs: &[f64],
    size: usize,
) -> Option<(Vec<usize>, Vec<f64>)> {
    if support.len() >= size {
        return None;
    }
    let mut inside = vec![false; u.len()];
    for &i in support {
        inside[i] = true;
    }
    let mut rest: Vec<usize> = (0..u.len())
        .filter(|&i| !inside[i] && u[i] != 0.0)
        .collect();
    rest.sort_by(|&i, &j| u[j].abs().total_cmp(&u[i].abs()));
    rest.truncate(size - support.len());
    let mut pairs: Vec<(usize, f64)> = support.iter().copied().zip(signs.iter().copied()).collect();
    pairs.extend(rest.iter().map(|&i| (i, u[i].signum())));
    pairs.sort_unstable_by_key(|&(i, _)| i);
    Some(pairs.into_iter().unzip())
}

fn full_support(y: &DVector<f64>) -> Vec<usize> {
    (0..y.len()).filter(|&i| y[i] != 0.0).collect()
}

/// Support of `y` cut at the largest relative drop in sorted magnitudes,
/// if that drop exceeds `GAP_RATIO`. Returns sorted indices.
fn gap_support(y: &DVector<f64>) -> Option<Vec<usize>> {
    let mut idx = full_support(y);
    idx.sort_by(|&i, &j| y[j].abs().total_cmp(&y[i].abs()));
    let (mut best, mut cut) = (GAP_RATIO, None);
    for k in 1..idx.len() {
        let r = y[idx[k - 1]].abs() / y[idx[k]].abs();
        if r > best {
            best = r;
            cut = Some(k);
        }
    }
    let mut top = idx[..cut?].to_vec();
    top.sort_unstable();
    Some(top)
}

/// Faces tried by the certificate, with their factorizations kept while
/// the supports and signs are unchanged.
#[derive(Default)]
struct FaceCache {
    faces: Vec<Face>,
    /// Face with a relaxed certificate at consecutive checks, and the count.
    near: Option<(Vec<usize>, usize)>,
}

impl FaceCache {
    const SLOTS: usize = 4;

    fn get(&mut self, p: &AffineProjector, support: Vec<usize>, signs: Vec<f64>) -> Option<&Face> {
        if let Some(pos) = self
            .faces
            .iter()
            .position(|f| f.support == support && f.signs == signs)
        {
            return self.faces.get(pos);
        }
        let face = Face::build(p, support, signs)?;
        if self.faces.len() == Self::SLOTS {
            self.faces.remove(0);
        }
        self.faces.push(face);
        self.faces.last()
    }
}

/// Early exit: polish on a face of `y` and look for a KKT certificate.
/// Faces tried are the full support of `y`, its cut at the largest
/// magnitude gap and, for the linear subproblem, its padding to `m`
/// indices. Linear subproblems only look at faces of at most `m` indices
/// (vertices); the proximal one allows up to `4m`. A relaxed certificate
/// is accepted once the same face has passed it `NEAR_STREAK` checks in a
/// row.
fn certify(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    state: &mut InnerState,
    cache: &mut FaceCache,
) -> bool {
    let m = p.rows();
    let max_width = if sub.beta > 0.0 { 4 * m } else { m };
    let full = full_support(&state.y);
    let full_signs = signs_of(&state.y, &full);
    let mut faces = Vec::with_capacity(3);
    if let Some(gap) = gap_support(&state.y) {
        let signs = signs_of(&state.y, &gap);
        faces.push((gap, signs));
    }
    if sub.beta == 0.0 {
        faces.extend(padded_face(&state.u, &full, &full_signs, m));
    }
    faces.insert(0, (full, full_signs));
    let mut near = None;
    for (support, signs) in faces {
        if support.len() > max_width {
            continue;
        }
        let streak = match &cache.near {
            Some((s, k)) if *s == support => *k,
            _ => 0,
        };
        let Some(face) = cache.get(p, support.clone(), signs) else {
            continue;
        };
        match certify_on(p, sub, state, face, streak + 1 >= NEAR_STREAK) {
            Verdict::Certified => return true,
            Verdict::Near if streak + 1 >= NEAR_STREAK => return true,
            Verdict::Near => {
                if near.is_none() {
                    near = Some((support, streak + 1));
                }
            }
            Verdict::Rejected => {}
        }
    }
    cache.near = near;
    false
}

enum Verdict {
    /// Certificate within `CERTIFY_TOL`.
    Certified,
    /// Certificate within `NEAR_TOL` only.
    Near,
    Rejected,
}

/// Checks the face candidate and, when certified, moves the state there.
/// `accept_near` also accepts the relaxed certificate.
fn certify_on(
    p: &AffineProjector,
    sub: &Subproblem<'_>,
    state: &mut InnerState,
    face: &Face,
    accept_near: bool,
) -> Verdict {
    let Some(x) = face.candidate(p, sub, &state.y) else {
        return Verdict::Rejected;
    };
    let mut v = sub.c.clone();
    if sub.beta > 0.0 {
        v.axpy(-sub.beta, &x, 1.0);
        v.axpy(sub.beta, sub.anchor, 1.0);
    }
    let a = p.matrix().as_matrix();
    let mut lambda0 = a * (&v - &state.u);
    p.solve_gram_mut(&mut lambda0);
    let Some(lambda) = face.multiplier(p, &v, lambda0) else {
        return Verdict::Rejected;
    };
    let mut q = v;
    q.gemv_tr(-1.0, a, &lambda, 1.0);
    let mut on_face = vec![false; q.len()];
    let mut fe: f64 = 0.0;
    for (&i, &sg) in face.support.iter().zip(&face.signs) {
        on_face[i] = true;
        fe = fe.max((q[i] - sg).abs());
    }
    if fe > CERTIFY_TOL {
        return Verdict::Rejected;
    }
    let excess = q
        .iter()
        .zip(&on_face)
        .filter(|(_, &f)| !f)
        .map(|(qi, _)| qi.abs() - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if excess <= CERTIFY_TOL {
        Verdict::Certified
    } else if excess <= NEAR_TOL {
        Verdict::Near
    } else {
        return Verdict::Rejected;
    };
    if matches!(verdict, Verdict::Certified) || accept_near {
        state.x.copy_from(&x);
        state.y.copy_from(&x);
        state.u.copy_from(&q.map(|t| t.clamp(-1.0, 1.0)));
    }
    verdict
}

/// Fallback after residual convergence: take the face minimizer whenever it
/// does not raise the objective.
fn polish(p: &AffineProjector, sub: &Subproblem<'_>, state: &mut InnerState) -> bool {
    let Some(face) = Face::of(p, &state.y) else {
        return false;
    };
    let Some(candidate) = face.candidate(p, sub, &state.y) else {
        return false;
    };
    let f_admm = sub.objective(&state.x);
    let f_pol = sub.objective(&candidate);
    if f_pol <= f_admm + 1e-12 * f_admm.abs().max(1.0) {
        state.x.copy_from(&candidate);
        state.y.copy_from(&candidate);
        true
    } else {
        false
    }
}
