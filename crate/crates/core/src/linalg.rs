//! Dense kernel: norms, the affine projector onto `{x : Ax = b}`, soft
//! shrinkage, and the ratio objective with its gradient surrogate.
//!
//! Problem sizes here top out around 64 x 1024, so everything is dense.
//! `AAᵀ` is factored once per projector and every projection afterwards is
//! two matrix-vector products and a pair of triangular solves.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Relative feasibility tolerance: `‖Ax − b‖₂ ≤ TOL_FEAS·‖b‖₂`.
pub const TOL_FEAS: f64 = 1e-10;

/// Relative pivot threshold for the Cholesky factor of `AAᵀ`, scaled by
/// `trace(AAᵀ)/m`.
pub const RANK_TOL: f64 = 1e-12;

/// A real `m x n` matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidMatrix(
                "matrix must have at least one row and column".into(),
            ));
        }
        if inner.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(Self { inner })
    }

    /// Builds from a row-major slice of length `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            out.extend(self.inner.row(i).iter().copied());
        }
        out
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(x, self.cols())?;
        Ok(&self.inner * x)
    }

    pub fn tr_mul_vec(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(y, self.rows())?;
        Ok(self.inner.tr_mul(y))
    }

    /// Largest absolute normalized inner product between distinct columns.
    pub fn mutual_coherence(&self) -> f64 {
        let norms: Vec<f64> = self.inner.column_iter().map(|c| c.norm()).collect();
        let gram = self.inner.tr_mul(&self.inner);
        let mut worst = 0.0f64;
        for j in 0..self.cols() {
            for i in 0..j {
                let denom = norms[i] * norms[j];
                if denom > 0.0 {
                    worst = worst.max(gram[(i, j)].abs() / denom);
                }
            }
        }
        worst
    }
}

pub(crate) fn check_len(v: &DVector<f64>, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

pub fn l1_norm(x: &DVector<f64>) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn l2_norm(x: &DVector<f64>) -> f64 {
    x.norm()
}

/// `‖x‖₁/‖x‖₂`, which lies in `[1, √n]` for every nonzero `x`.
pub fn ratio_objective(x: &DVector<f64>) -> Result<f64> {
    let l2 = x.norm();
    if l2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(l1_norm(x) / l2)
}

/// `−(‖x‖₁/‖x‖₂²)·x`, the gradient of the implicit function whose sum with
/// the constrained L1 term shares critical points with the ratio model.
pub fn grad_w(x: &DVector<f64>) -> Result<DVector<f64>> {
    let l2sq = x.norm_squared();
    if l2sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(x * (-l1_norm(x) / l2sq))
}

/// Componentwise `sign(v)·max(|v| − mu, 0)`.
pub fn shrink(v: &DVector<f64>, mu: f64) -> DVector<f64> {
    debug_assert!(mu >= 0.0);
    v.map(|t| shrink_scalar(t, mu))
}

#[inline]
pub(crate) fn shrink_scalar(t: f64, mu: f64) -> f64 {
    if t > mu {
        t - mu
    } else if t < -mu {
        t + mu
    } else {
        0.0
    }
}

/// Euclidean projector onto the affine set `{x : Ax = b}` with a cached
/// Cholesky factor of `AAᵀ`.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    a: DenseMatrix,
    b: DVector<f64>,
    gram: Cholesky<f64, Dyn>,
    least_norm: DVector<f64>,
    lipschitz: f64,
    b_norm: f64,
}

impl AffineProjector {
    pub fn new(a: DenseMatrix, b: DVector<f64>) -> Result<Self> {
        check_len(&b, a.rows())?;
        let b_norm = b.norm();
        if b_norm == 0.0 {
            return Err(Error::ZeroMeasurement);
        }
        let m = a.rows();
        let gram = a.as_matrix() * a.as_matrix().transpose();
        let tolerance = RANK_TOL * gram.trace() / m as f64;
        let chol = Cholesky::new(gram).ok_or(Error::RankDeficient {
            pivot: 0.0,
            tolerance,
        })?;
        let l = chol.l_dirty();
        for i in 0..m {
            let pivot = l[(i, i)] * l[(i, i)];
            if !(pivot >= tolerance) {
                return Err(Error::RankDeficient { pivot, tolerance });
            }
        }
        let mut w = b.clone();
        chol.solve_mut(&mut w);
        let least_norm = a.as_matrix().tr_mul(&w);
        let lipschitz = 1.0 / least_norm.norm();
        Ok(Self {
            a,
            b,
            gram: chol,
            least_norm,
            lipschitz,
            b_norm,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn rhs_norm(&self) -> f64 {
        self.b_norm
    }

    /// `Aᵀ(AAᵀ)⁻¹b`, the minimum-norm feasible point.
    pub fn least_norm_point(&self) -> &DVector<f64> {
        &self.least_norm
    }

    /// `1/‖Aᵀ(AAᵀ)⁻¹b‖₂`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `z − Aᵀ(AAᵀ)⁻¹(Az − b)`.
    pub fn project(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(z, self.cols())?;
        let mut out = z.clone();
        let mut scratch = DVector::zeros(self.rows());
        self.project_mut(&mut out, &mut scratch);
        Ok(out)
    }

    /// In-place projection; `scratch` must have length `m`.
    pub(crate) fn project_mut(&self, z: &mut DVector<f64>, scratch: &mut DVector<f64>) {
        let a = self.a.as_matrix();
        scratch.copy_from(&self.b);
        scratch.gemv(1.0, a, z, -1.0);
        self.gram.solve_mut(scratch);
        z.gemv_tr(-1.0, a, scratch, 1.0);
    }

    /// `w ← (AAᵀ)⁻¹w`.
    pub(crate) fn solve_gram_mut(&self, w: &mut DVector<f64>) {
        self.gram.solve_mut(w);
    }

    /// Projection onto the null space of `A` (the `b = 0` case).
    pub(crate) fn project_null_mut(&self, d: &mut DVector<f64>, scratch: &mut DVector<f64>) {
        let a = self.a.as_matrix();
        scratch.gemv(1.0, a, d, 0.0);
        self.gram.solve_mut(scratch);
        d.gemv_tr(-1.0, a, scratch, 1.0);
    }

    /// `‖Ax − b‖₂`.
    pub fn residual(&self, x: &DVector<f64>) -> Result<f64> {
        check_len(x, self.cols())?;
        Ok((self.a.as_matrix() * x - &self.b).norm())
    }

    /// `‖Ax − b‖₂/‖b‖₂`.
    pub fn relative_residual(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.residual(x)? / self.b_norm)
    }

    /// Orthonormal basis of the null space of `A`, one column per direction.
    pub fn null_space_basis(&self) -> DMatrix<f64> {
        let n = self.cols();
        let k = n - self.rows();
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut scratch = DVector::zeros(self.rows());
        for j in 0..n {
            if basis.len() == k {
                break;
            }
            let mut d = DVector::zeros(n);
            d[j] = 1.0;
            self.project_null_mut(&mut d, &mut scratch);
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dot(&d);
                    d.axpy(-proj, q, 1.0);
                }
            }
            let norm = d.norm();
            if norm > 1e-8 {
                basis.push(d / norm);
            }
        }
        DMatrix::from_columns(&basis)
    }
}
