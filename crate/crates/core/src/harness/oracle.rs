use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{ratio_objective, AffineProjector, DenseMatrix};
use crate::problem::{InstanceMeta, ProblemInstance, RngStream, ValueMode};

/// Search box, grid resolution and refinement depth of
/// [`nullspace_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    /// `None` means `10·‖least-norm point‖₂`.
    pub box_half_width: Option<f64>,
    pub grid_points: usize,
    pub refinement_levels: usize,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            box_half_width: None,
            grid_points: 201,
            refinement_levels: 4,
        }
    }
}

/// Box shrink factor between refinement levels.
const SHRINK: f64 = 5.0;

/// Brute-force minimum of `‖x‖₁/‖x‖₂` on `{Ax = b}` for `n − m ≤ 2`.
///
/// Writes `x = x_ln + N·t` with `x_ln` the least-norm point and `N` an
/// orthonormal null-space basis, scans `t` on a grid over the box, then
/// rescans boxes shrunk around the incumbent. The incumbent is a grid
/// point of every later level, so refinement never makes it worse.
pub fn nullspace_oracle(p: &AffineProjector, params: OracleParams) -> Result<(DVector<f64>, f64)> {
    let k = p.cols() - p.rows();
    if k > 2 {
        return Err(Error::DimensionTooLarge(k));
    }
    if params.grid_points < 2 {
        return Err(Error::InvalidConfig(
            "oracle needs at least 2 grid points per axis".into(),
        ));
    }
    let x0 = p.least_norm_point().clone();
    if k == 0 {
        let r = ratio_objective(&x0)?;
        return Ok((x0, r));
    }
    let basis: DMatrix<f64> = p.null_space_basis();
    let point = |t: &[f64]| {
        let mut x = x0.clone();
        for (j, &tj) in t.iter().enumerate() {
            x.axpy(tj, &basis.column(j), 1.0);
        }
        x
    };
    let mut half = params.box_half_width.unwrap_or(10.0 * x0.norm());
    if !(half > 0.0 && half.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "oracle box half-width must be positive, got {half}"
        )));
    }
    let g = params.grid_points;
    // keep the center on the grid
    let g = if g.is_multiple_of(2) { g + 1 } else { g };
    let mut center = vec![0.0; k];
    let mut best = ratio_objective(&x0)?;
    for _ in 0..=params.refinement_levels {
        let step = 2.0 * half / (g - 1) as f64;
        let offsets: Vec<f64> = (0..g).map(|i| -half + step * i as f64).collect();
        let mut incumbent = center.clone();
        let mut visit = |t: Vec<f64>| {
            if let Ok(r) = ratio_objective(&point(&t)) {
                if r < best {
                    best = r;
                    incumbent = t;
                }
            }
        };
        if k == 1 {
            for &o in &offsets {
                visit(vec![center[0] + o]);
            }
        } else {
            for &o0 in &offsets {
                for &o1 in &offsets {
                    visit(vec![center[0] + o0, center[1] + o1]);
                }
            }
        }
        center = incumbent;
        half /= SHRINK;
    }
    Ok((point(&center), best))
}

/// Instance with i.i.d. standard normal `A` and a dense standard normal
/// `x_true`, for oracle comparisons and square systems.
pub fn gaussian_instance(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    if m == 0 || m > n {
        return Err(Error::InvalidConfig(format!(
            "need 0 < m <= n, got m={m}, n={n}"
        )));
    }
    let mut rng = RngStream::new(seed);
    let a = DMatrix::from_fn(m, n, |_, _| rng.normal());
    let x_true = DVector::from_fn(n, |_, _| rng.normal());
    let b = &a * &x_true;
    Ok(ProblemInstance {
        a: DenseMatrix::new(a)?,
        b,
        x_true,
        meta: InstanceMeta {
            coherence: 0.0,
            sparsity: n,
            value_mode: ValueMode::Gaussian,
            seed,
        },
    })
}
