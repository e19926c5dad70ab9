//! Test-instance generation: oversampled DCT dictionaries, separated
//! supports, and Gaussian or dynamic-range nonzeros.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{AffineProjector, DenseMatrix};

/// Seeded random stream backed by ChaCha8.
///
/// ChaCha output is specified bit-for-bit, so a seed names the same
/// instance on every platform. Trial `i` of an experiment with base seed
/// `s` uses the stream seeded with `s + i` (wrapping).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn for_trial(base_seed: u64, trial: u64) -> Self {
        Self::new(base_seed.wrapping_add(trial))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub(crate) fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Distribution of the nonzero entries of the ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueMode {
    /// i.i.d. standard normal.
    Gaussian,
    /// `sign(randn)·10^(D·rand)`; magnitudes span at most `10^D`.
    DynamicRange(f64),
}

impl ValueMode {
    /// Short label used in file headers and report rows: `G` or the value of `D`.
    pub fn label(&self) -> String {
        match self {
            ValueMode::Gaussian => "G".to_string(),
            ValueMode::DynamicRange(d) => format!("{d}"),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, ValueMode::Gaussian)
    }
}

impl fmt::Display for ValueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueMode::Gaussian => write!(f, "gaussian"),
            ValueMode::DynamicRange(d) => write!(f, "D={d}"),
        }
    }
}

impl std::str::FromStr for ValueMode {
    type Err = Error;

    /// Accepts `gaussian`/`G`, `D=3`, `D3` or a bare exponent `3`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("gaussian") || t.eq_ignore_ascii_case("g") {
            return Ok(ValueMode::Gaussian);
        }
        let digits = t
            .strip_prefix("D=")
            .or_else(|| t.strip_prefix("d="))
            .or_else(|| t.strip_prefix('D'))
            .or_else(|| t.strip_prefix('d'))
            .unwrap_or(t);
        match digits.parse::<f64>() {
            Ok(d) if d >= 0.0 && d.is_finite() => Ok(ValueMode::DynamicRange(d)),
            _ => Err(Error::InvalidConfig(format!("unknown value mode '{s}'"))),
        }
    }
}

/// Generation parameters recorded with every instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceMeta {
    pub coherence: f64,
    pub sparsity: usize,
    pub value_mode: ValueMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub b: DVector<f64>,
    pub x_true: DVector<f64>,
    pub meta: InstanceMeta,
}

impl ProblemInstance {
    pub fn projector(&self) -> Result<AffineProjector> {
        AffineProjector::new(self.a.clone(), self.b.clone())
    }

    /// Indices of the nonzero entries of `x_true` (0-based).
    pub fn support(&self) -> Vec<usize> {
        self.x_true
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Columns `a_j = cos(2π·w·j/F)/√m`, `j = 1..n`, with one `w ~ U[0,1)^m`
/// shared by all columns. Larger `F` gives a more coherent matrix.
pub fn build_oversampled_dct(
    m: usize,
    n: usize,
    coherence: f64,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidConfig("m and n must be positive".into()));
    }
    if !(coherence > 0.0 && coherence.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "coherence factor must be positive, got {coherence}"
        )));
    }
    let w: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
    let scale = 1.0 / (m as f64).sqrt();
    let two_pi = 2.0 * std::f64::consts::PI;
    let a = DMatrix::from_fn(m, n, |i, j| {
        scale * (two_pi * w[i] * (j + 1) as f64 / coherence).cos()
    });
    DenseMatrix::new(a)
}

/// Minimum index gap for coherence factor `F`: `ceil(2F)`, at least 1.
pub fn separation_gap(coherence: f64) -> usize {
    ((2.0 * coherence).ceil() as usize).max(1)
}

/// Sorted 0-based support of size `s` in `0..n` with consecutive gaps at
/// least `ceil(2F)`, uniform over all such configurations.
///
/// Uses the gap transform: choose `s` distinct slots from the compressed
/// range `n − (s−1)(g−1)`, then stretch slot `k` by `k·(g−1)`.
pub fn gen_support(n: usize, s: usize, coherence: f64, rng: &mut RngStream) -> Result<Vec<usize>> {
    let gap = separation_gap(coherence);
    if s == 0 || s.saturating_mul(gap) > n {
        return Err(Error::InfeasibleSeparation { n, s, gap });
    }
    let compressed = n - (s - 1) * (gap - 1);
    let mut slots = rand::seq::index::sample(rng.inner(), compressed, s).into_vec();
    slots.sort_unstable();
    Ok(slots
        .into_iter()
        .enumerate()
        .map(|(k, c)| c + k * (gap - 1))
        .collect())
}

/// Nonzero values. Dynamic-range mode mirrors
/// `sign(randn(s,1)).*10.^(D*rand(s,1))`: all signs are drawn first, then
/// all exponents, with the exponent uniform on `[0, 1)`.
pub fn gen_values(s: usize, mode: ValueMode, rng: &mut RngStream) -> Vec<f64> {
    match mode {
        ValueMode::Gaussian => (0..s).map(|_| rng.normal()).collect(),
        ValueMode::DynamicRange(d) => {
            let signs: Vec<f64> = (0..s)
                .map(|_| if rng.normal() < 0.0 { -1.0 } else { 1.0 })
                .collect();
            signs
                .into_iter()
                .map(|sg| sg * 10f64.powf(d * rng.uniform()))
                .collect()
        }
    }
}

/// Matrix, then support, then values, all from one stream seeded by `seed`.
pub fn gen_instance(
    m: usize,
    n: usize,
    s: usize,
    coherence: f64,
    value_mode: ValueMode,
    seed: u64,
) -> Result<ProblemInstance> {
    let mut rng = RngStream::new(seed);
    let a = build_oversampled_dct(m, n, coherence, &mut rng)?;
    let support = gen_support(n, s, coherence, &mut rng)?;
    let values = gen_values(s, value_mode, &mut rng);
    let mut x_true = DVector::zeros(n);
    for (&i, v) in support.iter().zip(values) {
        x_true[i] = v;
    }
    let b = a.as_matrix() * &x_true;
    Ok(ProblemInstance {
        a,
        b,
        x_true,
        meta: InstanceMeta {
            coherence,
            sparsity: s,
            value_mode,
            seed,
        },
    })
}

/// `max|x_i|/min|x_i|` over the nonzero entries.
pub fn dynamic_range(x: &DVector<f64>) -> Option<f64> {
    let mags: Vec<f64> = x.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    if mags.is_empty() {
        return None;
    }
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    Some(max / min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_entries_bounded() {
        let mut rng = RngStream::new(3);
        let a = build_oversampled_dct(64, 1024, 10.0, &mut rng).unwrap();
        assert_eq!((a.rows(), a.cols()), (64, 1024));
        assert!(a.as_matrix().iter().all(|v| v.abs() <= 1.0 / 8.0 + 1e-15));
    }

    #[test]
    fn larger_f_is_more_coherent() {
        let low = build_oversampled_dct(64, 1024, 1.0, &mut RngStream::new(11)).unwrap();
        let high = build_oversampled_dct(64, 1024, 20.0, &mut RngStream::new(11)).unwrap();
        assert!(high.mutual_coherence() > low.mutual_coherence());
        assert!(high.mutual_coherence() > 0.99);
    }

    #[test]
    fn support_separation_paper_setting() {
        for seed in 0..50 {
            let idx = gen_support(1024, 15, 15.0, &mut RngStream::new(seed)).unwrap();
            assert_eq!(idx.len(), 15);
            assert!(idx.windows(2).all(|w| w[1] - w[0] >= 30));
            assert!(*idx.last().unwrap() < 1024);
        }
    }

    #[test]
    fn single_index_support() {
        let idx = gen_support(10, 1, 100.0, &mut RngStream::new(0));
        // s·ceil(2F) = 200 > 10
        assert!(idx.is_err());
        let idx = gen_support(10, 1, 0.2, &mut RngStream::new(0)).unwrap();
        assert_eq!(idx.len(), 1);
        assert!(idx[0] < 10);
    }

    #[test]
    fn infeasible_separation() {
        assert_eq!(
            gen_support(1024, 600, 15.0, &mut RngStream::new(0)),
            Err(Error::InfeasibleSeparation {
                n: 1024,
                s: 600,
                gap: 30
            })
        );
    }

    #[test]
    fn unit_dynamic_range() {
        let v = gen_values(50, ValueMode::DynamicRange(0.0), &mut RngStream::new(5));
        assert!(v.iter().all(|x| x.abs() == 1.0));
        assert!(v.iter().any(|x| *x < 0.0) && v.iter().any(|x| *x > 0.0));
    }

    #[test]
    fn deterministic_instances() {
        let a = gen_instance(16, 64, 3, 2.0, ValueMode::Gaussian, 42).unwrap();
        let b = gen_instance(16, 64, 3, 2.0, ValueMode::Gaussian, 42).unwrap();
        assert_eq!(a, b);
        let c = gen_instance(16, 64, 3, 2.0, ValueMode::Gaussian, 43).unwrap();
        assert_ne!(a.x_true, c.x_true);
        assert_eq!(a.support().len(), 3);
        assert_eq!((a.a.as_matrix() * &a.x_true - &a.b).norm(), 0.0);
    }

    #[test]
    fn value_mode_parsing() {
        assert_eq!(
            "gaussian".parse::<ValueMode>().unwrap(),
            ValueMode::Gaussian
        );
        assert_eq!(
            "D=3".parse::<ValueMode>().unwrap(),
            ValueMode::DynamicRange(3.0)
        );
        assert_eq!(
            "D5".parse::<ValueMode>().unwrap(),
            ValueMode::DynamicRange(5.0)
        );
        assert_eq!(
            "0".parse::<ValueMode>().unwrap(),
            ValueMode::DynamicRange(0.0)
        );
        assert!("D=-1".parse::<ValueMode>().is_err());
        assert!("laplace".parse::<ValueMode>().is_err());
    }
}
