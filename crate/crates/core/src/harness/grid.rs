use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;

use super::outcome::{classify, Classification, TrialOutcome, SUCCESS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{l1_norm, l2_norm, ratio_objective};
use crate::problem::{gen_instance, ValueMode};
use crate::solvers::{solve, Scheme, SolverConfig, Status};

/// A2's `(β, ρ)` for one value regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    pub beta: f64,
    pub rho: f64,
}

/// Cartesian grid of experiment cells, each run for `trials` instances.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub m: usize,
    pub n: usize,
    pub sparsities: Vec<usize>,
    pub coherences: Vec<f64>,
    pub modes: Vec<ValueMode>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub base_seed: u64,
    pub success_tol: f64,
    pub gaussian: RegimeParams,
    pub dynamic: RegimeParams,
}

impl GridSpec {
    /// 64×1024 instances, 20 trials per cell, base seed 0, regime defaults
    /// from [`SolverConfig::for_regime`].
    pub fn new(
        sparsities: Vec<usize>,
        coherences: Vec<f64>,
        modes: Vec<ValueMode>,
        schemes: Vec<Scheme>,
    ) -> Self {
        let g = SolverConfig::for_regime(Scheme::A2, ValueMode::Gaussian);
        let d = SolverConfig::for_regime(Scheme::A2, ValueMode::DynamicRange(1.0));
        Self {
            m: 64,
            n: 1024,
            sparsities,
            coherences,
            modes,
            schemes,
            trials: 20,
            base_seed: 0,
            success_tol: SUCCESS_TOL,
            gaussian: RegimeParams {
                beta: g.beta,
                rho: g.rho,
            },
            dynamic: RegimeParams {
                beta: d.beta,
                rho: d.rho,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("sparsities", self.sparsities.is_empty()),
            ("coherences", self.coherences.is_empty()),
            ("modes", self.modes.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::InvalidConfig(format!("{name} list is empty")));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if self.m == 0 || self.m > self.n {
            return Err(Error::InvalidConfig(format!(
                "need 0 < m <= n, got m={}, n={}",
                self.m, self.n
            )));
        }
        if !(self.success_tol > 0.0 && self.success_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "success_tol must be positive, got {}",
                self.success_tol
            )));
        }
        if let Some(f) = self
            .coherences
            .iter()
            .find(|f| !(**f > 0.0 && f.is_finite()))
        {
            return Err(Error::InvalidConfig(format!(
                "coherence factor must be positive, got {f}"
            )));
        }
        for scheme in &self.schemes {
            for mode in &self.modes {
                self.solver_config(*scheme, *mode).validate()?;
            }
        }
        Ok(())
    }

    /// Solver settings for one scheme under one value regime.
    pub fn solver_config(&self, scheme: Scheme, mode: ValueMode) -> SolverConfig {
        let mut cfg = SolverConfig::new(scheme);
        let regime = if mode.is_gaussian() {
            self.gaussian
        } else {
            self.dynamic
        };
        cfg.beta = regime.beta;
        cfg.rho = regime.rho;
        cfg
    }

    fn instance_keys(&self) -> Vec<(ValueMode, f64, usize)> {
        let mut keys = Vec::new();
        for &mode in &self.modes {
            for &f in &self.coherences {
                for &s in &self.sparsities {
                    keys.push((mode, f, s));
                }
            }
        }
        keys
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub sparsity: usize,
    pub coherence: f64,
    pub mode: ValueMode,
    pub scheme: Scheme,
}

/// One trial of one cell. `outcome` holds the generation or
/// classification error when the trial could not be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub outcome: Result<TrialOutcome>,
    pub x_norm: f64,
    pub truth_norm: f64,
    pub final_alpha: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatusCounts {
    pub converged: usize,
    pub max_iterations: usize,
    pub unbounded: usize,
    pub inner_failure: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub key: CellKey,
    pub trials: Vec<TrialRecord>,
}

impl CellReport {
    fn scored(&self) -> impl Iterator<Item = (&TrialRecord, &TrialOutcome)> {
        self.trials
            .iter()
            .filter_map(|t| t.outcome.as_ref().ok().map(|o| (t, o)))
    }

    /// Trials that produced an outcome.
    pub fn completed(&self) -> usize {
        self.scored().count()
    }

    pub fn errors(&self) -> Vec<(usize, &Error)> {
        self.trials
            .iter()
            .filter_map(|t| t.outcome.as_ref().err().map(|e| (t.trial, e)))
            .collect()
    }

    fn rate(&self, class: Classification) -> f64 {
        let n = self.completed();
        if n == 0 {
            return f64::NAN;
        }
        self.scored()
            .filter(|(_, o)| o.classification == class)
            .count() as f64
            / n as f64
    }

    /// Rates are over completed trials, so the three sum to one.
    pub fn success_rate(&self) -> f64 {
        self.rate(Classification::Success)
    }

    pub fn model_failure_rate(&self) -> f64 {
        self.rate(Classification::ModelFailure)
    }

    pub fn algorithm_failure_rate(&self) -> f64 {
        self.rate(Classification::AlgorithmFailure)
    }

    fn mean_of(&self, f: impl Fn(&TrialRecord, &TrialOutcome) -> f64) -> f64 {
        let v: Vec<f64> = self.scored().map(|(t, o)| f(t, o)).collect();
        mean(&v)
    }

    pub fn relerr_mean(&self) -> f64 {
        self.mean_of(|_, o| o.rel_error)
    }

    /// Population standard deviation of the relative error.
    pub fn relerr_std(&self) -> f64 {
        let v: Vec<f64> = self.scored().map(|(_, o)| o.rel_error).collect();
        let mu = mean(&v);
        mean(&v.iter().map(|x| (x - mu).powi(2)).collect::<Vec<_>>()).sqrt()
    }

    pub fn time_mean_s(&self) -> f64 {
        self.mean_of(|_, o| o.wall_time.as_secs_f64())
    }

    pub fn xnorm_mean(&self) -> f64 {
        self.mean_of(|t, _| t.x_norm)
    }

    pub fn gtnorm_mean(&self) -> f64 {
        self.mean_of(|t, _| t.truth_norm)
    }

    pub fn status_counts(&self) -> StatusCounts {
        let mut c = StatusCounts::default();
        for (_, o) in self.scored() {
            match o.solver_status {
                Some(Status::Converged) => c.converged += 1,
                Some(Status::MaxIterations) => c.max_iterations += 1,
                Some(Status::Unbounded) => c.unbounded += 1,
                Some(Status::InnerFailure) => c.inner_failure += 1,
                None => {}
            }
        }
        c
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Cells in grid order: value mode, coherence, sparsity, scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub cells: Vec<CellReport>,
}

pub const CSV_HEADER: &str =
    "s,F,D_flag,scheme,trials,success_rate,model_failure_rate,algorithm_failure_rate,\
relerr_mean,relerr_std,time_mean_s,xnorm_mean,gtnorm_mean";

impl ExperimentReport {
    pub fn cell(
        &self,
        sparsity: usize,
        coherence: f64,
        mode: ValueMode,
        scheme: Scheme,
    ) -> Option<&CellReport> {
        let key = CellKey {
            sparsity,
            coherence,
            mode,
            scheme,
        };
        self.cells.iter().find(|c| c.key == key)
    }

    /// One row per cell under [`CSV_HEADER`]; `trials` is the number of
    /// completed trials.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
                c.key.sparsity,
                c.key.coherence,
                c.key.mode.label(),
                c.key.scheme,
                c.completed(),
                c.success_rate(),
                c.model_failure_rate(),
                c.algorithm_failure_rate(),
                c.relerr_mean(),
                c.relerr_std(),
                c.time_mean_s(),
                c.xnorm_mean(),
                c.gtnorm_mean(),
            )?;
        }
        Ok(())
    }

    /// The sub-report of one value mode, in grid order.
    pub fn for_mode(&self, mode: ValueMode) -> ExperimentReport {
        ExperimentReport {
            cells: self
                .cells
                .iter()
                .filter(|c| c.key.mode == mode)
                .cloned()
                .collect(),
        }
    }
}

/// Objective a scheme is judged by: the ratio for the L1/L2 schemes, the
/// L1 norm for basis pursuit.
pub fn scheme_objective(scheme: Scheme) -> fn(&DVector<f64>) -> Result<f64> {
    if scheme.is_ratio_model() {
        ratio_objective
    } else {
        |x| Ok(l1_norm(x))
    }
}

/// Runs every cell of `spec` on the current rayon pool.
///
/// Trial `i` of an `(s, F, mode)` triple uses instance seed
/// `base_seed + i`, and all schemes see the same instance. Jobs are
/// collected in grid order, so the report does not depend on scheduling;
/// only wall times vary between runs. Per-trial errors are recorded in the
/// trial, never returned.
pub fn run_grid(spec: &GridSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let keys = spec.instance_keys();
    let jobs: Vec<(usize, usize)> = (0..keys.len())
        .flat_map(|k| (0..spec.trials).map(move |t| (k, t)))
        .collect();
    let results: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(k, trial)| {
            let (mode, f, s) = keys[k];
            run_trial(spec, mode, f, s, trial)
        })
        .collect();

    let mut cells = Vec::with_capacity(keys.len() * spec.schemes.len());
    for (k, &(mode, coherence, sparsity)) in keys.iter().enumerate() {
        for (j, &scheme) in spec.schemes.iter().enumerate() {
            let trials = (0..spec.trials)
                .map(|t| results[k * spec.trials + t][j].clone())
                .collect();
            cells.push(CellReport {
                key: CellKey {
                    sparsity,
                    coherence,
                    mode,
                    scheme,
                },
                trials,
            });
        }
    }
    Ok(ExperimentReport { cells })
}

/// All schemes of the grid on one instance, in scheme order.
fn run_trial(spec: &GridSpec, mode: ValueMode, f: f64, s: usize, trial: usize) -> Vec<TrialRecord> {
    let seed = spec.base_seed.wrapping_add(trial as u64);
    let failed = |e: Error| TrialRecord {
        trial,
        seed,
        outcome: Err(e),
        x_norm: f64::NAN,
        truth_norm: f64::NAN,
        final_alpha: f64::NAN,
    };
    let instance = gen_instance(spec.m, spec.n, s, f, mode, seed)
        .and_then(|inst| Ok((inst.projector()?, inst)));
    let (p, inst) = match instance {
        Ok(v) => v,
        Err(e) => return spec.schemes.iter().map(|_| failed(e.clone())).collect(),
    };
    spec.schemes
        .iter()
        .map(|&scheme| {
            let result = solve(&p, &spec.solver_config(scheme, mode));
            let outcome = classify(
                scheme_objective(scheme),
                &inst.x_true,
                &result.x_star,
                spec.success_tol,
            )
            .map(|mut o| {
                o.solver_status = Some(result.status);
                o.wall_time = result.wall_time;
                o
            });
            TrialRecord {
                trial,
                seed,
                outcome,
                x_norm: l2_norm(&result.x_star),
                truth_norm: l2_norm(&inst.x_true),
                final_alpha: result.final_alpha(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> GridSpec {
        let mut spec = GridSpec::new(
            vec![2, 4],
            vec![1.0],
            vec![ValueMode::Gaussian],
            vec![Scheme::L1Bp, Scheme::A1],
        );
        spec.m = 16;
        spec.n = 64;
        spec.trials = 3;
        spec.base_seed = 11;
        spec
    }

    #[test]
    fn report_is_deterministic_and_partitioned() {
        let spec = small_spec();
        let a = run_grid(&spec).unwrap();
        let b = run_grid(&spec).unwrap();
        assert_eq!(a.cells.len(), 4);
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.key, y.key);
            assert_eq!(x.success_rate(), y.success_rate());
            assert_eq!(x.relerr_mean(), y.relerr_mean());
            assert_eq!(x.xnorm_mean(), y.xnorm_mean());
            let total = x.success_rate() + x.model_failure_rate() + x.algorithm_failure_rate();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_errors_stay_in_their_cell() {
        let mut spec = small_spec();
        spec.sparsities = vec![2, 40];
        let r = run_grid(&spec).unwrap();
        let bad = r.cell(40, 1.0, ValueMode::Gaussian, Scheme::A1).unwrap();
        assert_eq!(bad.completed(), 0);
        assert!(matches!(
            bad.errors()[0].1,
            Error::InfeasibleSeparation { .. }
        ));
        assert_eq!(
            r.cell(2, 1.0, ValueMode::Gaussian, Scheme::A1)
                .unwrap()
                .completed(),
            3
        );
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let r = run_grid(&small_spec()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("2,1,G,l1bp,3,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 13));
    }

    #[test]
    fn empty_lists_rejected() {
        let mut spec = small_spec();
        spec.schemes.clear();
        assert!(matches!(run_grid(&spec), Err(Error::InvalidConfig(_))));
    }
}
