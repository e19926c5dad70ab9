//! Experiment configuration: a flat TOML file, then flag overrides.

use std::path::{Path, PathBuf};

use ratio_sparse::harness::{GridSpec, RegimeParams, SUCCESS_TOL};
use ratio_sparse::{Error, Result, Scheme, SolverConfig, ValueMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub m: usize,
    pub n: usize,
    pub sparsities: Vec<usize>,
    pub coherences: Vec<f64>,
    /// `gaussian` or a dynamic-range exponent such as `D3`.
    pub modes: Vec<String>,
    pub schemes: Vec<String>,
    pub trials: usize,
    pub base_seed: u64,
    pub success_tol: f64,
    pub beta_gaussian: f64,
    pub rho_gaussian: f64,
    pub beta_dynamic: f64,
    pub rho_dynamic: f64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 means available parallelism.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let g = SolverConfig::for_regime(Scheme::A2, ValueMode::Gaussian);
        let d = SolverConfig::for_regime(Scheme::A2, ValueMode::DynamicRange(1.0));
        Self {
            m: 64,
            n: 1024,
            sparsities: vec![2, 6, 10, 14, 18, 22],
            coherences: vec![1.0, 20.0],
            modes: vec!["gaussian".into()],
            schemes: vec!["bs".into(), "a1".into(), "a2".into()],
            trials: 20,
            base_seed: 0,
            success_tol: SUCCESS_TOL,
            beta_gaussian: g.beta,
            rho_gaussian: g.rho,
            beta_dynamic: d.beta,
            rho_dynamic: d.rho,
            out_dir: PathBuf::from("results"),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn value_modes(&self) -> Result<Vec<ValueMode>> {
        self.modes.iter().map(|s| s.parse()).collect()
    }

    pub fn scheme_list(&self) -> Result<Vec<Scheme>> {
        self.schemes.iter().map(|s| s.parse()).collect()
    }

    /// Validated grid; every field is checked before any work starts.
    pub fn to_grid(&self) -> Result<GridSpec> {
        let mut spec = GridSpec::new(
            self.sparsities.clone(),
            self.coherences.clone(),
            self.value_modes()?,
            self.scheme_list()?,
        );
        spec.m = self.m;
        spec.n = self.n;
        spec.trials = self.trials;
        spec.base_seed = self.base_seed;
        spec.success_tol = self.success_tol;
        spec.gaussian = RegimeParams {
            beta: self.beta_gaussian,
            rho: self.rho_gaussian,
        };
        spec.dynamic = RegimeParams {
            beta: self.beta_dynamic,
            rho: self.rho_dynamic,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Pool size: the flag, then `RATIO_SPARSE_THREADS`, then available
/// parallelism. Zero or unparsable values fall through.
pub fn resolve_threads(flag: usize) -> usize {
    if flag > 0 {
        return flag;
    }
    std::env::var("RATIO_SPARSE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}
