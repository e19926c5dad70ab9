use super::grid::{run_grid, ExperimentReport, GridSpec};
use crate::error::Result;
use crate::problem::ValueMode;
use crate::solvers::Scheme;

/// Solution and ground-truth norms of one `(scheme, F, s)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessRow {
    pub scheme: Scheme,
    pub coherence: f64,
    pub sparsity: usize,
    pub trials: usize,
    /// Trials that ended with an `Unbounded` status.
    pub unbounded: usize,
    pub xnorm_mean: f64,
    pub xnorm_max: f64,
    pub gtnorm_mean: f64,
}

impl BoundednessRow {
    pub fn all_finite(&self) -> bool {
        self.xnorm_max.is_finite()
    }
}

/// Mean `‖x_star‖₂` against mean `‖x_true‖₂` on Gaussian-valued
/// instances over the `coherences × sparsities` grid. Every scheme runs on
/// the same instances.
pub fn boundedness_probe(
    schemes: &[Scheme],
    coherences: &[f64],
    sparsities: &[usize],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<BoundednessRow>> {
    let mut spec = GridSpec::new(
        sparsities.to_vec(),
        coherences.to_vec(),
        vec![ValueMode::Gaussian],
        schemes.to_vec(),
    );
    spec.trials = trials;
    spec.base_seed = base_seed;
    Ok(rows(&run_grid(&spec)?))
}

/// Boundedness rows of an existing report.
pub fn rows(report: &ExperimentReport) -> Vec<BoundednessRow> {
    report
        .cells
        .iter()
        .map(|c| BoundednessRow {
            scheme: c.key.scheme,
            coherence: c.key.coherence,
            sparsity: c.key.sparsity,
            trials: c.completed(),
            unbounded: c.status_counts().unbounded,
            xnorm_mean: c.xnorm_mean(),
            xnorm_max: c
                .trials
                .iter()
                .filter(|t| t.outcome.is_ok())
                .map(|t| t.x_norm)
                .fold(f64::NEG_INFINITY, |a, b| {
                    if b.is_nan() {
                        f64::INFINITY
                    } else {
                        a.max(b)
                    }
                }),
            gtnorm_mean: c.gtnorm_mean(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_well_separated_cells_match_truth() {
        let rows = boundedness_probe(&[Scheme::A1], &[1.0], &[2], 2, 3).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!((r.trials, r.unbounded), (2, 0));
        assert!(r.all_finite());
        assert!((r.xnorm_mean - r.gtnorm_mean).abs() < 1e-6 * r.gtnorm_mean);
    }
}
