//! Seeded experiment runs: outcome classification, grids of cells with
//! aggregate statistics and CSV export, a brute-force oracle for tiny
//! instances, and the solution-norm probe.

mod grid;
mod oracle;
mod outcome;
mod probe;

pub use grid::{
    run_grid, scheme_objective, CellKey, CellReport, ExperimentReport, GridSpec, RegimeParams,
    StatusCounts, TrialRecord, CSV_HEADER,
};
pub use oracle::{gaussian_instance, nullspace_oracle, OracleParams};
pub use outcome::{classify, Classification, TrialOutcome, SUCCESS_TOL, TIE_TOL};
pub use probe::{boundedness_probe, rows as boundedness_rows, BoundednessRow};
