//! Problem data, discretization grids and assumption checks.

mod assumptions;
mod function;
mod grid;
mod problem;

pub use assumptions::{
    assess, compatibility_check, corrected_flux, initial_flux, nonnegativity_verdict, positivity_verdict,
    validate_assumptions, validate_assumptions_with, AssumptionOptions, AssumptionReport, Verdict, TRUNCATION_WARNING,
};
pub use function::{FunctionSpec, SampleTable, SineTerm, SourceSpec, SourceTerm};
pub use grid::{FluxData, TimeGrid, TimeSeries};
pub use problem::{ProblemSpec, CORNER_TOLERANCE};

pub(crate) use problem::check_coefficient_floor;

/// Uniform grid of `n + 1` nodes on `[0, t_max]`.
pub fn build_time_grid(t_max: f64, n: usize) -> crate::Result<TimeGrid> {
    TimeGrid::new(t_max, n)
}
