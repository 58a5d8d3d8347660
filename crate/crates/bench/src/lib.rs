//! Fixtures shared by the criterion benches.

use diffusivity_core::{synthesize, FunctionSpec, ProblemSpec, SourceSpec, Synthesis, TimeGrid};

/// `a(t) = 1 + 0.5 sin t`, `h = sin x + 0.25 sin 2x`, `f = exp(-t) sin x`.
pub fn varying_problem() -> ProblemSpec {
    let sin_x = FunctionSpec::sine_series(&[(1.0, 1)]).expect("valid series");
    ProblemSpec::homogeneous(
        FunctionSpec::sine_series(&[(1.0, 1), (0.25, 2)]).expect("valid series"),
        SourceSpec::separable(sin_x, FunctionSpec::exponential(1.0, 1.0)),
        Some(FunctionSpec::sinusoidal(1.0, 0.5, 1.0)),
    )
    .expect("valid problem")
}

pub fn synthesized(n: usize, modes: usize) -> (ProblemSpec, TimeGrid, Synthesis) {
    let spec = varying_problem();
    let grid = TimeGrid::new(1.0, n).expect("valid grid");
    let syn = synthesize(&spec, &grid, modes).expect("synthesis succeeds");
    (spec, grid, syn)
}
