//! Recovery of a time-dependent diffusion coefficient `a(t)` in
//! `u_t - a(t) u_xx = f(x, t)` on `[0, pi]` from Dirichlet data, the initial
//! profile and the boundary flux `g(t) = u_x(0, t)`.
//!
//! * [`model`]: problem data, grids, assumption checks.
//! * [`spectral`]: sine coefficients, the boundary lift, the flux kernels
//!   `Q0` and `Q` and the inversion of `Q0`.
//! * [`forward`]: flux synthesis for a known coefficient and a
//!   Crank–Nicolson reference solver.
//! * [`inverse`]: fixed-point recovery of `A = int a`, the closed-form
//!   special case and contraction diagnostics.

pub mod error;
pub mod forward;
pub mod inverse;
pub mod model;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use forward::{
    accumulate_a, fd_solve, reconstruct_u, solve_modes, synthesize, synthesize_flux, FieldSnapshot, ModeTrajectory,
    Synthesis,
};
pub use inverse::{
    closed_form_recover, contraction_estimate, differentiate, fixed_point_solve, ClampPolicy, ContractionReport,
    InverseResult, Method, Relaxation, SolverOptions,
};
pub use model::{
    build_time_grid, compatibility_check, validate_assumptions, AssumptionReport, FluxData, FunctionSpec, ProblemSpec,
    SourceSpec, TimeGrid, TimeSeries, Verdict,
};
pub use spectral::{eval_q, eval_q0, invert_q0, lift, sine_coefficients, LiftedProblem, ModeData};
