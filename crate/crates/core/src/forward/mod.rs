//! Direct problem: spectral synthesis of the field and flux for a known
//! coefficient, plus a Crank–Nicolson solver used as an independent check.

mod fd;
mod modes;

pub use fd::{fd_solve, FdSolution};
pub use modes::{
    accumulate_a, accumulate_a_checked, reconstruct_u, solve_modes, synthesize, synthesize_flux, FieldSnapshot,
    ModeTrajectory, Synthesis,
};
