//! Recovery of `A(t) = int_0^t a` from flux data and of `a = A'`.
//!
//! Subtracting the lift flux from `g` leaves
//! `Q0(A(t)) + int_0^t Q(A(t) - A(s), s) ds = g~(t)`, a nonlinear Volterra
//! equation. Inverting the strictly decreasing `Q0` turns it into the fixed
//! point problem `A = Q0^{-1}(g~ - int_0^t Q(A(t) - A(s), s) ds)`, solved
//! either by global Picard sweeps or by marching node by node.

mod closed_form;
mod contraction;
mod differentiate;
mod fixed_point;

pub use closed_form::{
    check_closed_form_scenario, closed_form_coefficient, closed_form_recover, closed_form_recover_exact, CurveSamples,
};
pub use contraction::{contraction_estimate, ContractionReport};
pub use differentiate::differentiate;
pub use fixed_point::{fixed_point_map, fixed_point_solve, moving_average};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Update every node at once from the previous iterate.
    PicardGlobal,
    /// Converge each node before moving to the next one.
    VolterraMarching,
}

/// Treatment of negative kernel arguments `A(t_i) - A(t_j)` during iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClampPolicy {
    /// Evaluate `Q` at `z = 0` instead.
    ClampToZero,
    /// Replace each iterate by its running maximum.
    MonotoneProjection,
}

/// Damping of the fixed-point update `A <- A + w (T(A) - A)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relaxation {
    /// `w = 1`: plain Picard sweeps.
    None,
    /// Constant `w` in `(0, 1]`.
    Fixed(f64),
    /// Per node `w_i = 1 / (1 - dT_i/dA_i)`, cancelling the dependence of
    /// each node's update on its own value. Leaves the fixed point unchanged.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub modes: usize,
    /// Stopping tolerance on `sup |A_{n+1} - A_n|`.
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Relative tolerance passed to the `Q0` inversion.
    pub inversion_tol: f64,
    pub clamp_policy: ClampPolicy,
    pub relaxation: Relaxation,
    /// Width of a centered moving average applied to the flux; `None` or 1
    /// disables smoothing.
    pub smoothing_window: Option<usize>,
    /// Project right-hand sides above `Q0(0)` onto `z = 0` instead of
    /// reporting inconsistent data. Off by default.
    pub saturate: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            modes: 16,
            tol: 1e-12,
            max_iter: 200,
            method: Method::PicardGlobal,
            inversion_tol: 1e-15,
            clamp_policy: ClampPolicy::ClampToZero,
            relaxation: Relaxation::Diagonal,
            smoothing_window: None,
            saturate: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::Domain("solver.modes must be >= 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Domain("solver.tol must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("solver.max_iter must be >= 1".into()));
        }
        if !(self.inversion_tol > 0.0 && self.inversion_tol.is_finite()) {
            return Err(Error::Domain("solver.inversion_tol must be > 0".into()));
        }
        if let Relaxation::Fixed(w) = self.relaxation {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::Domain("solver.relaxation must lie in (0, 1]".into()));
            }
        }
        if self.smoothing_window == Some(0) {
            return Err(Error::Domain("solver.smoothing_window must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseResult {
    /// Recovered `A(t)`, with `A(0) = 0`.
    pub a_integral: TimeSeries,
    /// Recovered `a(t) = A'(t)`.
    pub a: TimeSeries,
    pub residual_history: Vec<f64>,
    /// `sup_i |Q0(A_i) + sum_j w_ij Q(A_i - A_j, t_j) - g~_i|`.
    pub equation_residual: f64,
    /// `sum_{j < i} max(0, A_j - A_i)`: how much the kernel arguments had
    /// to be clamped for the returned `A`.
    pub clamped_mass: f64,
    /// `|g~(0) - Q0(0)|`; zero for data compatible with the initial profile.
    pub initial_mismatch: f64,
    pub converged: bool,
    pub iterations_used: usize,
    pub method: Method,
}

impl InverseResult {
    /// Turns a non-converged result into [`Error::NotConverged`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations_used,
                residual: self.residual_history.last().copied().unwrap_or(f64::NAN),
            })
        }
    }
}

/// Serializes non-finite floats as strings so reports stay valid JSON.
pub(crate) fn serialize_float<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}
