use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::function::{FunctionSpec, SourceSpec};
use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// Allowed mismatch between `h` and the boundary data at the corners.
pub const CORNER_TOLERANCE: f64 = 1e-8;

/// Data of the direct problem `u_t - a(t) u_xx = f` on `[0, pi]` with
/// `u(0,t) = u1(t)`, `u(pi,t) = u2(t)`, `u(x,0) = h(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub u1: FunctionSpec,
    pub u2: FunctionSpec,
    pub h: FunctionSpec,
    pub f: SourceSpec,
    /// Coefficient used only when synthesizing data.
    pub a_true: Option<FunctionSpec>,
    /// Lower bound `a0 > 0` on admissible coefficients.
    pub a_floor: f64,
}

impl ProblemSpec {
    pub fn new(
        u1: FunctionSpec,
        u2: FunctionSpec,
        h: FunctionSpec,
        f: SourceSpec,
        a_true: Option<FunctionSpec>,
        a_floor: f64,
    ) -> Result<Self> {
        let spec = Self {
            u1,
            u2,
            h,
            f,
            a_true,
            a_floor,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Homogeneous boundary data, given `h`, `f` and an optional true coefficient.
    pub fn homogeneous(h: FunctionSpec, f: SourceSpec, a_true: Option<FunctionSpec>) -> Result<Self> {
        Self::new(FunctionSpec::zero(), FunctionSpec::zero(), h, f, a_true, 1e-6)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_floor.is_finite() && self.a_floor > 0.0) {
            return Err(Error::InvalidSpec(format!("a_floor must be > 0, got {}", self.a_floor)));
        }
        self.u1.validate()?;
        self.u2.validate()?;
        self.h.validate()?;
        for term in &self.f.terms {
            term.space.validate()?;
            term.time.validate()?;
        }
        if let Some(a) = &self.a_true {
            a.validate()?;
        }
        self.h.check_domain(0.0, PI, "h")?;
        let left = (self.h.eval(0.0) - self.u1.eval(0.0)).abs();
        if !(left <= CORNER_TOLERANCE) {
            return Err(Error::InvalidSpec(format!(
                "corner mismatch at x = 0: |h(0) - u1(0)| = {left:e}"
            )));
        }
        let right = (self.h.eval(PI) - self.u2.eval(0.0)).abs();
        if !(right <= CORNER_TOLERANCE) {
            return Err(Error::InvalidSpec(format!(
                "corner mismatch at x = pi: |h(pi) - u2(0)| = {right:e}"
            )));
        }
        Ok(())
    }

    /// Checks `a_true >= a_floor` on every node of `grid`.
    pub fn check_coefficient(&self, grid: &TimeGrid) -> Result<()> {
        let Some(a) = &self.a_true else {
            return Err(Error::Coefficient("no true coefficient given".into()));
        };
        check_coefficient_floor(a, grid, self.a_floor)
    }
}

pub(crate) fn check_coefficient_floor(a: &FunctionSpec, grid: &TimeGrid, floor: f64) -> Result<()> {
    a.check_domain(0.0, grid.t_max(), "a")
        .map_err(|e| Error::Coefficient(e.to_string()))?;
    for (i, t) in grid.nodes().enumerate() {
        let value = a.eval(t);
        if !(value >= floor && value > 0.0) {
            return Err(Error::Coefficient(format!(
                "a({t}) = {value} at node {i} is below the floor {floor}"
            )));
        }
    }
    Ok(())
}
