//! Explicit recovery for the experiment `u1 = u2 = h = 0`, `f = p_1(x)`.
//!
//! The solution is `u = c(t) p_1(x)` with `c' + a c = 1`, `c(0) = 0`, and the
//! flux is `g = sqrt(2/pi) c`. Eliminating `c` gives
//! `a = (sqrt(2/pi) - g') / g`.

use serde::{Deserialize, Serialize};

use super::differentiate;
use crate::error::{Error, Result};
use crate::model::{FluxData, FunctionSpec, ProblemSpec, TimeGrid};
use crate::spectral::{lift, SQRT_2_OVER_PI};

/// Scalar samples on an increasing, not necessarily uniform, set of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSamples {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl CurveSamples {
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.values.iter().copied())
    }
}

/// `a = (sqrt(2/pi) - g') / g` at one time.
pub fn closed_form_coefficient(g: f64, dg: f64) -> f64 {
    (SQRT_2_OVER_PI - dg) / g
}

fn recover(grid: &TimeGrid, t_min: f64, g: impl Fn(usize) -> f64, dg: impl Fn(usize) -> f64) -> Result<CurveSamples> {
    if !(t_min > 0.0 && t_min <= grid.t_max()) {
        return Err(Error::Domain(format!(
            "t_min must lie in (0, {}], got {t_min}",
            grid.t_max()
        )));
    }
    let start = 1e-12 * grid.t_max();
    let mut out = CurveSamples {
        t: Vec::new(),
        values: Vec::new(),
    };
    for (i, t) in grid.nodes().enumerate() {
        if t < t_min - start {
            continue;
        }
        let gi = g(i);
        if !(gi > 0.0) {
            return Err(Error::Domain(format!("flux g({t}) = {gi} is not positive")));
        }
        out.t.push(t);
        out.values.push(closed_form_coefficient(gi, dg(i)));
    }
    Ok(out)
}

/// Recovers `a(t)` for `t >= t_min` from sampled flux; `g'` by second-order
/// finite differences.
pub fn closed_form_recover(data: &FluxData, t_min: f64) -> Result<CurveSamples> {
    let dg = differentiate(&data.as_series());
    recover(&data.grid, t_min, |i| data.g[i], |i| dg[i])
}

/// As [`closed_form_recover`] with `g` and its analytic derivative.
pub fn closed_form_recover_exact(g: &FunctionSpec, grid: &TimeGrid, t_min: f64) -> Result<CurveSamples> {
    recover(grid, t_min, |i| g.eval(grid.t(i)), |i| g.derivative(grid.t(i)))
}

/// Fails unless `spec` is the zero-data experiment driven by `f = p_1(x)`.
pub fn check_closed_form_scenario(spec: &ProblemSpec, grid: &TimeGrid) -> Result<()> {
    let reject = |why: &str| Err(Error::AssumptionViolated(format!("closed-form recovery needs {why}")));
    for (name, f) in [("u1", &spec.u1), ("u2", &spec.u2)] {
        if grid.nodes().any(|t| f.eval(t) != 0.0) {
            return reject(&format!("{name} = 0"));
        }
    }
    let lifted = lift(spec, grid, 4)?;
    let data = &lifted.mode_data;
    if data.initial().iter().any(|c| c.abs() > 1e-10) {
        return reject("h = 0");
    }
    for row in data.forcing() {
        if (row[0] - 1.0).abs() > 1e-10 || row[1..].iter().any(|c| c.abs() > 1e-10) {
            return reject("f(x, t) = sqrt(2/pi) sin(x)");
        }
    }
    Ok(())
}
