//! Checks of the sufficient conditions under which the flux data determine
//! `A(t)` uniquely: positive initial coefficients, positive flux,
//! nonnegative forcing coefficients and a bounded cubic moment of the forcing.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::FluxData;
use super::problem::ProblemSpec;
use crate::error::Result;
use crate::spectral::{lift, LiftedProblem, SQRT_2_OVER_PI};

/// Tail indicator above which truncation is flagged.
pub const TRUNCATION_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// Nonnegative with at least one positive entry, or a bound that could
    /// not be confirmed.
    Warn,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
            Verdict::Fail => "fail",
        })
    }
}

/// Options for [`validate_assumptions_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionOptions {
    /// Assumed decay `|F_m| <= c / m^p` beyond the truncation order.
    pub decay_exponent: f64,
}

impl Default for AssumptionOptions {
    fn default() -> Self {
        Self { decay_exponent: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub modes: usize,
    pub h_coeff_positivity: Verdict,
    pub g_positivity: Verdict,
    pub f_coeff_nonnegativity: Verdict,
    /// `max_t sum_{m <= M} m^3 |F_m(t)|`.
    pub cubic_sum: f64,
    /// Estimated contribution of modes above `M` to the cubic sum.
    pub cubic_sum_tail: f64,
    pub cubic_sum_bound: Verdict,
    /// `|g(0) - u_x(0, 0)|` with the flux taken from the truncated data.
    pub compatibility_residual: f64,
    pub truncation_tail: f64,
    pub truncation_warning: bool,
}

impl AssumptionReport {
    pub fn has_failure(&self) -> bool {
        [
            self.h_coeff_positivity,
            self.g_positivity,
            self.f_coeff_nonnegativity,
            self.cubic_sum_bound,
        ]
        .contains(&Verdict::Fail)
    }
}

/// Entries within this fraction of the largest magnitude count as zero.
const ZERO_FRACTION: f64 = 1e-12;

fn zero_band<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    ZERO_FRACTION * values.fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Pass if all entries are positive, warn if nonnegative with one positive.
pub fn positivity_verdict(values: &[f64]) -> Verdict {
    if values.iter().any(|v| !v.is_finite()) {
        return Verdict::Fail;
    }
    let band = zero_band(values.iter());
    if values.iter().any(|v| *v < -band) {
        Verdict::Fail
    } else if values.iter().all(|v| *v > band) {
        Verdict::Pass
    } else if values.iter().any(|v| *v > band) {
        Verdict::Warn
    } else {
        Verdict::Fail
    }
}

/// Pass if no entry is negative.
pub fn nonnegativity_verdict<'a>(values: impl Iterator<Item = &'a f64> + Clone) -> Verdict {
    if values.clone().any(|v| !v.is_finite()) {
        return Verdict::Fail;
    }
    let band = zero_band(values.clone());
    if values.into_iter().any(|v| *v < -band) {
        Verdict::Fail
    } else {
        Verdict::Pass
    }
}

/// Flux with the lift slope removed: `g(t) - (u2(t) - u1(t)) / pi`.
pub fn corrected_flux(lifted: &LiftedProblem, data: &FluxData) -> Vec<f64> {
    data.g.iter().zip(&lifted.r_slope).map(|(g, slope)| g - slope).collect()
}

/// Flux at `x = 0, t = 0` implied by the truncated initial data.
pub fn initial_flux(lifted: &LiftedProblem) -> f64 {
    let series: f64 = lifted
        .mode_data
        .initial()
        .iter()
        .enumerate()
        .map(|(k, c)| (k + 1) as f64 * c)
        .sum();
    SQRT_2_OVER_PI * series + lifted.r_slope[0]
}

/// `|g(0) - (sqrt(2/pi) sum m H_m + (u2(0) - u1(0)) / pi)|`.
pub fn compatibility_check(spec: &ProblemSpec, data: &FluxData, modes: usize) -> Result<f64> {
    let lifted = lift(spec, &data.grid, modes)?;
    Ok((data.g[0] - initial_flux(&lifted)).abs())
}

pub fn validate_assumptions(spec: &ProblemSpec, data: &FluxData, modes: usize) -> Result<AssumptionReport> {
    validate_assumptions_with(spec, data, modes, AssumptionOptions::default())
}

pub fn validate_assumptions_with(
    spec: &ProblemSpec,
    data: &FluxData,
    modes: usize,
    options: AssumptionOptions,
) -> Result<AssumptionReport> {
    let lifted = lift(spec, &data.grid, modes)?;
    Ok(assess(&lifted, data, options))
}

/// Verdicts computed from already lifted data.
pub fn assess(lifted: &LiftedProblem, data: &FluxData, options: AssumptionOptions) -> AssumptionReport {
    let mode_data = &lifted.mode_data;
    let modes = mode_data.modes();

    let cubic_sum = mode_data
        .forcing()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(k, c)| ((k + 1) as f64).powi(3) * c.abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let top = mode_data
        .forcing()
        .iter()
        .map(|row| row[modes - 1].abs())
        .fold(0.0, f64::max);
    let p = options.decay_exponent;
    let cubic_sum_tail = if top == 0.0 {
        0.0
    } else if p > 4.0 {
        // c = top M^p and sum_{m>M} m^(3-p) <= M^(4-p) / (p - 4)
        top * (modes as f64).powi(4) / (p - 4.0)
    } else {
        f64::INFINITY
    };
    let cubic_sum_bound = if !cubic_sum.is_finite() {
        Verdict::Fail
    } else if cubic_sum_tail.is_finite() {
        Verdict::Pass
    } else {
        Verdict::Warn
    };

    let truncation_tail = mode_data.tail_indicator();
    AssumptionReport {
        modes,
        h_coeff_positivity: positivity_verdict(mode_data.initial()),
        g_positivity: positivity_verdict(&corrected_flux(lifted, data)),
        f_coeff_nonnegativity: nonnegativity_verdict(mode_data.forcing().iter().flatten()),
        cubic_sum,
        cubic_sum_tail,
        cubic_sum_bound,
        compatibility_residual: (data.g[0] - initial_flux(lifted)).abs(),
        truncation_tail,
        truncation_warning: truncation_tail > TRUNCATION_WARNING,
    }
}
