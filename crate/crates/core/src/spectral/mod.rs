//! Sine-basis machinery on `[0, pi]`.
//!
//! The orthonormal basis is `p_m(x) = sqrt(2/pi) sin(m x)`. Coefficients are
//! inner products against `p_m`, so a function `sum_j k_j sin(m_j x)` has
//! coefficient `k_j sqrt(pi/2)` at mode `m_j`.
//!
//! Both flux kernels carry the factor `sqrt(2/pi)` that `p_m'(0)` contributes,
//! so the Volterra relation `Q0(A(t)) + int_0^t Q(A(t) - A(s), s) ds = g(t)`
//! holds for the lift-corrected flux without further scaling.

mod kernel;
mod lift;

pub use kernel::{eval_q, eval_q0, eval_q0_derivative, eval_q_derivative, invert_q0, kernel_sum};
pub use lift::{lift, LiftedProblem, ModeData};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::FunctionSpec;
use crate::quadrature::gauss_legendre;

/// `sqrt(2/pi)`, the normalization of the sine basis.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// `sqrt(pi/2)`, the coefficient of `sin(m x)` against `p_m`.
pub const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;

/// `p_m(x)`.
pub fn basis(m: usize, x: f64) -> f64 {
    SQRT_2_OVER_PI * (m as f64 * x).sin()
}

/// Gauss-Legendre panel count used for quadrature of `modes` coefficients.
pub fn quadrature_panels(modes: usize) -> usize {
    (32 * modes).max(64)
}

/// Inner products `(fn, p_m)` for `m = 1..=modes`.
///
/// Exact for sine series; composite Simpson otherwise.
pub fn sine_coefficients(f: &FunctionSpec, modes: usize) -> Result<Vec<f64>> {
    if modes == 0 {
        return Err(Error::Domain("at least one mode is required".into()));
    }
    if let FunctionSpec::SineSeries { terms } = f {
        let mut coefs = vec![0.0; modes];
        for term in terms {
            let m = term.mode as usize;
            if (1..=modes).contains(&m) {
                coefs[m - 1] += term.coef * SQRT_PI_OVER_2;
            }
        }
        return Ok(coefs);
    }
    f.check_domain(0.0, PI, "spatial function")?;
    if f.is_identically_zero() {
        return Ok(vec![0.0; modes]);
    }
    let panels = quadrature_panels(modes);
    let coefs: Vec<f64> = (1..=modes)
        .map(|m| gauss_legendre(|x| f.eval(x) * basis(m, x), 0.0, PI, panels))
        .collect();
    if let Some(m) = coefs.iter().position(|c| !c.is_finite()) {
        return Err(Error::Evaluation(format!(
            "coefficient of mode {} is not finite",
            m + 1
        )));
    }
    Ok(coefs)
}

/// `(1, p_m)`.
pub(crate) fn constant_coefficient(m: usize) -> f64 {
    if m % 2 == 1 {
        2.0 * SQRT_2_OVER_PI / m as f64
    } else {
        0.0
    }
}

/// `(x, p_m)`.
pub(crate) fn linear_coefficient(m: usize) -> f64 {
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    sign * SQRT_2_OVER_PI * PI / m as f64
}
