use serde::{Deserialize, Serialize};

use super::{serialize_float, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{corrected_flux, FluxData};
use crate::spectral::{eval_q0, eval_q0_derivative, invert_q0, LiftedProblem, SQRT_2_OVER_PI};

/// Constants of the local contraction argument for the fixed-point map.
///
/// With `|(Q0^{-1})'| <= c0` on the working range and `|dQ/dz| <= c1`, the
/// map contracts in the sup norm on `[0, t0]` whenever `c0 c1 t0 < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// Bound on the derivative of `Q0^{-1}` over `[min g~, max g~]`.
    #[serde(serialize_with = "serialize_float")]
    pub c0: f64,
    /// `sqrt(2/pi) max_t sum_m m |F_m(t)|`, bounding `Q`.
    pub c: f64,
    /// `sqrt(2/pi) max_t sum_m m^3 |F_m(t)|`, bounding `dQ/dz`.
    pub c1: f64,
    /// Largest horizon with `c0 c1 t0 < 1`; infinite without forcing.
    #[serde(serialize_with = "serialize_float")]
    pub t0_predicted: f64,
    /// Radius `2 max |A_1|` of the ball holding the iterates.
    pub ball_radius: f64,
    pub t_max: f64,
    /// `t_max <= t0_predicted`.
    pub contractive: bool,
}

pub fn contraction_estimate(
    lifted: &LiftedProblem,
    data: &FluxData,
    opts: &SolverOptions,
) -> Result<ContractionReport> {
    if data.grid != *lifted.grid() {
        return Err(Error::Dimension(
            "flux data and lifted problem use different grids".into(),
        ));
    }
    let mode_data = &lifted.mode_data;
    let moment = |power: i32| {
        SQRT_2_OVER_PI
            * mode_data
                .forcing()
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(k, f)| ((k + 1) as f64).powi(power) * f.abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
    };
    let c = moment(1);
    let c1 = moment(3);

    let rhs = corrected_flux(lifted, data);
    let h = mode_data.initial();
    let upper = eval_q0(h, 0.0)?;
    let lowest = rhs.iter().copied().fold(f64::INFINITY, f64::min);
    let c0 = if lowest > 0.0 {
        let z = invert_q0(h, lowest.min(upper), opts.inversion_tol)?;
        let slope = eval_q0_derivative(h, z)?.abs();
        if slope > 0.0 {
            1.0 / slope
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    let t0_predicted = if c1 == 0.0 { f64::INFINITY } else { 1.0 / (c0 * c1) };

    let mut first = 0.0f64;
    for y in rhs.iter().skip(1) {
        if *y > 0.0 {
            first = first.max(invert_q0(h, y.min(upper), opts.inversion_tol)?);
        }
    }
    let t_max = data.grid.t_max();
    Ok(ContractionReport {
        c0,
        c,
        c1,
        t0_predicted,
        ball_radius: 2.0 * first,
        t_max,
        contractive: t_max <= t0_predicted,
    })
}
