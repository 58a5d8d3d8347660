use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{constant_coefficient, linear_coefficient, sine_coefficients};
use crate::error::{Error, Result};
use crate::model::{FunctionSpec, ProblemSpec, TimeGrid};

/// Truncated sine coefficients of the homogenized initial profile and source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeData {
    grid: TimeGrid,
    initial: Vec<f64>,
    forcing: Vec<Vec<f64>>,
}

impl ModeData {
    /// `initial[m-1] = H_m`; `forcing[i][m-1] = F_m(t_i)`.
    pub fn new(grid: TimeGrid, initial: Vec<f64>, forcing: Vec<Vec<f64>>) -> Result<Self> {
        let modes = initial.len();
        if modes == 0 {
            return Err(Error::Dimension("at least one mode is required".into()));
        }
        if forcing.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "forcing has {} time rows for {} grid nodes",
                forcing.len(),
                grid.len()
            )));
        }
        if let Some(i) = forcing.iter().position(|row| row.len() != modes) {
            return Err(Error::Dimension(format!(
                "forcing row {i} has {} modes, expected {modes}",
                forcing[i].len()
            )));
        }
        let all_finite = initial.iter().chain(forcing.iter().flatten()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Evaluation("mode data contains non-finite values".into()));
        }
        Ok(Self { grid, initial, forcing })
    }

    /// Mode data with time-independent forcing coefficients.
    pub fn stationary(grid: TimeGrid, initial: Vec<f64>, forcing: Vec<f64>) -> Result<Self> {
        let rows = vec![forcing; grid.len()];
        Self::new(grid, initial, rows)
    }

    pub fn modes(&self) -> usize {
        self.initial.len()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `H_m`, `m = 1..=M`.
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// `F_m(t_i)`, `m = 1..=M`.
    pub fn forcing_at(&self, i: usize) -> &[f64] {
        &self.forcing[i]
    }

    pub fn forcing(&self) -> &[Vec<f64>] {
        &self.forcing
    }

    /// `M |H_M| + M max_t |F_M(t)|`, a cheap indicator of truncation error.
    pub fn tail_indicator(&self) -> f64 {
        let m = self.modes();
        let top_forcing = self.forcing.iter().map(|row| row[m - 1].abs()).fold(0.0, f64::max);
        m as f64 * (self.initial[m - 1].abs() + top_forcing)
    }
}

/// Mode data of `v = u - r` together with the lift `r(x, t) = u1 + (x/pi)(u2 - u1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedProblem {
    pub mode_data: ModeData,
    /// `r_x(t_i) = (u2(t_i) - u1(t_i)) / pi`.
    pub r_slope: Vec<f64>,
    u1: FunctionSpec,
    u2: FunctionSpec,
}

impl LiftedProblem {
    /// Lifted problem with homogeneous boundary data.
    pub fn homogeneous(mode_data: ModeData) -> Self {
        let n = mode_data.grid().len();
        Self {
            mode_data,
            r_slope: vec![0.0; n],
            u1: FunctionSpec::zero(),
            u2: FunctionSpec::zero(),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        self.mode_data.grid()
    }

    pub fn modes(&self) -> usize {
        self.mode_data.modes()
    }

    /// `r(x, t)`; equals `u1(t)` at `x = 0` and `u2(t)` at `x = pi`.
    pub fn r_at(&self, x: f64, t: f64) -> f64 {
        let left = self.u1.eval(t);
        if x == PI {
            return self.u2.eval(t);
        }
        left + x / PI * (self.u2.eval(t) - left)
    }

    pub fn boundary(&self, t: f64) -> (f64, f64) {
        (self.u1.eval(t), self.u2.eval(t))
    }
}

/// Homogenizes the boundary data and expands `H = h - r(., 0)` and
/// `F = f - r_t` in the sine basis on every node of `grid`.
pub fn lift(spec: &ProblemSpec, grid: &TimeGrid, modes: usize) -> Result<LiftedProblem> {
    spec.validate()?;
    if modes == 0 {
        return Err(Error::Domain("at least one mode is required".into()));
    }
    let t_max = grid.t_max();
    spec.u1.check_domain(0.0, t_max, "u1")?;
    spec.u2.check_domain(0.0, t_max, "u2")?;
    for term in &spec.f.terms {
        term.time.check_domain(0.0, t_max, "f (time factor)")?;
    }

    let unit: Vec<f64> = (1..=modes).map(constant_coefficient).collect();
    let ramp: Vec<f64> = (1..=modes).map(linear_coefficient).collect();

    let (u1_0, u2_0) = (spec.u1.eval(0.0), spec.u2.eval(0.0));
    let slope_0 = (u2_0 - u1_0) / PI;
    let initial: Vec<f64> = sine_coefficients(&spec.h, modes)?
        .into_iter()
        .enumerate()
        .map(|(k, c)| c - u1_0 * unit[k] - slope_0 * ramp[k])
        .collect();

    let spatial: Vec<Vec<f64>> = spec
        .f
        .terms
        .iter()
        .map(|term| sine_coefficients(&term.space, modes))
        .collect::<Result<_>>()?;

    let mut forcing = Vec::with_capacity(grid.len());
    let mut r_slope = Vec::with_capacity(grid.len());
    for t in grid.nodes() {
        let du1 = spec.u1.derivative(t);
        let dslope = (spec.u2.derivative(t) - du1) / PI;
        let mut row: Vec<f64> = (0..modes).map(|k| -du1 * unit[k] - dslope * ramp[k]).collect();
        for (term, coefs) in spec.f.terms.iter().zip(&spatial) {
            let amplitude = term.time.eval(t);
            for (r, c) in row.iter_mut().zip(coefs) {
                *r += amplitude * c;
            }
        }
        forcing.push(row);
        r_slope.push((spec.u2.eval(t) - spec.u1.eval(t)) / PI);
    }
    if r_slope.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("boundary data not finite on the grid".into()));
    }

    Ok(LiftedProblem {
        mode_data: ModeData::new(*grid, initial, forcing)?,
        r_slope,
        u1: spec.u1.clone(),
        u2: spec.u2.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SourceSpec;
    use crate::spectral::SQRT_2_OVER_PI;

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0, 8).unwrap()
    }

    #[test]
    fn zero_lift_passes_coefficients_through() {
        let h = FunctionSpec::sine_series(&[(1.0, 1), (0.5, 3)]).unwrap();
        let f = SourceSpec::separable(
            FunctionSpec::sine_series(&[(2.0, 2)]).unwrap(),
            FunctionSpec::exponential(1.0, 1.0),
        );
        let spec = ProblemSpec::homogeneous(h.clone(), f, None).unwrap();
        let lifted = lift(&spec, &grid(), 4).unwrap();
        assert_eq!(lifted.mode_data.initial(), sine_coefficients(&h, 4).unwrap().as_slice());
        for (i, t) in grid().nodes().enumerate() {
            let row = lifted.mode_data.forcing_at(i);
            assert!((row[1] - 2.0 * crate::spectral::SQRT_PI_OVER_2 * (-t).exp()).abs() < 1e-15);
            assert_eq!(row[0], 0.0);
        }
        assert!(lifted.r_slope.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn moving_boundaries_give_constant_negative_forcing() {
        let t = FunctionSpec::polynomial(vec![0.0, 1.0]);
        let spec = ProblemSpec::new(t.clone(), t, FunctionSpec::zero(), SourceSpec::zero(), None, 0.1).unwrap();
        let lifted = lift(&spec, &grid(), 3).unwrap();
        assert!(lifted.mode_data.initial().iter().all(|c| c.abs() < 1e-15));
        for i in 0..grid().len() {
            let row = lifted.mode_data.forcing_at(i);
            assert!((row[0] + 2.0 * SQRT_2_OVER_PI).abs() < 1e-14);
            assert!((row[0] + 1.59577).abs() < 1e-5);
            assert!(row[1].abs() < 1e-15);
        }
        assert_eq!(lifted.r_at(1.3, 0.5), 0.5);
    }

    #[test]
    fn source_cancels_lift_derivative() {
        // u2 = pi t, f = x  =>  r = x t, r_t = x, F = 0
        let spec = ProblemSpec::new(
            FunctionSpec::zero(),
            FunctionSpec::polynomial(vec![0.0, PI]),
            FunctionSpec::zero(),
            SourceSpec::separable(FunctionSpec::polynomial(vec![0.0, 1.0]), FunctionSpec::constant(1.0)),
            None,
            0.1,
        )
        .unwrap();
        let lifted = lift(&spec, &grid(), 6).unwrap();
        for row in lifted.mode_data.forcing() {
            assert!(row.iter().all(|c| c.abs() < 1e-10), "{row:?}");
        }
        assert!((lifted.r_slope[4] - grid().t(4)).abs() < 1e-15);
    }

    #[test]
    fn lift_matches_boundary_values() {
        let spec = ProblemSpec::new(
            FunctionSpec::constant(1.0),
            FunctionSpec::polynomial(vec![2.0, 1.0]),
            FunctionSpec::polynomial(vec![1.0, 1.0 / PI]),
            SourceSpec::zero(),
            None,
            0.1,
        )
        .unwrap();
        let lifted = lift(&spec, &grid(), 4).unwrap();
        assert_eq!(lifted.r_at(0.0, 0.3), 1.0);
        assert_eq!(lifted.r_at(PI, 0.3), 2.3);
        // h equals r(., 0) here so H vanishes
        assert!(lifted.mode_data.initial().iter().all(|c| c.abs() < 1e-10));
    }

    #[test]
    fn table_boundary_must_cover_grid() {
        let spec = ProblemSpec::new(
            FunctionSpec::table(vec![0.0, 0.5], vec![0.0, 0.0]).unwrap(),
            FunctionSpec::zero(),
            FunctionSpec::zero(),
            SourceSpec::zero(),
            None,
            0.1,
        )
        .unwrap();
        assert!(matches!(lift(&spec, &grid(), 2), Err(Error::Evaluation(_))));
    }

    #[test]
    fn mode_data_shape_checked() {
        let g = grid();
        assert!(ModeData::new(g, vec![1.0], vec![vec![0.0]; 3]).is_err());
        assert!(ModeData::new(g, vec![1.0], vec![vec![0.0, 1.0]; g.len()]).is_err());
        assert!(ModeData::new(g, vec![f64::NAN], vec![vec![0.0]; g.len()]).is_err());
        let ok = ModeData::stationary(g, vec![1.0, 0.001], vec![0.0, 0.002]).unwrap();
        assert!((ok.tail_indicator() - 2.0 * (0.001 + 0.002)).abs() < 1e-15);
    }
}
