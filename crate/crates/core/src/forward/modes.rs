use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_coefficient_floor, FluxData, FunctionSpec, ProblemSpec, TimeGrid, TimeSeries};
use crate::spectral::{basis, lift, LiftedProblem, ModeData, SQRT_2_OVER_PI};

/// Mode amplitudes `c_m(t_i)` of the homogenized solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTrajectory {
    pub grid: TimeGrid,
    /// `c[i][m-1] = c_m(t_i)`.
    pub c: Vec<Vec<f64>>,
}

impl ModeTrajectory {
    pub fn at(&self, i: usize) -> &[f64] {
        &self.c[i]
    }

    pub fn mode(&self, m: usize) -> impl Iterator<Item = f64> + '_ {
        self.c.iter().map(move |row| row[m - 1])
    }
}

/// Field samples `u(x_k, t)` at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl FieldSnapshot {
    /// Relative discrete L2 difference `||self - other|| / ||other||`.
    pub fn relative_l2(&self, other: &FieldSnapshot) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let den: f64 = other.values.iter().map(|b| b * b).sum();
        (num / den).sqrt()
    }
}

/// `A(t) = int_0^t a(s) ds` by the composite trapezoid rule on `grid`.
pub fn accumulate_a(a: &FunctionSpec, grid: &TimeGrid) -> Result<TimeSeries> {
    accumulate_a_checked(a, grid).map(|(series, _)| series)
}

/// As [`accumulate_a`], also returning the largest per-step Richardson
/// estimate of the trapezoid error, obtained by comparing each step with
/// its two half steps.
pub fn accumulate_a_checked(a: &FunctionSpec, grid: &TimeGrid) -> Result<(TimeSeries, f64)> {
    check_coefficient_floor(a, grid, f64::MIN_POSITIVE)?;
    let dt = grid.dt();
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut worst = 0.0f64;
    let mut acc = 0.0;
    let mut left = a.eval(0.0);
    for i in 1..grid.len() {
        let right = a.eval(grid.t(i));
        let mid = a.eval(grid.t(i - 1) + 0.5 * dt);
        if !(mid > 0.0) {
            return Err(Error::Coefficient(format!(
                "a is not positive between nodes {} and {i}",
                i - 1
            )));
        }
        let coarse = 0.5 * dt * (left + right);
        let fine = 0.25 * dt * (left + 2.0 * mid + right);
        worst = worst.max((fine - coarse).abs() / 3.0);
        acc += coarse;
        values.push(acc);
        left = right;
    }
    Ok((TimeSeries::new(*grid, values)?, worst))
}

/// Integrates the mode equations `c' + a m^2 c = F_m`, `c(0) = H_m`, given
/// `A = int a`.
///
/// The Duhamel integral is evaluated by the trapezoid rule on the grid with
/// the kernel `exp(-m^2 (A(t_i) - A(t_j)))` formed as a single exponential.
pub fn solve_modes(a_integral: &TimeSeries, mode_data: &ModeData) -> Result<ModeTrajectory> {
    let grid = *mode_data.grid();
    if a_integral.grid() != &grid {
        return Err(Error::Dimension("A and mode data live on different grids".into()));
    }
    let values = a_integral.values();
    if values[0] != 0.0 {
        return Err(Error::Domain(format!("A(0) must be 0, got {}", values[0])));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Domain(format!("A decreases between nodes {i} and {}", i + 1)));
    }
    let modes = mode_data.modes();
    let initial = mode_data.initial();
    let mut c = Vec::with_capacity(grid.len());
    let mut kernel = vec![0.0; modes];
    for i in 0..grid.len() {
        decay_factors(values[i], &mut kernel);
        let mut row: Vec<f64> = initial.iter().zip(&kernel).map(|(h, k)| h * k).collect();
        for j in 0..=i {
            let w = grid.trapezoid_weight(j, i);
            if w == 0.0 {
                continue;
            }
            decay_factors(values[i] - values[j], &mut kernel);
            for ((r, k), f) in row.iter_mut().zip(&kernel).zip(mode_data.forcing_at(j)) {
                *r += w * k * f;
            }
        }
        c.push(row);
    }
    Ok(ModeTrajectory { grid, c })
}

/// `out[m-1] = exp(-m^2 z)`.
fn decay_factors(z: f64, out: &mut [f64]) {
    let q = (-z).exp();
    let q2 = q * q;
    let mut ratio = q;
    let mut weight = 1.0;
    for slot in out.iter_mut() {
        weight *= ratio;
        ratio *= q2;
        *slot = weight;
    }
}

/// `u(x, t_i) = sum_m c_m(t_i) p_m(x) + r(x, t_i)`.
pub fn reconstruct_u(traj: &ModeTrajectory, lifted: &LiftedProblem, x_nodes: &[f64], t_index: usize) -> FieldSnapshot {
    let t = traj.grid.t(t_index);
    let c = traj.at(t_index);
    let values = x_nodes
        .iter()
        .map(|&x| {
            let series: f64 = c.iter().enumerate().map(|(k, ck)| ck * basis(k + 1, x)).sum();
            series + lifted.r_at(x, t)
        })
        .collect();
    FieldSnapshot {
        t,
        x: x_nodes.to_vec(),
        values,
    }
}

/// `g(t_i) = sqrt(2/pi) sum_m m c_m(t_i) + (u2(t_i) - u1(t_i)) / pi`.
pub fn synthesize_flux(traj: &ModeTrajectory, lifted: &LiftedProblem) -> Result<FluxData> {
    let g = traj
        .c
        .iter()
        .zip(&lifted.r_slope)
        .map(|(row, slope)| {
            let series: f64 = row.iter().enumerate().map(|(k, c)| (k + 1) as f64 * c).sum();
            SQRT_2_OVER_PI * series + slope
        })
        .collect();
    FluxData::new(traj.grid, g)
}

/// Everything produced by a spectral forward run.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub lifted: LiftedProblem,
    pub a_integral: TimeSeries,
    pub trajectory: ModeTrajectory,
    pub flux: FluxData,
}

impl Synthesis {
    /// Field on `points + 1` equally spaced nodes of `[0, pi]` at node `t_index`.
    pub fn field(&self, points: usize, t_index: usize) -> FieldSnapshot {
        let x: Vec<f64> = (0..=points)
            .map(|k| if k == points { PI } else { k as f64 * PI / points as f64 })
            .collect();
        reconstruct_u(&self.trajectory, &self.lifted, &x, t_index)
    }
}

/// Lifts `spec`, integrates its true coefficient and synthesizes the flux.
pub fn synthesize(spec: &ProblemSpec, grid: &TimeGrid, modes: usize) -> Result<Synthesis> {
    spec.check_coefficient(grid)?;
    let a = spec.a_true.as_ref().expect("checked above");
    let lifted = lift(spec, grid, modes)?;
    let a_integral = accumulate_a(a, grid)?;
    let trajectory = solve_modes(&a_integral, &lifted.mode_data)?;
    let flux = synthesize_flux(&trajectory, &lifted)?;
    Ok(Synthesis {
        lifted,
        a_integral,
        trajectory,
        flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SourceSpec;
    use crate::spectral::SQRT_PI_OVER_2;

    fn unit_grid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    fn linear_a(grid: TimeGrid) -> TimeSeries {
        TimeSeries::from_fn(grid, |t| t)
    }

    #[test]
    fn accumulate_examples() {
        let grid = unit_grid(10);
        let a = accumulate_a(&FunctionSpec::constant(1.0), &grid).unwrap();
        assert!((a[10] - 1.0).abs() < 1e-15);

        let grid = unit_grid(1000);
        let (a, est) = accumulate_a_checked(&FunctionSpec::sinusoidal(1.0, 0.5, 1.0), &grid).unwrap();
        let exact = 1.0 + 0.5 * (1.0 - 1f64.cos());
        assert!((a[1000] - 1.2298488).abs() < 1e-6);
        assert!((a[1000] - exact).abs() < 1e-7);
        assert!(est < 1e-9);
        assert!(a.values().windows(2).all(|w| w[1] > w[0]));

        assert!(matches!(
            accumulate_a(&FunctionSpec::zero(), &grid),
            Err(Error::Coefficient(_))
        ));
    }

    #[test]
    fn unforced_single_mode() {
        let grid = unit_grid(200);
        let data = ModeData::stationary(grid, vec![SQRT_PI_OVER_2], vec![0.0]).unwrap();
        let traj = solve_modes(&linear_a(grid), &data).unwrap();
        let exact = SQRT_PI_OVER_2 * (-1f64).exp();
        assert!((exact - 0.4610685).abs() < 1e-7);
        assert!((traj.c[200][0] - exact).abs() < 1e-14);
    }

    #[test]
    fn forced_single_mode() {
        let exact = SQRT_PI_OVER_2 * (-1f64).exp() * 2.0;
        assert!((exact - 0.9221370).abs() < 1e-7);
        let error = |n: usize| {
            let grid = unit_grid(n);
            let forcing = grid.nodes().map(|t| vec![SQRT_PI_OVER_2 * (-t).exp()]).collect();
            let data = ModeData::new(grid, vec![SQRT_PI_OVER_2], forcing).unwrap();
            let traj = solve_modes(&linear_a(grid), &data).unwrap();
            (traj.c[n][0] - exact).abs()
        };
        // the Duhamel integrand e^{-(t-s)} e^{-s} is constant in s, so the
        // trapezoid rule is exact here
        assert!(error(100) < 1e-13);
        assert!(error(200) < 1e-13);
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = unit_grid(20);
        let data = ModeData::stationary(grid, vec![0.0; 3], vec![0.0; 3]).unwrap();
        let traj = solve_modes(&linear_a(grid), &data).unwrap();
        assert!(traj.c.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_bad_antiderivative() {
        let grid = unit_grid(4);
        let data = ModeData::stationary(grid, vec![1.0], vec![0.0]).unwrap();
        let shifted = TimeSeries::from_fn(grid, |t| t + 0.1);
        assert!(solve_modes(&shifted, &data).is_err());
        let bumpy = TimeSeries::new(grid, vec![0.0, 0.2, 0.1, 0.3, 0.4]).unwrap();
        assert!(solve_modes(&bumpy, &data).is_err());
    }

    #[test]
    fn high_modes_do_not_overflow() {
        let grid = TimeGrid::new(5.0, 50).unwrap();
        let data = ModeData::stationary(grid, vec![1.0; 64], vec![1.0; 64]).unwrap();
        let traj = solve_modes(&TimeSeries::from_fn(grid, |t| 3.0 * t), &data).unwrap();
        assert!(traj.c.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn reconstruction_and_flux() {
        let grid = unit_grid(200);
        let spec = ProblemSpec::homogeneous(
            FunctionSpec::sine_series(&[(1.0, 1)]).unwrap(),
            SourceSpec::zero(),
            Some(FunctionSpec::constant(1.0)),
        )
        .unwrap();
        let syn = synthesize(&spec, &grid, 8).unwrap();
        let snap = reconstruct_u(&syn.trajectory, &syn.lifted, &[PI / 2.0], 200);
        assert!((snap.values[0] - 0.3678794).abs() < 1e-7);
        assert!((syn.flux.g[0] - 1.0).abs() < 1e-15);
        for (t, g) in grid.nodes().zip(&syn.flux.g) {
            assert!((g - (-t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_lift() {
        let grid = unit_grid(10);
        let one = FunctionSpec::constant(1.0);
        let spec = ProblemSpec::new(
            one.clone(),
            one.clone(),
            one.clone(),
            SourceSpec::zero(),
            Some(one),
            0.5,
        )
        .unwrap();
        let syn = synthesize(&spec, &grid, 4).unwrap();
        let snap = syn.field(16, 10);
        assert!(snap.values.iter().all(|v| (v - 1.0).abs() < 1e-9), "{:?}", snap.values);

        let zero = ProblemSpec::homogeneous(
            FunctionSpec::zero(),
            SourceSpec::zero(),
            Some(FunctionSpec::constant(1.0)),
        )
        .unwrap();
        let syn = synthesize(&zero, &grid, 4).unwrap();
        assert!(syn.field(8, 5).values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lift_slope_only_flux() {
        let grid = unit_grid(10);
        let lifted = lift(
            &ProblemSpec::new(
                FunctionSpec::zero(),
                FunctionSpec::constant(PI),
                FunctionSpec::polynomial(vec![0.0, 1.0]),
                SourceSpec::zero(),
                None,
                0.1,
            )
            .unwrap(),
            &grid,
            4,
        )
        .unwrap();
        let traj = ModeTrajectory {
            grid,
            c: vec![vec![0.0; 4]; grid.len()],
        };
        let flux = synthesize_flux(&traj, &lifted).unwrap();
        assert!(flux.g.iter().all(|g| (g - 1.0).abs() < 1e-15));
    }

    #[test]
    fn forced_flux_value() {
        let grid = unit_grid(400);
        let spec = ProblemSpec::homogeneous(
            FunctionSpec::sine_series(&[(1.0, 1)]).unwrap(),
            SourceSpec::separable(
                FunctionSpec::sine_series(&[(1.0, 1)]).unwrap(),
                FunctionSpec::exponential(1.0, 1.0),
            ),
            Some(FunctionSpec::constant(1.0)),
        )
        .unwrap();
        let syn = synthesize(&spec, &grid, 4).unwrap();
        assert!((syn.flux.g[400] - 0.7357589).abs() < 1e-6);
    }

    /// Second-order ODE residual of each mode equation.
    #[test]
    fn mode_equation_residual_is_second_order() {
        let residual = |n: usize| {
            let grid = unit_grid(n);
            let a = FunctionSpec::sinusoidal(1.0, 0.5, 1.0);
            let spec = ProblemSpec::homogeneous(
                FunctionSpec::sine_series(&[(1.0, 1), (0.25, 2)]).unwrap(),
                SourceSpec::separable(
                    FunctionSpec::sine_series(&[(1.0, 1), (0.5, 3)]).unwrap(),
                    FunctionSpec::exponential(1.0, 1.0),
                ),
                Some(a.clone()),
            )
            .unwrap();
            let syn = synthesize(&spec, &grid, 4).unwrap();
            let dt = grid.dt();
            let mut worst = 0.0f64;
            for i in 1..n {
                for m in 1..=4 {
                    let c = |k: usize| syn.trajectory.c[k][m - 1];
                    let r = (c(i + 1) - c(i - 1)) / (2.0 * dt) + a.eval(grid.t(i)) * (m * m) as f64 * c(i)
                        - syn.lifted.mode_data.forcing_at(i)[m - 1];
                    worst = worst.max(r.abs());
                }
            }
            worst
        };
        let (coarse, fine) = (residual(100), residual(200));
        assert!(coarse / fine > 3.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn damping_bound() {
        let grid = unit_grid(100);
        let forcing: Vec<Vec<f64>> = grid.nodes().map(|t| vec![t.cos(), -1.0, 0.5]).collect();
        let data = ModeData::new(grid, vec![0.3, -0.2, 1.0], forcing).unwrap();
        let traj = solve_modes(&TimeSeries::from_fn(grid, |t| 2.0 * t), &data).unwrap();
        for m in 1..=3 {
            let fmax = data.forcing().iter().map(|r| r[m - 1].abs()).fold(0.0, f64::max);
            for (t, c) in grid.nodes().zip(traj.mode(m)) {
                assert!(c.abs() <= data.initial()[m - 1].abs() + t * fmax + 1e-12);
            }
        }
    }
}
