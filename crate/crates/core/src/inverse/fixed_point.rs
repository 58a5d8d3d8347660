use super::{differentiate, ClampPolicy, InverseResult, Method, Relaxation, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{
    corrected_flux, nonnegativity_verdict, positivity_verdict, FluxData, TimeGrid, TimeSeries, Verdict,
};
use crate::spectral::{eval_q0, eval_q0_derivative, invert_q0, LiftedProblem, SQRT_2_OVER_PI};

/// Discretized Volterra operator on a fixed time grid.
struct VolterraOperator<'a> {
    grid: TimeGrid,
    initial: &'a [f64],
    /// `m F_m(t_j)` per node.
    weighted_forcing: Vec<Vec<f64>>,
    /// `m^3 F_m(t_j)` per node.
    cubic_forcing: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    opts: &'a SolverOptions,
}

impl<'a> VolterraOperator<'a> {
    fn new(data: &FluxData, lifted: &'a LiftedProblem, opts: &'a SolverOptions) -> Result<Self> {
        opts.validate()?;
        let grid = *lifted.grid();
        if data.grid != grid {
            return Err(Error::Dimension(
                "flux data and lifted problem use different grids".into(),
            ));
        }
        if opts.modes != lifted.modes() {
            return Err(Error::Dimension(format!(
                "solver expects {} modes but the lifted problem has {}",
                opts.modes,
                lifted.modes()
            )));
        }
        let mode_data = &lifted.mode_data;
        if positivity_verdict(mode_data.initial()) == Verdict::Fail {
            return Err(Error::AssumptionViolated(
                "initial coefficients H_m must be nonnegative with one positive".into(),
            ));
        }
        if nonnegativity_verdict(mode_data.forcing().iter().flatten()) == Verdict::Fail {
            return Err(Error::AssumptionViolated(
                "forcing coefficients F_m(t) must be nonnegative".into(),
            ));
        }
        let moment = |power: i32| -> Vec<Vec<f64>> {
            mode_data
                .forcing()
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(k, f)| ((k + 1) as f64).powi(power) * f)
                        .collect()
                })
                .collect()
        };
        let weighted_forcing = moment(1);
        let cubic_forcing = moment(3);
        let mut rhs = corrected_flux(lifted, data);
        if let Some(width) = opts.smoothing_window.filter(|w| *w > 1) {
            rhs = moving_average(&rhs, width);
        }
        Ok(Self {
            grid,
            initial: mode_data.initial(),
            weighted_forcing,
            cubic_forcing,
            rhs,
            opts,
        })
    }

    /// `Q(z, t_j)` for `z >= 0`.
    fn kernel(&self, j: usize, z: f64) -> f64 {
        SQRT_2_OVER_PI * decaying_sum(&self.weighted_forcing[j], z)
    }

    /// `dQ/dz (z, t_j)` for `z >= 0`.
    fn kernel_slope(&self, j: usize, z: f64) -> f64 {
        -SQRT_2_OVER_PI * decaying_sum(&self.cubic_forcing[j], z)
    }

    fn argument(z: f64) -> f64 {
        z.max(0.0)
    }

    /// Trapezoid approximation of `int_0^{t_i} Q(value - A(s), s) ds`,
    /// using `a[j]` for `j < i` and `value` at `j = i`.
    fn memory(&self, a: &[f64], i: usize, value: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..i {
            acc += self.grid.trapezoid_weight(j, i) * self.kernel(j, Self::argument(value - a[j]));
        }
        acc + self.grid.trapezoid_weight(i, i) * self.kernel(i, 0.0)
    }

    fn invert(&self, i: usize, y: f64) -> Result<f64> {
        match invert_q0(self.initial, y, self.opts.inversion_tol) {
            Ok(z) => Ok(z),
            Err(Error::OutOfRange { value, upper }) if self.opts.saturate && value > upper => Ok(0.0),
            Err(Error::OutOfRange { value, upper }) => Err(Error::DataInconsistent {
                node: i,
                t: self.grid.t(i),
                reason: if value > upper {
                    format!("corrected flux {value} exceeds Q0(0) = {upper}")
                } else {
                    format!("right-hand side {value} is not positive")
                },
            }),
            Err(e) => Err(e),
        }
    }

    /// `dT_i / dA_i`: sensitivity of the map at node `i` to its own value.
    ///
    /// Nonpositive when the forcing is nonnegative, so undamped sweeps
    /// oscillate and stall once it reaches -1.
    fn self_sensitivity(&self, a: &[f64], i: usize, image: f64) -> f64 {
        let mut slope = 0.0;
        for j in 0..i {
            let z = a[i] - a[j];
            if z > 0.0 {
                slope += self.grid.trapezoid_weight(j, i) * self.kernel_slope(j, z);
            }
        }
        let q0_slope = eval_q0_derivative(self.initial, image.max(0.0)).unwrap_or(0.0);
        if q0_slope == 0.0 || slope == 0.0 {
            0.0
        } else {
            -slope / q0_slope
        }
    }

    /// Relaxation weight at node `i` for an update from `a[i]` to `image`.
    fn weight(&self, a: &[f64], i: usize, image: f64) -> f64 {
        match self.opts.relaxation {
            Relaxation::None => 1.0,
            Relaxation::Fixed(w) => w,
            Relaxation::Diagonal => {
                let mu = self.self_sensitivity(a, i, image);
                1.0 / (1.0 + (-mu).max(0.0))
            }
        }
    }

    /// Undamped map `T(A)_i = Q0^{-1}(g~_i - int_0^{t_i} Q(A_i - A(s), s) ds)`.
    fn image(&self, a: &[f64], i: usize) -> Result<f64> {
        self.invert(i, self.rhs[i] - self.memory(a, i, a[i]))
    }

    /// Relaxed update at node `i`. When the memory term of the current iterate
    /// already exceeds `g~_i` the map is undefined there; relaxed solvers then
    /// move to the root of `Q0(z) + memory(z) = g~_i` with the other nodes held.
    fn relaxed_update(&self, a: &[f64], i: usize) -> Result<(f64, f64)> {
        let y = self.rhs[i] - self.memory(a, i, a[i]);
        if y <= 0.0 && self.opts.relaxation != Relaxation::None {
            let z = self.node_root(a, i)?;
            return Ok((z, (z - a[i]).abs()));
        }
        let image = self.invert(i, y)?;
        Ok((a[i] + self.weight(a, i, image) * (image - a[i]), (image - a[i]).abs()))
    }

    fn node_root(&self, a: &[f64], i: usize) -> Result<f64> {
        let excess =
            |z: f64| -> f64 { eval_q0(self.initial, z).unwrap_or(f64::NAN) + self.memory(a, i, z) - self.rhs[i] };
        let mut lo = a[i].max(0.0);
        let mut hi = lo.max(1.0);
        while excess(hi) >= 0.0 {
            if hi > 1e6 {
                return Err(Error::DataInconsistent {
                    node: i,
                    t: self.grid.t(i),
                    reason: format!("corrected flux {} is below the forcing contribution", self.rhs[i]),
                });
            }
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= self.opts.inversion_tol * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Undamped map applied to the whole iterate.
    fn apply(&self, a: &[f64]) -> Result<Vec<f64>> {
        let mut next = vec![0.0; a.len()];
        for i in 1..a.len() {
            next[i] = self.image(a, i)?;
        }
        if self.opts.clamp_policy == ClampPolicy::MonotoneProjection {
            running_max(&mut next);
        }
        Ok(next)
    }

    /// One relaxed sweep; returns the new iterate and `sup |T(A) - A|`.
    fn sweep(&self, a: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut next = vec![0.0; a.len()];
        let mut defect = 0.0f64;
        for i in 1..a.len() {
            let (value, gap) = self.relaxed_update(a, i)?;
            defect = defect.max(gap);
            next[i] = value;
        }
        if self.opts.clamp_policy == ClampPolicy::MonotoneProjection {
            running_max(&mut next);
        }
        Ok((next, defect))
    }

    fn initial_iterate(&self) -> Result<Vec<f64>> {
        // node 0 only certifies that g~(0) lies in the range of Q0
        self.invert(0, self.rhs[0])?;
        let mut a = vec![0.0; self.grid.len()];
        for (i, slot) in a.iter_mut().enumerate().skip(1) {
            *slot = self.invert(i, self.rhs[i])?;
        }
        if self.opts.clamp_policy == ClampPolicy::MonotoneProjection {
            running_max(&mut a);
        }
        Ok(a)
    }

    fn equation_residual(&self, a: &[f64]) -> f64 {
        (0..a.len())
            .map(|i| {
                let q0 = eval_q0(self.initial, a[i].max(0.0)).unwrap_or(f64::NAN);
                let lhs = q0 + if i == 0 { 0.0 } else { self.memory(a, i, a[i]) };
                (lhs - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    fn picard(&self) -> Result<(Vec<f64>, Vec<f64>, bool)> {
        let mut a = self.initial_iterate()?;
        let mut history = Vec::new();
        for _ in 0..self.opts.max_iter {
            let (next, defect) = self.sweep(&a)?;
            history.push(sup_diff(&next, &a));
            a = next;
            if defect <= self.opts.tol {
                return Ok((a, history, true));
            }
        }
        Ok((a, history, false))
    }

    fn march(&self) -> Result<(Vec<f64>, Vec<f64>, bool)> {
        self.invert(0, self.rhs[0])?;
        let n = self.grid.len();
        let mut a = vec![0.0; n];
        let mut history: Vec<f64> = Vec::new();
        let mut converged = true;
        for i in 1..n {
            let mut z = self.invert(i, self.rhs[i])?;
            let mut node_converged = false;
            for k in 0..self.opts.max_iter {
                a[i] = z;
                let (mut next, defect) = self.relaxed_update(&a, i)?;
                if self.opts.clamp_policy == ClampPolicy::MonotoneProjection {
                    next = next.max(a[i - 1]);
                }
                let update = (next - z).abs();
                if history.len() <= k {
                    history.push(0.0);
                }
                history[k] = history[k].max(update);
                z = next;
                if defect <= self.opts.tol {
                    node_converged = true;
                    break;
                }
            }
            converged &= node_converged;
            a[i] = z;
        }
        Ok((a, history, converged))
    }
}

/// `sum_m c_m exp(-m^2 z)`.
fn decaying_sum(coefs: &[f64], z: f64) -> f64 {
    let q = (-z).exp();
    let q2 = q * q;
    let mut ratio = q;
    let mut weight = 1.0;
    let mut acc = 0.0;
    for c in coefs {
        weight *= ratio;
        ratio *= q2;
        acc += c * weight;
        if weight == 0.0 {
            break;
        }
    }
    acc
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn running_max(values: &mut [f64]) {
    for i in 1..values.len() {
        values[i] = values[i].max(values[i - 1]);
    }
}

fn clamped_mass(a: &[f64]) -> f64 {
    let mut mass = 0.0;
    for i in 1..a.len() {
        for j in 0..i {
            mass += (a[j] - a[i]).max(0.0);
        }
    }
    mass
}

/// Centered moving average; the window shrinks symmetrically at the ends.
pub fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let reach = half.min(i).min(n - 1 - i);
            let window = &values[i - reach..=i + reach];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}

/// Applies the discrete fixed-point map once to `a_integral`.
pub fn fixed_point_map(
    data: &FluxData,
    lifted: &LiftedProblem,
    opts: &SolverOptions,
    a_integral: &TimeSeries,
) -> Result<TimeSeries> {
    let op = VolterraOperator::new(data, lifted, opts)?;
    TimeSeries::new(op.grid, op.apply(a_integral.values())?)
}

/// Recovers `A` and `a` from the flux `data`.
///
/// Returns `Ok` with `converged = false` when `max_iter` is exhausted; use
/// [`InverseResult::into_converged`] to treat that as an error. A right-hand
/// side outside the range of `Q0` yields [`Error::DataInconsistent`].
pub fn fixed_point_solve(data: &FluxData, lifted: &LiftedProblem, opts: &SolverOptions) -> Result<InverseResult> {
    let op = VolterraOperator::new(data, lifted, opts)?;
    let (a, residual_history, converged) = match opts.method {
        Method::PicardGlobal => op.picard()?,
        Method::VolterraMarching => op.march()?,
    };
    let upper = eval_q0(op.initial, 0.0)?;
    let a_integral = TimeSeries::new(op.grid, a)?;
    Ok(InverseResult {
        a: differentiate(&a_integral),
        equation_residual: op.equation_residual(a_integral.values()),
        clamped_mass: clamped_mass(a_integral.values()),
        initial_mismatch: (op.rhs[0] - upper).abs(),
        iterations_used: residual_history.len(),
        residual_history,
        converged,
        a_integral,
        method: opts.method,
    })
}
