use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{check_coefficient_floor, FluxData, FunctionSpec, ProblemSpec, TimeGrid};

use super::FieldSnapshot;

/// Output of [`fd_solve`]: one snapshot per time node and the flux at `x = 0`.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub snapshots: Vec<FieldSnapshot>,
    pub flux: FluxData,
}

/// Crank–Nicolson solution of `u_t - a(t) u_xx = f` with Dirichlet data,
/// using `x_count` intervals on `[0, pi]` and the steps of `grid`.
///
/// `a` is evaluated at half steps. The flux uses the one-sided stencil
/// `(-3 u_0 + 4 u_1 - u_2) / (2 dx)`.
pub fn fd_solve(spec: &ProblemSpec, a: &FunctionSpec, x_count: usize, grid: &TimeGrid) -> Result<FdSolution> {
    if x_count < 8 {
        return Err(Error::Domain(format!("x_count must be >= 8, got {x_count}")));
    }
    spec.validate()?;
    check_coefficient_floor(a, grid, spec.a_floor)?;
    let t_max = grid.t_max();
    spec.u1.check_domain(0.0, t_max, "u1")?;
    spec.u2.check_domain(0.0, t_max, "u2")?;

    let dx = PI / x_count as f64;
    let dt = grid.dt();
    let x: Vec<f64> = (0..=x_count)
        .map(|k| if k == x_count { PI } else { k as f64 * dx })
        .collect();
    let interior = x_count - 1;

    let mut u: Vec<f64> = x.iter().map(|&xk| spec.h.eval(xk)).collect();
    u[0] = spec.u1.eval(0.0);
    u[x_count] = spec.u2.eval(0.0);

    let source = |t: f64| -> Vec<f64> { x[1..x_count].iter().map(|&xk| spec.f.eval(xk, t)).collect() };

    let mut snapshots = Vec::with_capacity(grid.len());
    let mut flux = Vec::with_capacity(grid.len());
    let mut record = |t: f64, u: &[f64]| {
        flux.push((-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx));
        snapshots.push(FieldSnapshot {
            t,
            x: x.clone(),
            values: u.to_vec(),
        });
    };
    record(0.0, &u);

    let mut f_old = source(0.0);
    let mut rhs = vec![0.0; interior];
    let mut scratch = vec![0.0; interior];
    for step in 0..grid.steps() {
        let (t_old, t_new) = (grid.t(step), grid.t(step + 1));
        let lambda = a.eval(t_old + 0.5 * dt) * dt / (dx * dx);
        let f_new = source(t_new);
        let left = spec.u1.eval(t_new);
        let right = spec.u2.eval(t_new);
        for j in 0..interior {
            let k = j + 1;
            rhs[j] = (1.0 - lambda) * u[k] + 0.5 * lambda * (u[k - 1] + u[k + 1]) + 0.5 * dt * (f_old[j] + f_new[j]);
        }
        rhs[0] += 0.5 * lambda * left;
        rhs[interior - 1] += 0.5 * lambda * right;
        solve_symmetric_tridiagonal(1.0 + lambda, -0.5 * lambda, &mut rhs, &mut scratch);

        u[0] = left;
        u[1..x_count].copy_from_slice(&rhs);
        u[x_count] = right;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::OracleFailure(format!("non-finite field at t = {t_new}")));
        }
        record(t_new, &u);
        f_old = f_new;
    }

    Ok(FdSolution {
        snapshots,
        flux: FluxData::new(*grid, flux)?,
    })
}

/// Thomas algorithm for a constant tridiagonal matrix with diagonal `diag`
/// and both off-diagonals `off`; `rhs` is overwritten with the solution.
fn solve_symmetric_tridiagonal(diag: f64, off: f64, rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    let mut denom = diag;
    scratch[0] = off / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag - off * scratch[i - 1];
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}
