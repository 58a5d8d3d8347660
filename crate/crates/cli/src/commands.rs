use std::path::{Path, PathBuf};

use diffusivity_core::forward::fd_solve;
use diffusivity_core::inverse::{
    check_closed_form_scenario, closed_form_recover, contraction_estimate, ContractionReport,
};
use diffusivity_core::{
    accumulate_a, fixed_point_solve, lift, synthesize, validate_assumptions, FluxData, FunctionSpec, InverseResult,
    TimeGrid, TimeSeries,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig, Scenario};
use crate::error::CliError;
use crate::output::{read_flux_csv, time_label, write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Synthesize flux and field snapshots from `problem.a_true`.
    Forward,
    /// Recover A and a from flux data.
    Invert,
    /// Synthesize, invert and compare against `problem.a_true`.
    Roundtrip,
    /// Recover a from the single-mode closed form.
    Closedform,
    /// Check the input assumptions and write the verdicts.
    Validate,
}

/// Files written by a successful run, plus one-line summaries for stdout.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match command {
        Command::Forward => forward(cfg, out),
        Command::Invert => invert(cfg, out),
        Command::Roundtrip => roundtrip(cfg, out),
        Command::Closedform => closedform(cfg, out),
        Command::Validate => validate(cfg, out),
    }
}

fn missing(key: &str, message: &str) -> CliError {
    CliError::Config(ConfigError {
        key: key.to_string(),
        line: None,
        message: message.to_string(),
    })
}

fn a_true<'a>(cfg: &'a RunConfig, command: &str) -> Result<&'a FunctionSpec, CliError> {
    cfg.problem
        .a_true
        .as_ref()
        .ok_or_else(|| missing("problem.a_true", &format!("`{command}` requires problem.a_true")))
}

fn add_noise(flux: FluxData, noise: f64, seed: u64) -> Result<FluxData, CliError> {
    if noise == 0.0 {
        return Ok(flux);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = flux.g.iter().map(|g| g + rng.random_range(-noise..=noise)).collect();
    Ok(FluxData::new(flux.grid, g)?)
}

fn flux_from_csv(path: &Path, grid: &TimeGrid) -> Result<FluxData, CliError> {
    let (ts, gs) = read_flux_csv(path)?;
    let input = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let table = FunctionSpec::table(ts.clone(), gs).map_err(|e| input(e.to_string()))?;
    let (lo, hi) = (ts[0], ts[ts.len() - 1]);
    let slack = 1e-12 * grid.t_max();
    if lo > slack || hi < grid.t_max() - slack {
        return Err(input(format!(
            "samples cover [{lo}, {hi}] but the grid needs [0, {}]",
            grid.t_max()
        )));
    }
    Ok(FluxData::from_fn(*grid, |t| table.eval(t.clamp(lo, hi)))?)
}

/// Flux from `data.g_csv` if given, else synthesized from `problem.a_true`.
fn acquire_flux(cfg: &RunConfig, command: &str) -> Result<(FluxData, String), CliError> {
    if let Some(path) = &cfg.data.g_csv {
        let flux = flux_from_csv(path, &cfg.grid)?;
        return Ok((
            flux,
            format!("{} (linearly interpolated onto the grid)", path.display()),
        ));
    }
    if cfg.problem.a_true.is_none() {
        return Err(missing(
            "data.g_csv",
            &format!("`{command}` requires data.g_csv or problem.a_true"),
        ));
    }
    let flux = synthesize(&cfg.problem, &cfg.grid, cfg.solver.modes)?.flux;
    let source = if cfg.data.noise > 0.0 {
        format!(
            "synthesized from problem.a_true with uniform noise {} (seed {})",
            cfg.data.noise, cfg.data.seed
        )
    } else {
        "synthesized from problem.a_true".to_string()
    };
    Ok((add_noise(flux, cfg.data.noise, cfg.data.seed)?, source))
}

fn write_flux(out: &Path, flux: &FluxData) -> Result<PathBuf, CliError> {
    write_csv(
        out,
        "g.csv",
        &["t", "g"],
        flux.as_series().iter().map(|(t, g)| vec![t, g]),
    )
}

fn nearest_node(grid: &TimeGrid, t: f64) -> usize {
    ((t / grid.dt()).round() as usize).min(grid.steps())
}

#[derive(Serialize)]
struct OracleSummary {
    x_count: usize,
    flux_sup_gap: f64,
    field_relative_l2: f64,
    tolerance: f64,
}

fn forward(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let a = a_true(cfg, "forward")?;
    let syn = synthesize(&cfg.problem, &cfg.grid, cfg.solver.modes)?;
    let mut outcome = Outcome::default();
    outcome.files.push(write_flux(out, &syn.flux)?);
    let mut last = None;
    for &t in &cfg.io.snapshots {
        let idx = nearest_node(&cfg.grid, t);
        let field = syn.field(cfg.io.x_points, idx);
        let name = format!("field_{}.csv", time_label(cfg.grid.t(idx)));
        outcome.files.push(write_csv(
            out,
            &name,
            &["x", "u"],
            field.x.iter().zip(&field.values).map(|(x, u)| vec![*x, *u]),
        )?);
        last = Some(idx);
    }
    if cfg.oracle.check {
        let fd = fd_solve(&cfg.problem, a, cfg.oracle.x_count, &cfg.grid)?;
        let gap = syn.flux.as_series().max_abs_diff(&fd.flux.as_series());
        let idx = last.unwrap_or(cfg.grid.steps());
        let oracle = &fd.snapshots[idx];
        let spectral = diffusivity_core::reconstruct_u(&syn.trajectory, &syn.lifted, &oracle.x, idx);
        let summary = OracleSummary {
            x_count: cfg.oracle.x_count,
            flux_sup_gap: gap,
            field_relative_l2: spectral.relative_l2(oracle),
            tolerance: cfg.oracle.tolerance,
        };
        outcome.files.push(write_json(out, "oracle.json", &summary)?);
        if !(gap <= cfg.oracle.tolerance) {
            return Err(CliError::Oracle(format!(
                "flux differs from the finite-difference solution by {gap:e} (tolerance {:e})",
                cfg.oracle.tolerance
            )));
        }
        outcome.notes.push(format!("oracle flux gap {gap:.3e}"));
    }
    outcome
        .notes
        .push(format!("g(t_max) = {:.16e}", syn.flux.g[cfg.grid.steps()]));
    Ok(outcome)
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    data_source: &'a str,
    method: diffusivity_core::Method,
    converged: bool,
    iterations: usize,
    residual_history: &'a [f64],
    equation_residual: f64,
    clamped_mass: f64,
    initial_mismatch: f64,
    contraction: Option<ContractionReport>,
}

fn solve(cfg: &RunConfig, flux: &FluxData) -> Result<(InverseResult, Option<ContractionReport>), CliError> {
    let lifted = lift(&cfg.problem, &cfg.grid, cfg.solver.modes)?;
    let result = fixed_point_solve(flux, &lifted, &cfg.solver)?;
    let contraction = contraction_estimate(&lifted, flux, &cfg.solver).ok();
    Ok((result, contraction))
}

fn write_result(
    out: &Path,
    command: &str,
    source: &str,
    result: &InverseResult,
    contraction: Option<ContractionReport>,
    outcome: &mut Outcome,
) -> Result<(), CliError> {
    outcome.files.push(write_csv(
        out,
        "result.csv",
        &["t", "A", "a"],
        result
            .a_integral
            .iter()
            .zip(result.a.values())
            .map(|((t, big), a)| vec![t, big, *a]),
    )?);
    let report = Report {
        command,
        data_source: source,
        method: result.method,
        converged: result.converged,
        iterations: result.iterations_used,
        residual_history: &result.residual_history,
        equation_residual: result.equation_residual,
        clamped_mass: result.clamped_mass,
        initial_mismatch: result.initial_mismatch,
        contraction,
    };
    outcome.files.push(write_json(out, "report.json", &report)?);
    outcome.notes.push(format!(
        "{} after {} iterations, equation residual {:.3e}",
        if result.converged { "converged" } else { "not converged" },
        result.iterations_used,
        result.equation_residual
    ));
    Ok(())
}

fn invert(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let (flux, source) = acquire_flux(cfg, "invert")?;
    let (result, contraction) = solve(cfg, &flux)?;
    let mut outcome = Outcome::default();
    write_result(out, "invert", &source, &result, contraction, &mut outcome)?;
    result.into_converged()?;
    Ok(outcome)
}

#[derive(Serialize)]
struct Summary {
    a_integral_sup_error: f64,
    a_integral_l2_error: f64,
    a_interior_sup_error: f64,
    a_interior_l2_error: f64,
    a_interior_relative_sup_error: f64,
    converged: bool,
    iterations: usize,
    noise: f64,
}

/// Discrete `L2(0, t_max)` norm by the trapezoid rule.
fn l2(errors: &[f64], dt: f64) -> f64 {
    let squares: Vec<f64> = errors.iter().map(|e| e * e).collect();
    diffusivity_core::quadrature::trapezoid(&squares, dt).sqrt()
}

fn roundtrip(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let a = a_true(cfg, "roundtrip")?;
    let syn = synthesize(&cfg.problem, &cfg.grid, cfg.solver.modes)?;
    let flux = add_noise(syn.flux.clone(), cfg.data.noise, cfg.data.seed)?;
    let (result, contraction) = solve(cfg, &flux)?;

    let mut outcome = Outcome::default();
    outcome.files.push(write_flux(out, &flux)?);
    write_result(
        out,
        "roundtrip",
        "synthesized from problem.a_true",
        &result,
        contraction,
        &mut outcome,
    )?;

    let exact_integral = accumulate_a(a, &cfg.grid)?;
    let exact_a = TimeSeries::from_fn(cfg.grid, |t| a.eval(t));
    let big_errors: Vec<f64> = result
        .a_integral
        .values()
        .iter()
        .zip(exact_integral.values())
        .map(|(r, e)| r - e)
        .collect();
    let n = cfg.grid.steps();
    let interior: Vec<f64> = (1..n).map(|i| result.a[i] - exact_a[i]).collect();
    let summary = Summary {
        a_integral_sup_error: big_errors.iter().fold(0.0, |m, e| m.max(e.abs())),
        a_integral_l2_error: l2(&big_errors, cfg.grid.dt()),
        a_interior_sup_error: interior.iter().fold(0.0, |m, e| m.max(e.abs())),
        a_interior_l2_error: l2(&interior, cfg.grid.dt()),
        a_interior_relative_sup_error: (1..n)
            .map(|i| ((result.a[i] - exact_a[i]) / exact_a[i]).abs())
            .fold(0.0, f64::max),
        converged: result.converged,
        iterations: result.iterations_used,
        noise: cfg.data.noise,
    };
    outcome.files.push(write_json(out, "summary.json", &summary)?);
    outcome.notes.push(format!(
        "sup |A - A_true| = {:.3e}, interior sup |a - a_true| = {:.3e}",
        summary.a_integral_sup_error, summary.a_interior_sup_error
    ));
    result.into_converged()?;
    Ok(outcome)
}

fn closedform(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    if cfg.scenario != Some(Scenario::ClosedForm) {
        return Err(missing(
            "problem.scenario",
            "`closedform` requires problem.scenario = \"closed_form\"",
        ));
    }
    check_closed_form_scenario(&cfg.problem, &cfg.grid).map_err(|e| missing("problem", &e.to_string()))?;
    let (flux, _) = acquire_flux(cfg, "closedform")?;
    let curve = closed_form_recover(&flux, cfg.t_min)?;
    let mut outcome = Outcome::default();
    outcome.files.push(write_csv(
        out,
        "closedform.csv",
        &["t", "a"],
        curve.iter().map(|(t, a)| vec![t, a]),
    )?);
    outcome
        .notes
        .push(format!("recovered a on [{}, {}]", cfg.t_min, cfg.grid.t_max()));
    Ok(outcome)
}

fn validate(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let (flux, _) = acquire_flux(cfg, "validate")?;
    let report = validate_assumptions(&cfg.problem, &flux, cfg.solver.modes)?;
    let mut outcome = Outcome::default();
    outcome.files.push(write_json(out, "assumptions.json", &report)?);
    outcome.notes.push(format!(
        "h_coeff_positivity: {}, g_positivity: {}, f_coeff_nonnegativity: {}, cubic_sum_bound: {}",
        report.h_coeff_positivity, report.g_positivity, report.f_coeff_nonnegativity, report.cubic_sum_bound
    ));
    if report.truncation_warning {
        outcome.notes.push(format!(
            "warning: truncation tail estimate {:.3e}",
            report.truncation_tail
        ));
    }
    Ok(outcome)
}
