//! Convergence-rate estimation and convergence studies.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::FbsdeProblem;
use crate::scheme::{solve, SchemeParams};

/// Errors below this are treated as round-off floors and left out of the
/// rate regression.
pub const ERROR_FLOOR: f64 = 1e-11;

/// Least-squares slope of `ln(errs)` against `ln(hs)`.
pub fn convergence_rate(hs: &[f64], errs: &[f64]) -> Result<f64> {
    log_log_fit(hs, errs).map(|(slope, _)| slope)
}

/// Ordinary least-squares fit `ln(err) ≈ slope · ln(h) + intercept`.
pub fn log_log_fit(hs: &[f64], errs: &[f64]) -> Result<(f64, f64)> {
    if hs.len() != errs.len() {
        return Err(Error::config(format!(
            "step sizes and errors differ in length ({} vs {})",
            hs.len(),
            errs.len()
        )));
    }
    if hs.len() < 2 {
        return Err(Error::config("a convergence rate needs at least two points"));
    }
    if hs.iter().chain(errs).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::config("step sizes and errors must be positive and finite"));
    }
    let n = hs.len() as f64;
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::config("step sizes must not all be equal"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub h: f64,
    pub err_y: f64,
    pub err_z: f64,
    pub wall_time_seconds: f64,
}

impl ConvergenceRow {
    pub fn y_at_floor(&self) -> bool {
        self.err_y < ERROR_FLOOR
    }

    pub fn z_at_floor(&self) -> bool {
        self.err_z < ERROR_FLOOR
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub alpha: f64,
    /// Sorted by ascending `N`.
    pub rows: Vec<ConvergenceRow>,
    pub cr_y: Option<f64>,
    pub cr_z: Option<f64>,
}

impl ConvergenceReport {
    /// `(h, err)` pairs above the floor for the selected component.
    pub fn regression_points(&self, pick: fn(&ConvergenceRow) -> f64) -> (Vec<f64>, Vec<f64>) {
        self.rows
            .iter()
            .map(|r| (r.h, pick(r)))
            .filter(|&(_, e)| e >= ERROR_FLOOR)
            .unzip()
    }

    /// Assembles a report from rows, computing both rates from the rows
    /// whose errors are above [`ERROR_FLOOR`].
    pub fn from_rows(problem: impl Into<String>, alpha: f64, mut rows: Vec<ConvergenceRow>) -> Self {
        rows.sort_by_key(|r| r.steps);
        let mut report = Self { problem: problem.into(), alpha, rows, cr_y: None, cr_z: None };
        let rate = |pick: fn(&ConvergenceRow) -> f64| {
            let (hs, es) = report.regression_points(pick);
            (hs.len() >= 2).then(|| convergence_rate(&hs, &es).ok()).flatten()
        };
        let (cr_y, cr_z) = (rate(|r| r.err_y), rate(|r| r.err_z));
        report.cr_y = cr_y;
        report.cr_z = cr_z;
        report
    }
}

/// Solves `problem` for each `N` in `steps` and regresses the errors at
/// `(0, x0)` against `h`.
pub fn run_convergence_study(
    problem: &FbsdeProblem,
    params: &SchemeParams,
    steps: &[usize],
) -> Result<ConvergenceReport> {
    if !problem.has_exact_solution() {
        return Err(Error::config(format!(
            "problem '{}' has no exact solution to measure errors against",
            problem.name
        )));
    }
    if steps.is_empty() {
        return Err(Error::config("convergence study needs at least one N"));
    }
    let rows = steps
        .par_iter()
        .map(|&n| {
            let r = solve(problem, params, n, false)?;
            Ok(ConvergenceRow {
                steps: n,
                h: r.mesh.step_size(),
                err_y: r.err_y.expect("exact solution present"),
                err_z: r.err_z.expect("exact solution present"),
                wall_time_seconds: r.diagnostics.wall_time.as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_rows(problem.name.clone(), params.alpha, rows))
}
