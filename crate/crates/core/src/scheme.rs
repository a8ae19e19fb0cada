//! The explicit predictor-corrector backward sweep.
//!
//! One step from `t_{i+1}` to `t_i`, with `h = T/N`, `α ∈ (0, 1]` and
//! `t_{i+1-α} = t_i + (1 − α) h`:
//!
//! ```text
//! Y_{i+1-α} = E_{t_{i+1-α}}[ Y_{i+1} + α h f_{i+1} ]
//! Z_{i+1-α} = E_{t_{i+1-α}}[ (Y_{i+1} + α h f_{i+1}) ΔW_{i+1-α,i+1} ] / (α h)
//! Y_i       = E_{t_i}[ Y_{i+1} + h/(2α) f̃_{i+1-α} + h (1 − 1/(2α)) f_{i+1} ]
//! Z_i       = E_{t_i}[ 2/h Y_{i+1} ΔW_{i,i+1} + 1/α f̃_{i+1-α} ΔW_{i,i+1-α}
//!                      + (2α − 1)/α f_{i+1} ΔW_{i,i+1} − Z_{i+1} ]
//! ```
//!
//! where `f_{i+1} = f(t_{i+1}, Y_{i+1}, Z_{i+1})` and
//! `f̃_{i+1-α} = f(t_{i+1-α}, Y_{i+1-α}, Z_{i+1-α})`. The first two lines
//! (predictor) are evaluated on the spatial grid and splined into an
//! intermediate field; the last two (corrector) then read from both fields.
//! At `α = 1` the intermediate time coincides with `t_i` and the scheme is
//! the Crank-Nicolson scheme.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{build_grid, field_from_functions, SpatialGrid, TimeMesh, ValueField};
use crate::problems::FbsdeProblem;
use crate::quadrature::{hermite_rule, moments, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub alpha: f64,
    /// Gauss-Hermite order `K`.
    pub quadrature_order: usize,
    /// Grid half-width in standard deviations of `X_T − x0`.
    pub halfwidth_sigmas: f64,
    /// Number of spatial grid points (odd).
    pub grid_points: usize,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            quadrature_order: 12,
            halfwidth_sigmas: 6.0,
            grid_points: 513,
        }
    }
}

impl SchemeParams {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(1..=crate::quadrature::MAX_ORDER).contains(&self.quadrature_order) {
            return Err(Error::config(format!(
                "quadrature order must be in 1..={}, got {}",
                crate::quadrature::MAX_ORDER,
                self.quadrature_order
            )));
        }
        if !(self.halfwidth_sigmas.is_finite() && self.halfwidth_sigmas > 0.0) {
            return Err(Error::config(format!(
                "grid half-width in sigmas must be positive, got {}",
                self.halfwidth_sigmas
            )));
        }
        if self.grid_points < 5 || self.grid_points.is_multiple_of(2) {
            return Err(Error::config(format!(
                "grid point count must be odd and ≥ 5, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }
}

/// Everything a single step needs besides the fields themselves.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub problem: &'a FbsdeProblem,
    pub mesh: &'a TimeMesh,
    pub rule: &'a QuadratureRule,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    /// Spline evaluations outside the grid, over the whole sweep.
    pub out_of_domain: u64,
    /// Quadrature abscissae off the grid that were launched from a point
    /// inside the grid's core region. The grid construction keeps this at 0.
    pub core_out_of_domain: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub y0: f64,
    pub z0: f64,
    pub err_y: Option<f64>,
    pub err_z: Option<f64>,
    /// Fields at `t_0, …, t_N` when requested.
    pub fields: Option<Vec<ValueField>>,
    pub mesh: TimeMesh,
    pub grid: Arc<SpatialGrid>,
    pub diagnostics: Diagnostics,
}

/// Predicted `(Y, Z)` at `(t_{i+1-α}, x)`.
pub fn predictor(next: &ValueField, x: f64, i: usize, ctx: &StepContext<'_>) -> Result<(f64, f64)> {
    let mesh = ctx.mesh;
    let alpha_h = mesh.alpha() * mesh.step_size();
    let t_next = mesh.time(i + 1);
    let problem = ctx.problem;
    let ([y], [yw]) = moments(
        |xp| {
            let (y, z) = (next.y(xp)?, next.z(xp)?);
            Ok([y + alpha_h * problem.generator(t_next, y, z)])
        },
        x,
        mesh.intermediate_time(i),
        alpha_h,
        problem,
        ctx.rule,
    )?;
    Ok((y, yw / alpha_h))
}

/// Corrected `(Y, Z)` at `(t_i, x)` from the `t_{i+1}` field and the
/// predicted field at `t_{i+1-α}`.
pub fn corrector(
    next: &ValueField,
    mid: &ValueField,
    x: f64,
    i: usize,
    ctx: &StepContext<'_>,
) -> Result<(f64, f64)> {
    let mesh = ctx.mesh;
    let problem = ctx.problem;
    let (alpha, h) = (mesh.alpha(), mesh.step_size());
    let (t_i, t_mid, t_next) = (mesh.time(i), mesh.intermediate_time(i), mesh.time(i + 1));

    let ([f_mid], [f_mid_w]) = moments(
        |xp| Ok([problem.generator(t_mid, mid.y(xp)?, mid.z(xp)?)]),
        x,
        t_i,
        (1.0 - alpha) * h,
        problem,
        ctx.rule,
    )?;

    let end_weight = h * (1.0 - 0.5 / alpha);
    let ([y_part, _, _, z_next], [_, y_w, f_w, _]) = moments(
        |xp| {
            let (y, z) = (next.y(xp)?, next.z(xp)?);
            let f = problem.generator(t_next, y, z);
            Ok([y + end_weight * f, y, f, z])
        },
        x,
        t_i,
        h,
        problem,
        ctx.rule,
    )?;

    let y = f_mid * h / (2.0 * alpha) + y_part;
    let z = 2.0 / h * y_w + f_mid_w / alpha + (2.0 * alpha - 1.0) / alpha * f_w - z_next;
    Ok((y, z))
}

/// Counts quadrature abscissae that leave the grid for a hop launched at
/// `(t, x)` over `delta`, if `x` lies in the grid core.
fn core_escapes(grid: &SpatialGrid, x: f64, t: f64, delta: f64, ctx: &StepContext<'_>) -> u64 {
    if delta == 0.0 || !grid.in_core(x) {
        return 0;
    }
    let mean = x + ctx.problem.drift(t, x) * delta;
    let spread = ctx.problem.diffusion(t, x) * (2.0 * delta).sqrt();
    ctx.rule
        .nodes()
        .iter()
        .map(|&n| mean + spread * n)
        .filter(|&xp| xp < grid.lower() || xp > grid.upper())
        .count() as u64
}

fn sweep_level(
    grid: &SpatialGrid,
    level: usize,
    point: impl Fn(f64) -> Result<(f64, f64)> + Sync,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let values: Vec<(f64, f64)> = grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(index, &x)| {
            let (y, z) = point(x)?;
            if y.is_finite() && z.is_finite() {
                Ok((y, z))
            } else {
                Err(Error::NonFiniteField { level, index, x })
            }
        })
        .collect::<Result<_>>()?;
    Ok(values.into_iter().unzip())
}

struct StepOutput {
    field: ValueField,
    out_of_domain: u64,
    core_out_of_domain: u64,
}

fn step(next: &ValueField, i: usize, ctx: &StepContext<'_>) -> Result<StepOutput> {
    if next.time() != ctx.mesh.time(i + 1) {
        return Err(Error::config(format!(
            "field at t = {} cannot be stepped from level {}",
            next.time(),
            i + 1
        )));
    }
    let grid = next.grid().clone();
    let mesh = ctx.mesh;
    let h = mesh.step_size();

    let (y_mid, z_mid) = sweep_level(&grid, i, |x| predictor(next, x, i, ctx))?;
    let mid = ValueField::from_values(grid.clone(), mesh.intermediate_time(i), y_mid, z_mid)?;
    let (y, z) = sweep_level(&grid, i, |x| corrector(next, &mid, x, i, ctx))?;
    let field = ValueField::from_values(grid.clone(), mesh.time(i), y, z)?;

    let (t_i, t_mid) = (mesh.time(i), mesh.intermediate_time(i));
    let alpha = mesh.alpha();
    let core_out_of_domain = grid
        .points()
        .iter()
        .map(|&x| {
            core_escapes(&grid, x, t_mid, alpha * h, ctx)
                + core_escapes(&grid, x, t_i, (1.0 - alpha) * h, ctx)
                + core_escapes(&grid, x, t_i, h, ctx)
        })
        .sum();

    Ok(StepOutput {
        field,
        out_of_domain: next.out_of_domain_count() + mid.out_of_domain_count(),
        core_out_of_domain,
    })
}

/// One backward step: the field at `t_i` from the field at `t_{i+1}`.
pub fn backward_step(next: &ValueField, i: usize, ctx: &StepContext<'_>) -> Result<ValueField> {
    step(next, i, ctx).map(|s| s.field)
}

/// Terminal field `(Φ, ∂ₓu σ)` at `t_N` on `grid`.
pub fn terminal_field(problem: &FbsdeProblem, grid: Arc<SpatialGrid>) -> Result<ValueField> {
    field_from_functions(
        grid,
        problem.terminal_time,
        |x| problem.terminal_y(x),
        |x| problem.terminal_z(x),
    )
}

/// Runs the full backward recursion on `N` steps and reads `(Y_0, Z_0)` at `x0`.
pub fn solve(problem: &FbsdeProblem, params: &SchemeParams, steps: usize, keep_fields: bool) -> Result<SolveResult> {
    let started = Instant::now();
    params.validate()?;
    let mesh = TimeMesh::new(steps, problem.terminal_time, params.alpha)?;
    let rule = hermite_rule(params.quadrature_order)?;
    let grid = Arc::new(build_grid(problem, params, &mesh, &rule)?);
    let ctx = StepContext { problem, mesh: &mesh, rule: &rule };

    let mut current = terminal_field(problem, grid.clone())?;
    let mut kept = Vec::new();
    let mut diagnostics = Diagnostics::default();
    for i in (0..steps).rev() {
        let out = step(&current, i, &ctx)?;
        diagnostics.out_of_domain += out.out_of_domain;
        diagnostics.core_out_of_domain += out.core_out_of_domain;
        let previous = std::mem::replace(&mut current, out.field);
        if keep_fields {
            kept.push(previous);
        }
    }
    let y0 = current.y(problem.x0)?;
    let z0 = current.z(problem.x0)?;
    diagnostics.out_of_domain += current.out_of_domain_count();
    let fields = keep_fields.then(|| {
        kept.push(current);
        kept.reverse();
        kept
    });

    let err_y = problem.exact_y(0.0, problem.x0).map(|y| (y - y0).abs());
    let err_z = problem.exact_z(0.0, problem.x0).map(|z| (z - z0).abs());
    diagnostics.wall_time = started.elapsed();
    Ok(SolveResult { y0, z0, err_y, err_z, fields, mesh, grid, diagnostics })
}
