//! Time mesh, spatial grid, and the per-level value fields `(Y, Z)(x)`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::FbsdeProblem;
use crate::quadrature::QuadratureRule;
use crate::scheme::SchemeParams;
use crate::spline::CubicSpline;

/// Uniform mesh `t_i = i T / N` with the interior times `t_i + (1 − α) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMesh {
    steps: usize,
    terminal_time: f64,
    alpha: f64,
}

impl TimeMesh {
    pub fn new(steps: usize, terminal_time: f64, alpha: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::config("number of time steps must be ≥ 1"));
        }
        if !(terminal_time.is_finite() && terminal_time > 0.0) {
            return Err(Error::config(format!("terminal time must be positive, got {terminal_time}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self { steps, terminal_time, alpha })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn terminal_time(&self) -> f64 {
        self.terminal_time
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn step_size(&self) -> f64 {
        self.terminal_time / self.steps as f64
    }

    /// `t_i`, computed as `i T / N` so that `t_N = T` exactly.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.terminal_time
        } else {
            i as f64 * self.terminal_time / self.steps as f64
        }
    }

    /// `t_{i+1-α} = t_i + (1 − α) h`.
    pub fn intermediate_time(&self, i: usize) -> f64 {
        self.time(i) + (1.0 - self.alpha) * self.step_size()
    }
}

/// Uniform grid of `M` (odd) points symmetric about `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    center: f64,
    half_width: f64,
    core_radius: f64,
    points: Vec<f64>,
}

impl SpatialGrid {
    /// `core_radius` is the distance from `center` within which every
    /// one-step quadrature hop is guaranteed to stay on the grid.
    pub fn new(center: f64, half_width: f64, core_radius: f64, count: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::config(format!("grid half-width must be positive, got {half_width}")));
        }
        if count < 5 || count.is_multiple_of(2) {
            return Err(Error::config(format!("grid point count must be odd and ≥ 5, got {count}")));
        }
        if !center.is_finite() {
            return Err(Error::config("grid center must be finite"));
        }
        let intervals = (count - 1) as f64;
        let mid = (count - 1) / 2;
        let points = (0..count)
            .map(|j| {
                if j == mid {
                    center
                } else {
                    let offset = (2.0 * j as f64 - intervals) / intervals * half_width;
                    center + offset
                }
            })
            .collect();
        Ok(Self {
            center,
            half_width,
            core_radius: core_radius.clamp(0.0, half_width),
            points,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points.len() - 1) as f64
    }

    /// Index of the center point (`x0`).
    pub fn center_index(&self) -> usize {
        (self.points.len() - 1) / 2
    }

    pub fn lower(&self) -> f64 {
        self.points[0]
    }

    pub fn upper(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn in_core(&self, x: f64) -> bool {
        (x - self.center).abs() <= self.core_radius
    }
}

/// Builds the spatial grid for `problem` on `mesh`.
///
/// The grid is centered at `x0` with half-width
/// `c_σ σ̄ √T + (√(2h) ξ_max σ̄ + b̄ h)`, where `σ̄` and `b̄` are the largest
/// `|σ|`, `|b|` sampled over `[0, T] × [x0 ± c_σ √T]` and `ξ_max` is the
/// largest quadrature node. The bracketed margin covers one full-step hop,
/// so any abscissa launched from within `c_σ σ̄ √T` of `x0` lands on the grid.
pub fn build_grid(
    problem: &FbsdeProblem,
    params: &SchemeParams,
    mesh: &TimeMesh,
    rule: &QuadratureRule,
) -> Result<SpatialGrid> {
    params.validate()?;
    let t_end = problem.terminal_time;
    let reach = params.halfwidth_sigmas * t_end.sqrt();
    let (mut sigma_max, mut drift_max) = (0.0f64, 0.0f64);
    const TIME_SAMPLES: usize = 21;
    const SPACE_SAMPLES: usize = 41;
    for it in 0..TIME_SAMPLES {
        let t = t_end * it as f64 / (TIME_SAMPLES - 1) as f64;
        for jx in 0..SPACE_SAMPLES {
            let x = problem.x0 - reach + 2.0 * reach * jx as f64 / (SPACE_SAMPLES - 1) as f64;
            sigma_max = sigma_max.max(problem.checked_diffusion(t, x)?);
            let b = problem.drift(t, x);
            if !b.is_finite() {
                return Err(Error::NonFinite { context: "drift", x });
            }
            drift_max = drift_max.max(b.abs());
        }
    }
    let h = mesh.step_size();
    let core = reach * sigma_max;
    let margin = (2.0 * h).sqrt() * rule.max_abs_node() * sigma_max + drift_max * h;
    let half_width = core + margin;
    if half_width.is_nan() || half_width <= 0.0 {
        return Err(Error::config(format!("computed grid half-width {half_width} is not positive")));
    }
    SpatialGrid::new(problem.x0, half_width, core, params.grid_points)
}

/// `(Y, Z)` sampled on a grid at one time, with spline interpolants.
#[derive(Debug, Clone)]
pub struct ValueField {
    grid: Arc<SpatialGrid>,
    time: f64,
    y_values: Vec<f64>,
    z_values: Vec<f64>,
    y_spline: CubicSpline,
    z_spline: CubicSpline,
}

impl ValueField {
    pub fn from_values(grid: Arc<SpatialGrid>, time: f64, y_values: Vec<f64>, z_values: Vec<f64>) -> Result<Self> {
        if y_values.len() != grid.len() || z_values.len() != grid.len() {
            return Err(Error::config("field values do not match the grid size"));
        }
        for (j, (y, z)) in y_values.iter().zip(&z_values).enumerate() {
            if !(y.is_finite() && z.is_finite()) {
                return Err(Error::NonFinite { context: "field value", x: grid.points()[j] });
            }
        }
        let y_spline = CubicSpline::fit(grid.points(), &y_values)?;
        let z_spline = CubicSpline::fit(grid.points(), &z_values)?;
        Ok(Self { grid, time, y_values, z_values, y_spline, z_spline })
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn y_values(&self) -> &[f64] {
        &self.y_values
    }

    pub fn z_values(&self) -> &[f64] {
        &self.z_values
    }

    pub fn y_spline(&self) -> &CubicSpline {
        &self.y_spline
    }

    pub fn z_spline(&self) -> &CubicSpline {
        &self.z_spline
    }

    #[inline]
    pub fn y(&self, x: f64) -> Result<f64> {
        self.y_spline.eval(x)
    }

    #[inline]
    pub fn z(&self, x: f64) -> Result<f64> {
        self.z_spline.eval(x)
    }

    /// Out-of-hull evaluations on both splines so far.
    pub fn out_of_domain_count(&self) -> u64 {
        self.y_spline.out_of_domain_count() + self.z_spline.out_of_domain_count()
    }
}

/// Samples `y_fn`, `z_fn` on the grid points and fits both splines.
pub fn field_from_functions(
    grid: Arc<SpatialGrid>,
    time: f64,
    y_fn: impl Fn(f64) -> f64 + Sync,
    z_fn: impl Fn(f64) -> f64 + Sync,
) -> Result<ValueField> {
    let (ys, zs): (Vec<f64>, Vec<f64>) = grid.points().par_iter().map(|&x| (y_fn(x), z_fn(x))).unzip();
    ValueField::from_values(grid, time, ys, zs)
}
