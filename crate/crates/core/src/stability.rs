//! Perturbed sweeps and the discrete stability functional.
//!
//! The perturbed scheme runs the unchanged pipeline with terminal data
//! `(Φ + ε_y, ∂ₓu σ + ε_z)` and generator `f + ε_f`. Deviations between a
//! base and a perturbed sweep are measured per level in the sup norm over
//! the grid, and aggregated as
//!
//! ```text
//! dev = sup|ε_{y,0}|² + h Σ_{ℓ=0}^{N-1} sup|ε_{z,ℓ}|².
//! ```

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problems::{FbsdeProblem, GeneratorFn, SpaceFn};
use crate::scheme::{solve, SchemeParams, SolveResult};

#[derive(Clone)]
pub struct PerturbationSpec {
    pub eps_f: GeneratorFn,
    pub eps_yn: SpaceFn,
    pub eps_zn: SpaceFn,
}

impl std::fmt::Debug for PerturbationSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PerturbationSpec { .. }")
    }
}

impl PerturbationSpec {
    pub fn new(
        eps_f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        eps_yn: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eps_zn: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { eps_f: Arc::new(eps_f), eps_yn: Arc::new(eps_yn), eps_zn: Arc::new(eps_zn) }
    }

    pub fn zero() -> Self {
        Self::new(|_, _, _| 0.0, |_| 0.0, |_| 0.0)
    }

    /// `ε_f ≡ c`, unperturbed terminal data.
    pub fn constant_generator(c: f64) -> Self {
        Self::new(move |_, _, _| c, |_| 0.0, |_| 0.0)
    }

    /// `ε_y ≡ dy`, `ε_z ≡ dz` on the terminal data, unperturbed generator.
    pub fn constant_terminal(dy: f64, dz: f64) -> Self {
        Self::new(|_, _, _| 0.0, move |_| dy, move |_| dz)
    }

    /// The problem with perturbed generator and terminal data. Exact
    /// solutions are dropped because they no longer apply.
    pub fn apply(&self, problem: &FbsdeProblem) -> FbsdeProblem {
        let mut out = problem.clone();
        let (f, ef) = (problem.generator.clone(), self.eps_f.clone());
        out.generator = Arc::new(move |t, y, z| f(t, y, z) + ef(t, y, z));
        let (phi, ey) = (problem.terminal_y.clone(), self.eps_yn.clone());
        out.terminal_y = Arc::new(move |x| phi(x) + ey(x));
        let (zt, ez) = (problem.terminal_z.clone(), self.eps_zn.clone());
        out.terminal_z = Arc::new(move |x| zt(x) + ez(x));
        out.exact_y = None;
        out.exact_z = None;
        out
    }
}

/// Solves the perturbed problem, keeping all fields.
pub fn solve_perturbed(
    problem: &FbsdeProblem,
    params: &SchemeParams,
    steps: usize,
    pert: &PerturbationSpec,
) -> Result<SolveResult> {
    solve(&pert.apply(problem), params, steps, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    /// `sup_x |Y_ε − Y|` at each level `t_0..t_N`.
    pub y_sup: Vec<f64>,
    /// `sup_x |Z_ε − Z|` at each level `t_0..t_N`.
    pub z_sup: Vec<f64>,
    /// `sup|ε_{y,0}|²`.
    pub dev_y0: f64,
    /// `h Σ_{ℓ<N} sup|ε_{z,ℓ}|²`.
    pub dev_z_sum: f64,
    /// `dev_y0 + dev_z_sum`.
    pub dev: f64,
    /// `Y_ε − Y` and `Z_ε − Z` at `(0, x0)`.
    pub y_at_x0: f64,
    pub z_at_x0: f64,
}

/// Deviation between a base and a perturbed sweep.
pub fn deviation(base: &SolveResult, pert: &SolveResult) -> Result<DeviationReport> {
    let (Some(bf), Some(pf)) = (&base.fields, &pert.fields) else {
        return Err(Error::config("deviation needs solve results that kept their fields"));
    };
    if base.mesh != pert.mesh || base.grid != pert.grid || bf.len() != pf.len() {
        return Err(Error::config("deviation needs results on identical meshes and grids"));
    }
    let sup_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    let y_sup: Vec<f64> = bf.iter().zip(pf).map(|(b, p)| sup_diff(b.y_values(), p.y_values())).collect();
    let z_sup: Vec<f64> = bf.iter().zip(pf).map(|(b, p)| sup_diff(b.z_values(), p.z_values())).collect();
    let h = base.mesh.step_size();
    let steps = base.mesh.steps();
    let dev_y0 = y_sup[0] * y_sup[0];
    let dev_z_sum = h * z_sup[..steps].iter().map(|e| e * e).sum::<f64>();
    Ok(DeviationReport {
        dev: dev_y0 + dev_z_sum,
        dev_y0,
        dev_z_sum,
        y_at_x0: pert.y0 - base.y0,
        z_at_x0: pert.z0 - base.z0,
        y_sup,
        z_sup,
    })
}
