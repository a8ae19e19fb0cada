//! Explicit one-step predictor-corrector solver for decoupled
//! forward-backward stochastic differential equations in one dimension.
//!
//! The backward equation
//!
//! ```text
//! Y_t = Φ(X_T) + ∫_t^T f(s, Y_s, Z_s) ds − ∫_t^T Z_s dW_s
//! ```
//!
//! is marched backward on a uniform time mesh. Each step first predicts
//! `(Y, Z)` at the interior time `t_{i+1-α}` with an explicit Euler step and
//! then corrects `(Y, Z)` at `t_i` with a second-order combination of the
//! predicted and the `t_{i+1}` values. Conditional expectations are
//! evaluated with Gauss-Hermite quadrature and the value fields are carried
//! between time levels as not-a-knot cubic splines.
//!
//! Module map:
//!
//! - [`problems`]: problem data and the two built-in benchmark problems.
//! - [`quadrature`]: Gauss-Hermite rules and the conditional expectation primitives.
//! - [`spline`]: not-a-knot cubic splines.
//! - [`fields`]: time mesh, spatial grid and per-level value fields.
//! - [`scheme`]: predictor, corrector, backward sweep.
//! - [`stability`]: perturbed sweeps and deviation functionals.
//! - [`analysis`]: least-squares convergence rates and convergence studies.
//! - [`cli`]: command line front end and report emission.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fields;
pub mod problems;
pub mod quadrature;
pub mod scheme;
pub mod spline;
pub mod stability;

pub use analysis::{convergence_rate, log_log_fit, run_convergence_study, ConvergenceReport, ConvergenceRow};
pub use error::{Error, Result};
pub use fields::{build_grid, field_from_functions, SpatialGrid, TimeMesh, ValueField};
pub use problems::FbsdeProblem;
pub use quadrature::{expect, expect_weighted, hermite_rule, QuadratureRule};
pub use scheme::{solve, SchemeParams, SolveResult};
pub use spline::CubicSpline;
pub use stability::{deviation, solve_perturbed, DeviationReport, PerturbationSpec};
