//! Gauss-Hermite quadrature and the Gaussian conditional expectations built
//! on it.
//!
//! A rule of order `K` integrates `p(x) e^{-x²}` exactly for polynomials of
//! degree `≤ 2K − 1`. Conditional expectations over one step of the forward
//! diffusion use the weak-Euler transition with coefficients frozen at the
//! launch point,
//!
//! ```text
//! X' = x + b(t, x) δ + σ(t, x) ΔW,   ΔW = √(2δ) ξ_k,
//! E[v(X')] ≈ π^{-1/2} Σ_k w_k v(x + b δ + σ √(2δ) ξ_k).
//! ```
//!
//! This is the exact transition whenever `b` and `σ` are constant.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::problems::FbsdeProblem;

/// Largest supported quadrature order.
pub const MAX_ORDER: usize = 64;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_abs_node(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0).abs()
    }

    /// `Σ_k w_k g(ξ_k)`, approximating `∫ g(x) e^{-x²} dx`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Orthonormal Hermite recurrence at `x`. Returns `(p_K(x), p_{K-1}(x))`
/// where `p_j` is normalized so that `∫ p_j² e^{-x²} = 1`.
fn orthonormal_hermite(order: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = PI.powf(-0.25);
    for j in 1..=order {
        let jf = j as f64;
        let next = x * (2.0 / jf).sqrt() * p - ((jf - 1.0) / jf).sqrt() * p_prev;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Gauss-Hermite rule of order `K` (physicists' weight `e^{-x²}`).
///
/// Roots of `H_K` are found by Newton iteration on the three-term
/// recurrence, starting from asymptotic estimates for the largest roots and
/// extrapolating from already converged neighbours for the rest. Only the
/// non-negative half is computed; the other half is mirrored so the rule is
/// exactly symmetric.
pub fn hermite_rule(order: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::config(format!(
            "quadrature order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let n = order;
    let nf = n as f64;
    let half = n.div_ceil(2);
    // descending positive roots (and 0 for odd n)
    let mut roots = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    let mut z = 0.0;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * roots[0],
            3 => 1.91 * z - 0.91 * roots[1],
            _ => 2.0 * z - roots[i - 2],
        };
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, p_prev) = orthonormal_hermite(n, z);
            let step = p / ((2.0 * nf).sqrt() * p_prev);
            z -= step;
            if step.abs() <= NEWTON_TOL * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::config(format!(
                "Hermite root {i} of order {n} did not converge"
            )));
        }
        let (_, p_prev) = orthonormal_hermite(n, z);
        let dp = (2.0 * nf).sqrt() * p_prev;
        roots.push(z);
        weights.push(2.0 / (dp * dp));
    }
    if n % 2 == 1 {
        // the middle root is exactly zero
        let last = half - 1;
        roots[last] = 0.0;
    }

    let mut nodes = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for (r, w) in roots.iter().zip(&weights) {
        nodes.push(-r);
        ws.push(*w);
    }
    let mirror_from = if n % 2 == 1 { half - 1 } else { half };
    for k in (0..mirror_from).rev() {
        nodes.push(roots[k]);
        ws.push(weights[k]);
    }
    // -0.0 from negating the odd-order middle root
    if n % 2 == 1 {
        nodes[half - 1] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights: ws })
}

/// One-step Gaussian transition launched from `(t, x)` over `delta`.
#[derive(Debug, Clone, Copy)]
struct Transition {
    mean: f64,
    spread: f64,
    increment_scale: f64,
}

impl Transition {
    fn new(problem: &FbsdeProblem, t: f64, x: f64, delta: f64) -> Result<Self> {
        let sigma = problem.checked_diffusion(t, x)?;
        let drift = problem.drift(t, x);
        if !drift.is_finite() {
            return Err(Error::NonFinite { context: "drift", x });
        }
        let increment_scale = (2.0 * delta).sqrt();
        Ok(Self {
            mean: x + drift * delta,
            spread: sigma * increment_scale,
            increment_scale,
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("time increment must be ≥ 0, got {delta}")))
    }
}

/// Plain and `ΔW`-weighted conditional expectations of `M` functions that
/// share the same abscissae, evaluating `v` once per node.
///
/// Returns `([E[v_m(X')]], [E[ΔW v_m(X')]])`. For `delta == 0` the plain
/// expectations are `v(x)` and the weighted ones are exactly zero.
pub fn moments<const M: usize>(
    v: impl Fn(f64) -> Result<[f64; M]>,
    x: f64,
    t: f64,
    delta: f64,
    problem: &FbsdeProblem,
    rule: &QuadratureRule,
) -> Result<([f64; M], [f64; M])> {
    check_delta(delta)?;
    if delta == 0.0 {
        let values = v(x)?;
        if values.iter().any(|u| !u.is_finite()) {
            return Err(Error::NonFinite { context: "expectation integrand", x });
        }
        return Ok((values, [0.0; M]));
    }
    let tr = Transition::new(problem, t, x, delta)?;
    let mut plain = [0.0; M];
    let mut weighted = [0.0; M];
    for (&node, &w) in rule.nodes.iter().zip(&rule.weights) {
        let abscissa = tr.mean + tr.spread * node;
        let values = v(abscissa)?;
        let dw = tr.increment_scale * node;
        for m in 0..M {
            let u = values[m];
            if !u.is_finite() {
                return Err(Error::NonFinite { context: "expectation integrand", x: abscissa });
            }
            plain[m] += w * u;
            weighted[m] += w * dw * u;
        }
    }
    let norm = 1.0 / PI.sqrt();
    for m in 0..M {
        plain[m] *= norm;
        weighted[m] *= norm;
    }
    Ok((plain, weighted))
}

/// `E[v(X_{t+δ}) | X_t = x]`.
pub fn expect(
    v: impl Fn(f64) -> f64,
    x: f64,
    t: f64,
    delta: f64,
    problem: &FbsdeProblem,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_delta(delta)?;
    if delta == 0.0 {
        let u = v(x);
        return if u.is_finite() {
            Ok(u)
        } else {
            Err(Error::NonFinite { context: "expectation integrand", x })
        };
    }
    let ([e], _) = moments(|xp| Ok([v(xp)]), x, t, delta, problem, rule)?;
    Ok(e)
}

/// `E[ΔW · v(X_{t+δ}) | X_t = x]` with `ΔW = W_{t+δ} − W_t`.
pub fn expect_weighted(
    v: impl Fn(f64) -> f64,
    x: f64,
    t: f64,
    delta: f64,
    problem: &FbsdeProblem,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_delta(delta)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let (_, [e]) = moments(|xp| Ok([v(xp)]), x, t, delta, problem, rule)?;
    Ok(e)
}
