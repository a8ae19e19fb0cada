//! Problem data for decoupled FBSDEs and the built-in benchmark problems.
//!
//! A problem couples a forward diffusion `dX = b(t, X) dt + σ(t, X) dW`
//! started at `x0` with the backward equation driven by the generator `f`
//! and terminated by `Y_T = Φ(X_T)`. The scheme also needs the terminal
//! value of `Z`, which in the Markovian setting is `∂ₓu(T, x) σ(T, x)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// `(t, x) -> value`, used for drift, diffusion and exact solutions.
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `(t, y, z) -> value`, the generator signature.
pub type GeneratorFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// `x -> value`, used for terminal data.
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Names accepted by [`by_name`].
pub const BUILTIN_NAMES: [&str; 3] = ["example1", "example2", "linear"];

#[derive(Clone)]
pub struct FbsdeProblem {
    pub name: String,
    pub terminal_time: f64,
    pub x0: f64,
    pub drift: SpaceTimeFn,
    pub diffusion: SpaceTimeFn,
    pub generator: GeneratorFn,
    pub terminal_y: SpaceFn,
    pub terminal_z: SpaceFn,
    pub exact_y: Option<SpaceTimeFn>,
    pub exact_z: Option<SpaceTimeFn>,
}

impl fmt::Debug for FbsdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbsdeProblem")
            .field("name", &self.name)
            .field("terminal_time", &self.terminal_time)
            .field("x0", &self.x0)
            .field("has_exact_y", &self.exact_y.is_some())
            .field("has_exact_z", &self.exact_z.is_some())
            .finish_non_exhaustive()
    }
}

impl FbsdeProblem {
    /// Builds a problem without exact solutions.
    ///
    /// Fails if `terminal_time` is not a positive finite number or `x0` is
    /// not finite.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        terminal_time: f64,
        x0: f64,
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        generator: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        terminal_y: impl Fn(f64) -> f64 + Send + Sync + 'static,
        terminal_z: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(terminal_time.is_finite() && terminal_time > 0.0) {
            return Err(Error::config(format!(
                "terminal time must be positive and finite, got {terminal_time}"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::config(format!("x0 must be finite, got {x0}")));
        }
        Ok(Self {
            name: name.into(),
            terminal_time,
            x0,
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            generator: Arc::new(generator),
            terminal_y: Arc::new(terminal_y),
            terminal_z: Arc::new(terminal_z),
            exact_y: None,
            exact_z: None,
        })
    }

    /// Attaches closed-form `(Y, Z)` as functions of `(t, x)`.
    pub fn with_exact(
        mut self,
        exact_y: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        exact_z: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.exact_y = Some(Arc::new(exact_y));
        self.exact_z = Some(Arc::new(exact_z));
        self
    }

    #[inline]
    pub fn drift(&self, t: f64, x: f64) -> f64 {
        (self.drift)(t, x)
    }

    #[inline]
    pub fn diffusion(&self, t: f64, x: f64) -> f64 {
        (self.diffusion)(t, x)
    }

    #[inline]
    pub fn generator(&self, t: f64, y: f64, z: f64) -> f64 {
        (self.generator)(t, y, z)
    }

    #[inline]
    pub fn terminal_y(&self, x: f64) -> f64 {
        (self.terminal_y)(x)
    }

    #[inline]
    pub fn terminal_z(&self, x: f64) -> f64 {
        (self.terminal_z)(x)
    }

    pub fn exact_y(&self, t: f64, x: f64) -> Option<f64> {
        self.exact_y.as_ref().map(|u| u(t, x))
    }

    pub fn exact_z(&self, t: f64, x: f64) -> Option<f64> {
        self.exact_z.as_ref().map(|u| u(t, x))
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact_y.is_some() && self.exact_z.is_some()
    }

    /// Diffusion coefficient at `(t, x)`, rejecting non-positive or
    /// non-finite values (uniform ellipticity).
    pub fn checked_diffusion(&self, t: f64, x: f64) -> Result<f64> {
        let s = self.diffusion(t, x);
        if s.is_finite() && s > 0.0 {
            Ok(s)
        } else {
            Err(Error::config(format!(
                "diffusion must be positive, got σ({t}, {x}) = {s}"
            )))
        }
    }

    /// Checks `exact_y(T, x) = Φ(x)` and `exact_z(T, x) = terminal_z(x)` at
    /// the given sample points to `tol` (absolute).
    pub fn check_terminal_consistency(&self, samples: &[f64], tol: f64) -> Result<()> {
        let t = self.terminal_time;
        for &x in samples {
            if let Some(y) = self.exact_y(t, x) {
                let phi = self.terminal_y(x);
                if (y - phi).abs() > tol {
                    return Err(Error::config(format!(
                        "exact_y(T, {x}) = {y} differs from terminal_y = {phi}"
                    )));
                }
            }
            if let Some(z) = self.exact_z(t, x) {
                let zt = self.terminal_z(x);
                if (z - zt).abs() > tol {
                    return Err(Error::config(format!(
                        "exact_z(T, {x}) = {z} differs from terminal_z = {zt}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Terminal `Z` obtained from `Φ` by central differences,
/// `z(x) = Φ'(x) σ(T, x)` with step `1e-6 · max(1, |x|)`.
pub fn terminal_z_by_differences(
    terminal_y: impl Fn(f64) -> f64 + Send + Sync + 'static,
    diffusion: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    terminal_time: f64,
) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |x| {
        let step = 1e-6 * x.abs().max(1.0);
        let slope = (terminal_y(x + step) - terminal_y(x - step)) / (2.0 * step);
        slope * diffusion(terminal_time, x)
    }
}

fn logistic(e: f64) -> f64 {
    // e / (e + 1) written to stay finite for large e
    1.0 / (1.0 + (-e).exp())
}

/// `Y_t = e^{W_t+t}/(e^{W_t+t}+1)` with generator `−y³ + 2.5y² − 1.5y`.
///
/// There is no separate forward equation: the state is the Brownian path
/// itself (`b = 0`, `σ = 1`, `x0 = 0`, `T = 1`).
pub fn example1() -> FbsdeProblem {
    let t_end = 1.0;
    let y = |t: f64, x: f64| logistic(x + t);
    let z = |t: f64, x: f64| {
        let p = logistic(x + t);
        p * (1.0 - p)
    };
    FbsdeProblem::new(
        "example1",
        t_end,
        0.0,
        |_, _| 0.0,
        |_, _| 1.0,
        |_, y, _| -y * y * y + 2.5 * y * y - 1.5 * y,
        move |x| y(t_end, x),
        move |x| z(t_end, x),
    )
    .expect("valid built-in problem")
    .with_exact(y, z)
}

/// FitzHugh-Nagumo type problem with generator `−y³ + (1+a)y² − ay`,
/// `Φ(x) = 1/(1+eˣ)` and `X = x0 + W` on `[0, 1]`.
pub fn example2(a: f64, x0: f64) -> FbsdeProblem {
    let t_end = 1.0;
    let shift = 0.5 - a;
    let y = move |t: f64, x: f64| 1.0 / (1.0 + (x - shift * (t_end - t)).exp());
    // −e/(1+e)² = −p(1−p) with p = 1/(1+e)
    let z = move |t: f64, x: f64| {
        let p = y(t, x);
        -p * (1.0 - p)
    };
    FbsdeProblem::new(
        "example2",
        t_end,
        x0,
        |_, _| 0.0,
        |_, _| 1.0,
        move |_, y, _| -y * y * y + (1.0 + a) * y * y - a * y,
        move |x| y(t_end, x),
        move |x| z(t_end, x),
    )
    .expect("valid built-in problem")
    .with_exact(y, z)
}

/// The martingale `Y_t = X_t = x0 + W_t`, `Z ≡ 1`, with `f ≡ 0`.
///
/// Every conditional expectation in the scheme is exact on this problem, so
/// it serves as an exactness probe.
pub fn linear(x0: f64) -> FbsdeProblem {
    FbsdeProblem::new(
        "linear",
        1.0,
        x0,
        |_, _| 0.0,
        |_, _| 1.0,
        |_, _, _| 0.0,
        |x| x,
        |_| 1.0,
    )
    .expect("valid built-in problem")
    .with_exact(|_, x| x, |_, _| 1.0)
}

/// Resolves a built-in problem by name. `a` only applies to `example2`;
/// `x0` overrides the starting point of `example2` and `linear`.
pub fn by_name(name: &str, a: Option<f64>, x0: Option<f64>) -> Result<FbsdeProblem> {
    match name {
        "example1" => {
            if a.is_some() || x0.is_some() {
                return Err(Error::Usage(
                    "example1 takes no parameters (a, x0 are fixed)".into(),
                ));
            }
            Ok(example1())
        }
        "example2" => Ok(example2(a.unwrap_or(-0.5), x0.unwrap_or(1.0))),
        "linear" => {
            if a.is_some() {
                return Err(Error::Usage("linear takes no parameter a".into()));
            }
            Ok(linear(x0.unwrap_or(0.0)))
        }
        other => Err(Error::Usage(format!(
            "unknown problem '{other}' (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
