use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::problems::{self, FbsdeProblem};
use crate::scheme::SchemeParams;

pub const DEFAULT_ALPHAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_STEPS: [usize; 5] = [8, 16, 32, 64, 128];
pub const DEFAULT_PERTURBATIONS: [f64; 3] = [1e-4, 1e-3, 1e-2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Converge,
    Stability,
    Problems,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: Option<String>,
    pub a: Option<f64>,
    pub x0: Option<f64>,
    pub alphas: Vec<f64>,
    pub steps: Vec<usize>,
    pub quadrature_order: usize,
    pub halfwidth_sigmas: f64,
    pub grid_points: usize,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    /// Write measured wall times into reports; `false` writes `NA` so
    /// outputs are byte-reproducible.
    pub record_runtime: bool,
    /// Generator perturbation magnitudes for `stability`.
    pub perturbations: Vec<f64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let defaults = SchemeParams::default();
        Self {
            command,
            problem: None,
            a: None,
            x0: None,
            alphas: DEFAULT_ALPHAS.to_vec(),
            steps: DEFAULT_STEPS.to_vec(),
            quadrature_order: defaults.quadrature_order,
            halfwidth_sigmas: defaults.halfwidth_sigmas,
            grid_points: defaults.grid_points,
            output_dir: PathBuf::from("out"),
            emit_svg: false,
            record_runtime: true,
            perturbations: DEFAULT_PERTURBATIONS.to_vec(),
        }
    }

    pub fn scheme_params(&self, alpha: f64) -> SchemeParams {
        SchemeParams {
            alpha,
            quadrature_order: self.quadrature_order,
            halfwidth_sigmas: self.halfwidth_sigmas,
            grid_points: self.grid_points,
        }
    }

    pub fn resolve_problem(&self) -> Result<FbsdeProblem> {
        let name = self
            .problem
            .as_deref()
            .ok_or_else(|| Error::Usage("no problem selected (use --problem)".into()))?;
        problems::by_name(name, self.a, self.x0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.command == Command::Problems {
            return Ok(());
        }
        self.resolve_problem()?;
        if self.alphas.is_empty() {
            return Err(Error::Usage("alpha list is empty".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(Error::Usage(format!("alpha must lie in (0, 1], got {a}")));
        }
        if self.steps.is_empty() || self.steps.contains(&0) {
            return Err(Error::Usage("N values must be positive".into()));
        }
        self.scheme_params(self.alphas[0])
            .validate()
            .map_err(|e| Error::Usage(e.to_string()))?;
        if self.perturbations.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage("perturbation magnitudes must be finite".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Usage(format!("invalid value '{value}' for {what}"));
        match key {
            "problem" => self.problem = Some(value.to_string()),
            "a" => self.a = Some(value.parse().map_err(|_| bad(key))?),
            "x0" => self.x0 = Some(value.parse().map_err(|_| bad(key))?),
            "alpha" => self.alphas = parse_list(value).map_err(|_| bad(key))?,
            "N" => self.steps = parse_list(value).map_err(|_| bad(key))?,
            "quadrature.K" => self.quadrature_order = value.parse().map_err(|_| bad(key))?,
            "grid.halfwidth_sigmas" => self.halfwidth_sigmas = value.parse().map_err(|_| bad(key))?,
            "grid.points" => self.grid_points = value.parse().map_err(|_| bad(key))?,
            "output" => self.output_dir = PathBuf::from(value),
            "svg" => self.emit_svg = parse_bool(value).ok_or_else(|| bad(key))?,
            "report.runtime" => self.record_runtime = parse_bool(value).ok_or_else(|| bad(key))?,
            "stability.c" => self.perturbations = parse_list(value).map_err(|_| bad(key))?,
            other => return Err(Error::Usage(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file (`#` starts a comment).
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, T::Err> {
    value.split(',').map(|v| v.trim().parse()).collect()
}

fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}
