//! Plain-text run configuration: one `key = value` per line, `#` starts a
//! comment, later assignments override earlier ones.

use std::path::{Path, PathBuf};

use crate::assembly::BoundaryParams;
use crate::convergence::{StudyAxis, StudyPlan, DEFAULT_REFERENCE_FACTOR};
use crate::error::{Error, Result};
use crate::models::{Dimensionality, InitialCondition, ProblemSpec};
use crate::stepper::{ThetaConfig, DEFAULT_NEWTON_MAX_ITER, DEFAULT_NEWTON_TOL};

/// Parameter varied by the `decay` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// `c₀ = c₁` in 1D, `c₂` in 2D.
    Gain,
    Nu,
    Theta,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Gain => "gain",
            SweepParameter::Nu => "nu",
            SweepParameter::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: Dimensionality,
    pub nu: f64,
    pub w_d: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub theta: f64,
    /// Elements per side.
    pub n: usize,
    /// Time steps.
    pub m: usize,
    pub t_final: f64,
    /// `None` picks `example1` in 1D and `example2` in 2D.
    pub initial_condition: Option<InitialCondition>,
    pub controlled: bool,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub output_dir: PathBuf,
    pub run_name: Option<String>,
    pub write_mesh: bool,
    /// Step stride between rows of `states.csv`; `0` means `M / 10`.
    pub sample_every: usize,
    pub axis: StudyAxis,
    /// Study counts; empty means the axis default.
    pub resolutions: Vec<usize>,
    /// Study θ values; empty means `[theta]`.
    pub thetas: Vec<f64>,
    pub reference_factor: usize,
    pub sweep: SweepParameter,
    pub sweep_values: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: Dimensionality::OneD,
            nu: 0.1,
            w_d: 1.0,
            c0: 0.1,
            c1: 0.1,
            c2: 0.1,
            theta: 1.0,
            n: 30,
            m: 100,
            t_final: 1.0,
            initial_condition: None,
            controlled: true,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
            output_dir: PathBuf::from("output"),
            run_name: None,
            write_mesh: false,
            sample_every: 0,
            axis: StudyAxis::Spatial,
            resolutions: Vec::new(),
            thetas: Vec::new(),
            reference_factor: DEFAULT_REFERENCE_FACTOR,
            sweep: SweepParameter::Gain,
            sweep_values: vec![0.1, 0.5, 1.0],
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidConfig(format!("bad value for {key}: {value:?}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "dimension" => {
                self.dimension = match value {
                    "1" => Dimensionality::OneD,
                    "2" => Dimensionality::TwoD,
                    _ => return Err(bad(key, value)),
                }
            }
            "nu" => self.nu = num(key, value)?,
            "w_d" => self.w_d = num(key, value)?,
            "c0" => self.c0 = num(key, value)?,
            "c1" => self.c1 = num(key, value)?,
            "c2" => self.c2 = num(key, value)?,
            "theta" => self.theta = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "M" => self.m = num(key, value)?,
            "T" => self.t_final = num(key, value)?,
            "initial_condition" => self.initial_condition = Some(value.parse()?),
            "controlled" => self.controlled = boolean(key, value)?,
            "newton_tol" => self.newton_tol = num(key, value)?,
            "newton_max_iter" => self.newton_max_iter = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "run_name" => {
                if value.is_empty() || value.contains(['/', '\\']) || value == "." || value == ".." {
                    return Err(bad(key, value));
                }
                self.run_name = Some(value.to_string())
            }
            "write_mesh" => self.write_mesh = boolean(key, value)?,
            "sample_every" => self.sample_every = num(key, value)?,
            "axis" => {
                self.axis = match value {
                    "spatial" => StudyAxis::Spatial,
                    "temporal" => StudyAxis::Temporal,
                    _ => return Err(bad(key, value)),
                }
            }
            "resolutions" => self.resolutions = list(key, value)?,
            "thetas" => self.thetas = list(key, value)?,
            "reference_factor" => self.reference_factor = num(key, value)?,
            "sweep" => {
                self.sweep = match value {
                    "gain" => SweepParameter::Gain,
                    "nu" => SweepParameter::Nu,
                    "theta" => SweepParameter::Theta,
                    _ => return Err(bad(key, value)),
                }
            }
            "sweep_values" => self.sweep_values = list(key, value)?,
            other => return Err(Error::InvalidConfig(format!("unknown key: {other}"))),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::InvalidConfig(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("override {assignment:?} is not key=value")))?;
        self.set(key, value)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// Defaults, then the optional file, then the overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut config = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
            config.apply_text(&text)?;
        }
        for o in overrides {
            config.apply_override(o)?;
        }
        Ok(config)
    }

    pub fn initial_condition(&self) -> InitialCondition {
        self.initial_condition.unwrap_or(match self.dimension {
            Dimensionality::OneD => InitialCondition::Example1,
            Dimensionality::TwoD => InitialCondition::Example2,
        })
    }

    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec {
            dimension: self.dimension,
            params: BoundaryParams { nu: self.nu, w_d: self.w_d, c0: self.c0, c1: self.c1, c2: self.c2 },
            controlled: self.controlled,
            initial_condition: self.initial_condition(),
        }
    }

    pub fn theta_config(&self) -> ThetaConfig {
        self.theta_config_with(self.theta, self.m)
    }

    fn theta_config_with(&self, theta: f64, steps: usize) -> ThetaConfig {
        ThetaConfig {
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            ..ThetaConfig::new(theta, self.t_final, steps)
        }
    }

    pub fn study_thetas(&self) -> Vec<f64> {
        if self.thetas.is_empty() {
            vec![self.theta]
        } else {
            self.thetas.clone()
        }
    }

    /// Study counts, falling back to dyadic defaults for the axis.
    pub fn study_resolutions(&self) -> Vec<usize> {
        if !self.resolutions.is_empty() {
            return self.resolutions.clone();
        }
        match (self.axis, self.dimension) {
            (StudyAxis::Spatial, Dimensionality::OneD) => vec![4, 8, 16, 32, 64],
            (StudyAxis::Spatial, Dimensionality::TwoD) => vec![4, 8, 16],
            (StudyAxis::Temporal, _) => vec![8, 16, 32, 64, 128, 256],
        }
    }

    /// One plan per study θ.
    pub fn study_plans(&self) -> Vec<StudyPlan> {
        let problem = self.problem();
        self.study_thetas()
            .into_iter()
            .map(|theta| {
                let plan = match self.axis {
                    StudyAxis::Spatial => StudyPlan::spatial(problem.clone(), self.study_resolutions(), self.m, theta),
                    StudyAxis::Temporal => {
                        StudyPlan::temporal(problem.clone(), self.study_resolutions(), self.n, theta)
                    }
                };
                StudyPlan { t_final: self.t_final, ..plan.with_reference_factor(self.reference_factor) }
            })
            .collect()
    }

    /// `(value, problem, stepping)` for every point of the decay sweep.
    pub fn sweep_runs(&self) -> Vec<(f64, ProblemSpec, ThetaConfig)> {
        self.sweep_values
            .iter()
            .map(|&v| {
                let mut problem = self.problem();
                let mut theta = self.theta;
                match (self.sweep, self.dimension) {
                    (SweepParameter::Gain, Dimensionality::OneD) => {
                        problem.params.c0 = v;
                        problem.params.c1 = v;
                    }
                    (SweepParameter::Gain, Dimensionality::TwoD) => problem.params.c2 = v,
                    (SweepParameter::Nu, _) => problem.params.nu = v,
                    (SweepParameter::Theta, _) => theta = v,
                }
                (v, problem, self.theta_config_with(theta, self.m))
            })
            .collect()
    }

    /// Checks every numeric key before any run starts.
    pub fn validate(&self) -> Result<()> {
        self.problem().validate()?;
        self.theta_config().validate()?;
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        for plan in self.study_plans() {
            plan.validate()?;
        }
        if self.sweep_values.is_empty() {
            return Err(Error::InvalidConfig("sweep_values must not be empty".into()));
        }
        for (_, problem, stepping) in self.sweep_runs() {
            problem.validate()?;
            stepping.validate()?;
        }
        Ok(())
    }
}
