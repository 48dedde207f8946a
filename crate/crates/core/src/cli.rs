//! Subcommands behind the `burgers-fem` binary. Each writes CSV files into
//! `<output_dir>/<subcommand>/<run_name>/`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::RunConfig;
use crate::convergence::{run_study, ConvergenceTable, ErrorColumn, StudyAxis};
use crate::diagnostics::{fit_trajectory_decay, NormCalculator};
use crate::error::Error;
use crate::mesh::Mesh;
use crate::models::{ControlTrace, Dimensionality};
use crate::stepper::{run_with, Discretization, StateTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Convergence,
    Decay,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Convergence => "convergence",
            Command::Decay => "decay",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(Error),
    #[error("solver failure: {0}")]
    Solver(Error),
    #[error("output error: {0}")]
    Io(Error),
}

impl CliError {
    /// 2 for configuration errors, 3 for solver failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

fn io(e: impl Into<Error>) -> CliError {
    CliError::Io(e.into())
}

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Run directory for `command`, created if missing.
pub fn run_directory(config: &RunConfig, command: Command) -> Result<PathBuf, CliError> {
    let name = match &config.run_name {
        Some(n) => n.clone(),
        None => {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0);
            format!("run-{now}")
        }
    };
    let dir = config.output_dir.join(command.name()).join(name);
    fs::create_dir_all(&dir).map_err(io)?;
    Ok(dir)
}

/// Validates the config, runs `command` and returns its output directory.
pub fn execute(command: Command, config: &RunConfig) -> Result<PathBuf, CliError> {
    config.validate().map_err(CliError::Config)?;
    let dir = run_directory(config, command)?;
    match command {
        Command::Simulate => cmd_simulate(config, &dir)?,
        Command::Convergence => cmd_convergence(config, &dir)?,
        Command::Decay => cmd_decay(config, &dir)?,
    }
    Ok(dir)
}

fn mesh_of(config: &RunConfig) -> Result<Mesh, CliError> {
    let mesh = match config.dimension {
        Dimensionality::OneD => crate::mesh::build_uniform_1d(config.n).map(Mesh::from),
        Dimensionality::TwoD => crate::mesh::build_structured_2d(config.n).map(Mesh::from),
    };
    mesh.map_err(CliError::Config)
}

fn write(dir: &Path, name: &str, body: String) -> Result<(), CliError> {
    fs::write(dir.join(name), body).map_err(io)
}

/// Writes `states.csv`, `norms.csv`, `controls.csv`, `report.csv` (and
/// `mesh.txt` on request). On Newton failure the partial trajectory is
/// still written before the error is returned.
pub fn cmd_simulate(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let problem = config.problem();
    let mesh = mesh_of(config)?;
    let disc = Discretization::new(mesh.clone());
    let (trajectory, failure) = match run_with(&problem, &disc, &config.theta_config()) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    if config.write_mesh {
        let mut buf = Vec::new();
        mesh.write_text(&mut buf).map_err(io)?;
        fs::write(dir.join("mesh.txt"), buf).map_err(io)?;
    }
    write(dir, "states.csv", states_csv(config, &mesh, &trajectory))?;
    write(dir, "norms.csv", norms_csv(&mesh, &trajectory).map_err(CliError::Solver)?)?;
    let trace = ControlTrace::from_states(&problem, &mesh, &trajectory.times, &trajectory.states)
        .map_err(CliError::Solver)?;
    write(dir, "controls.csv", controls_csv(config.dimension, &trace))?;
    write(dir, "report.csv", report_csv(&trajectory))?;
    match failure {
        Some(e) => Err(CliError::Solver(e)),
        None => Ok(()),
    }
}

fn states_csv(config: &RunConfig, mesh: &Mesh, t: &StateTrajectory) -> String {
    let stride = if config.sample_every == 0 { (config.m / 10).max(1) } else { config.sample_every };
    let coords = mesh.coordinates();
    let two_d = config.dimension == Dimensionality::TwoD;
    let mut out = String::from(if two_d { "t,node,x,y,w\n" } else { "t,node,x,w\n" });
    let last = t.len().saturating_sub(1);
    for level in (0..t.len()).filter(|&l| l % stride == 0 || l == last) {
        for (i, (p, w)) in coords.iter().zip(&t.states[level]).enumerate() {
            let _ = if two_d {
                writeln!(out, "{},{i},{},{},{}", fmt_num(t.times[level]), fmt_num(p[0]), fmt_num(p[1]), fmt_num(*w))
            } else {
                writeln!(out, "{},{i},{},{}", fmt_num(t.times[level]), fmt_num(p[0]), fmt_num(*w))
            };
        }
    }
    out
}

fn norms_csv(mesh: &Mesh, t: &StateTrajectory) -> crate::Result<String> {
    let calc = NormCalculator::new(mesh);
    let mut out = String::from("t,l2,h1,linf\n");
    for (time, w) in t.times.iter().zip(&t.states) {
        let r = calc.report(w)?;
        let _ = writeln!(out, "{},{},{},{}", fmt_num(*time), fmt_num(r.l2), fmt_num(r.h1), fmt_num(r.linf));
    }
    Ok(out)
}

fn controls_csv(dimension: Dimensionality, trace: &ControlTrace) -> String {
    let mut out = String::new();
    match dimension {
        Dimensionality::OneD => {
            out.push_str("t,v0,v1\n");
            for ((t, a), b) in trace.times.iter().zip(&trace.v0).zip(&trace.v1) {
                let _ = writeln!(out, "{},{},{}", fmt_num(*t), fmt_num(*a), fmt_num(*b));
            }
        }
        Dimensionality::TwoD => {
            out.push_str("t,v2_l2\n");
            for (t, v) in trace.times.iter().zip(&trace.v2_boundary_l2) {
                let _ = writeln!(out, "{},{}", fmt_num(*t), fmt_num(*v));
            }
        }
    }
    out
}

fn report_csv(t: &StateTrajectory) -> String {
    let mut out = String::from("step,newton_iterations,final_residual_norm,converged\n");
    for r in &t.reports {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.step,
            r.newton_iterations,
            fmt_num(r.final_residual_norm),
            r.converged
        );
    }
    out
}

/// CSV for one or more tables sharing the same columns: a `theta` and a
/// `resolution` column, then `err_<col>,oc_<col>` pairs. First-row orders
/// are empty.
pub fn table_csv(tables: &[ConvergenceTable]) -> String {
    let mut out = String::from("theta,resolution");
    if let Some(first) = tables.first() {
        for c in &first.columns {
            let _ = write!(out, ",err_{0},oc_{0}", c.name());
        }
    }
    out.push('\n');
    for table in tables {
        for row in &table.rows {
            let _ = write!(out, "{},{}", fmt_num(table.theta), fmt_num(row.resolution));
            for (e, o) in row.errors.iter().zip(&row.orders) {
                let _ = write!(out, ",{},{}", fmt_num(*e), fmt_opt(*o));
            }
            out.push('\n');
        }
    }
    out
}

/// Spatial studies write `table1.csv` (state) and `table2.csv` (controls);
/// temporal studies write `table3.csv` (state), `table4.csv` (left or 2D
/// control) and, in 1D, `table5.csv` (right control). Rows from every
/// configured θ are stacked. Failed rows are reported on stderr and make
/// the command fail after all files are written.
pub fn cmd_convergence(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let mut state = Vec::new();
    let mut controls = Vec::new();
    let mut first_failure = None;
    for plan in config.study_plans() {
        let outcome = run_study(&plan).map_err(CliError::Solver)?;
        for (i, s) in outcome.samples.iter().enumerate() {
            if let Err(e) = s {
                eprintln!("theta {} resolution {}: {e}", plan.theta, plan.resolution(i));
                first_failure.get_or_insert_with(|| e.clone());
            }
        }
        state.push(outcome.state_table());
        controls.push(outcome.control_table());
    }
    let split = |col: ErrorColumn| -> Vec<ConvergenceTable> {
        controls.iter().map(|t| {
            let idx = t.columns.iter().position(|c| *c == col).expect("column present");
            ConvergenceTable {
                theta: t.theta,
                columns: vec![col],
                rows: t
                    .rows
                    .iter()
                    .map(|r| crate::convergence::ConvergenceRow {
                        resolution: r.resolution,
                        errors: vec![r.errors[idx]],
                        orders: vec![r.orders[idx]],
                    })
                    .collect(),
            }
        }).collect()
    };
    match config.axis {
        StudyAxis::Spatial => {
            write(dir, "table1.csv", table_csv(&state))?;
            write(dir, "table2.csv", table_csv(&controls))?;
        }
        StudyAxis::Temporal => {
            write(dir, "table3.csv", table_csv(&state))?;
            match config.dimension {
                Dimensionality::OneD => {
                    write(dir, "table4.csv", table_csv(&split(ErrorColumn::V0)))?;
                    write(dir, "table5.csv", table_csv(&split(ErrorColumn::V1)))?;
                }
                Dimensionality::TwoD => write(dir, "table4.csv", table_csv(&controls))?,
            }
        }
    }
    match first_failure {
        Some(e) => Err(CliError::Solver(e)),
        None => Ok(()),
    }
}

/// Writes `decay.csv` with the fitted rate for every sweep value.
pub fn cmd_decay(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let disc = Discretization::new(mesh_of(config)?);
    let mut out = String::from("parameter,value,alpha_hat,fit_residual\n");
    for (value, problem, stepping) in config.sweep_runs() {
        let trajectory = run_with(&problem, &disc, &stepping).map_err(|f| CliError::Solver(f.error))?;
        let fit = fit_trajectory_decay(&trajectory, None).map_err(CliError::Solver)?;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            config.sweep.name(),
            fmt_num(value),
            fmt_num(fit.alpha_hat),
            fmt_num(fit.residual)
        );
    }
    write(dir, "decay.csv", out)
}
