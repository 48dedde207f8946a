//! Fully discrete θ-scheme: one nonlinear solve per time step.
//!
//! With `W^{n+θ} = θ W^{n+1} + (1-θ) W^n` each step solves
//!
//! ```text
//! F(W^{n+1}) = M (W^{n+1} - W^n)/k + ν A W^{n+θ} + w_d C W^{n+θ}
//!            + B(W^{n+θ}) + G(W^{n+θ}) = 0
//! ```
//!
//! where `B` is the Burgers term and `G` the boundary feedback (absent for
//! uncontrolled problems).

use std::sync::OnceLock;

use crate::assembly::{assemble_convection, assemble_mass, assemble_stiffness, boundary_feedback, burgers_term};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::models::ProblemSpec;
use crate::sparse::{BandedLu, SparseOperator};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConfig {
    pub theta: f64,
    /// Time step.
    pub k: f64,
    /// Number of steps `M`.
    pub steps: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl ThetaConfig {
    /// `M` uniform steps over `[0, t_final]` with the default Newton settings.
    pub fn new(theta: f64, t_final: f64, steps: usize) -> Self {
        Self {
            theta,
            k: t_final / steps.max(1) as f64,
            steps,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParams(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParams(format!("time step must be positive, got {}", self.k)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParams("step count must be at least 1".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidParams("newton tolerance must be positive".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParams("newton iteration cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn t_final(&self) -> f64 {
        self.k * self.steps as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Index `n + 1` of the level this step produces.
    pub step: usize,
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateTrajectory {
    pub states: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    pub reports: Vec<StepReport>,
    /// `‖W^n‖` for every stored state.
    pub l2_history: Vec<f64>,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }
}

/// Mesh plus the state-independent operators, assembled once.
#[derive(Debug)]
pub struct Discretization {
    mesh: Mesh,
    mass: SparseOperator,
    stiffness: SparseOperator,
    convection: SparseOperator,
    mass_lu: OnceLock<Result<BandedLu>>,
}

impl Discretization {
    pub fn new(mesh: Mesh) -> Self {
        let mass = assemble_mass(&mesh);
        let stiffness = assemble_stiffness(&mesh);
        let convection = assemble_convection(&mesh);
        Self { mesh, mass, stiffness, convection, mass_lu: OnceLock::new() }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mass(&self) -> &SparseOperator {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseOperator {
        &self.stiffness
    }

    pub fn convection(&self) -> &SparseOperator {
        &self.convection
    }

    pub fn node_count(&self) -> usize {
        self.mesh.node_count()
    }

    fn mass_lu(&self) -> Result<&BandedLu> {
        self.mass_lu.get_or_init(|| self.mass.factorize()).as_ref().map_err(Clone::clone)
    }

    /// `‖W‖ = √(WᵀMW)`
    pub fn l2_norm(&self, w: &[f64]) -> Result<f64> {
        Ok(self.mass.quadratic_form(w)?.max(0.0).sqrt())
    }
}

/// Everything one time step needs.
#[derive(Debug, Clone, Copy)]
pub struct ThetaStepper<'a> {
    pub disc: &'a Discretization,
    pub problem: &'a ProblemSpec,
    pub config: &'a ThetaConfig,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

impl<'a> ThetaStepper<'a> {
    pub fn new(disc: &'a Discretization, problem: &'a ProblemSpec, config: &'a ThetaConfig) -> Self {
        Self { disc, problem, config }
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.disc.node_count() {
            return Err(Error::DimensionMismatch { expected: self.disc.node_count(), found: v.len() });
        }
        Ok(())
    }

    /// `S(U) = ν A U + w_d C U + B(U) + G(U)` and, optionally, `∂S/∂U`.
    fn spatial(&self, u: &[f64], with_jacobian: bool) -> Result<(Vec<f64>, Option<SparseOperator>)> {
        let p = &self.problem.params;
        let d = self.disc;
        let (mut s, burgers_jac) = burgers_term(&d.mesh, u)?;
        d.stiffness.mul_vec_add(p.nu, u, &mut s);
        d.convection.mul_vec_add(p.w_d, u, &mut s);
        let feedback = if self.problem.controlled {
            let (g, g_jac) = boundary_feedback(&d.mesh, u, p)?;
            s.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            Some(g_jac)
        } else {
            None
        };
        if !with_jacobian {
            return Ok((s, None));
        }
        let mut terms = vec![(p.nu, &d.stiffness), (p.w_d, &d.convection), (1.0, &burgers_jac)];
        if let Some(g_jac) = feedback.as_ref() {
            terms.push((1.0, g_jac));
        }
        Ok((s, Some(SparseOperator::linear_combination(&terms)?)))
    }

    fn blend(&self, next: &[f64], prev: &[f64]) -> Vec<f64> {
        let th = self.config.theta;
        next.iter().zip(prev).map(|(a, b)| th * a + (1.0 - th) * b).collect()
    }

    fn residual_impl(&self, next: &[f64], prev: &[f64], with_jacobian: bool) -> Result<(Vec<f64>, Option<SparseOperator>)> {
        self.check(next)?;
        self.check(prev)?;
        let k = self.config.k;
        let mid = self.blend(next, prev);
        let (mut f, spatial_jac) = self.spatial(&mid, with_jacobian)?;
        let diff: Vec<f64> = next.iter().zip(prev).map(|(a, b)| (a - b) / k).collect();
        self.disc.mass.mul_vec_add(1.0, &diff, &mut f);
        let jac = match spatial_jac {
            Some(sj) => Some(SparseOperator::linear_combination(&[
                (1.0 / k, &self.disc.mass),
                (self.config.theta, &sj),
            ])?),
            None => None,
        };
        Ok((f, jac))
    }

    /// `F(W^{n+1})` for the given pair of time levels.
    pub fn step_residual(&self, next: &[f64], prev: &[f64]) -> Result<Vec<f64>> {
        Ok(self.residual_impl(next, prev, false)?.0)
    }

    /// Residual together with `∂F/∂W^{n+1} = M/k + θ ∂S/∂U (W^{n+θ})`.
    pub fn step_residual_and_jacobian(&self, next: &[f64], prev: &[f64]) -> Result<(Vec<f64>, SparseOperator)> {
        let (f, j) = self.residual_impl(next, prev, true)?;
        Ok((f, j.expect("jacobian requested")))
    }

    /// Newton's method from the initial guess `W^n`, exact Jacobian, direct
    /// factorization each iteration, no damping.
    pub fn newton_step(&self, prev: &[f64], step: usize) -> Result<(Vec<f64>, StepReport)> {
        if !(self.config.theta > 0.0) {
            return Err(Error::InvalidParams("newton step needs theta > 0".into()));
        }
        let cfg = self.config;
        let mut w = prev.to_vec();
        let mut history = Vec::new();
        for iter in 0..=cfg.newton_max_iter {
            let (f, jac) = self.step_residual_and_jacobian(&w, prev)?;
            let norm = inf_norm(&f);
            history.push(norm);
            if norm <= cfg.newton_tol {
                let report = StepReport { step, newton_iterations: iter, final_residual_norm: norm, converged: true };
                return Ok((w, report));
            }
            if !norm.is_finite() || iter == cfg.newton_max_iter {
                break;
            }
            let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
            jac.factorize()?.solve_in_place(&mut delta);
            w.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
        }
        Err(Error::NonConvergence {
            step,
            iterations: history.len() - 1,
            last_residual: *history.last().unwrap_or(&f64::NAN),
            residual_history: history,
        })
    }

    /// Forward Euler (`θ = 0`): one mass-matrix solve,
    /// `W^{n+1} = W^n - k M⁻¹ S(W^n)`.
    pub fn explicit_step(&self, prev: &[f64]) -> Result<Vec<f64>> {
        self.check(prev)?;
        let (mut s, _) = self.spatial(prev, false)?;
        self.disc.mass_lu()?.solve_in_place(&mut s);
        Ok(prev.iter().zip(&s).map(|(w, ds)| w - self.config.k * ds).collect())
    }

    /// Advances one step with the branch matching `θ`.
    pub fn advance(&self, prev: &[f64], step: usize) -> Result<(Vec<f64>, StepReport)> {
        if self.config.theta == 0.0 {
            let next = self.explicit_step(prev)?;
            let norm = inf_norm(&self.step_residual(&next, prev)?);
            let report = StepReport {
                step,
                newton_iterations: 0,
                final_residual_norm: norm,
                converged: norm <= self.config.newton_tol,
            };
            Ok((next, report))
        } else {
            self.newton_step(prev, step)
        }
    }
}

pub fn step_residual(
    next: &[f64],
    prev: &[f64],
    disc: &Discretization,
    problem: &ProblemSpec,
    config: &ThetaConfig,
) -> Result<Vec<f64>> {
    ThetaStepper::new(disc, problem, config).step_residual(next, prev)
}

pub fn newton_step_solve(
    prev: &[f64],
    disc: &Discretization,
    problem: &ProblemSpec,
    config: &ThetaConfig,
) -> Result<(Vec<f64>, StepReport)> {
    ThetaStepper::new(disc, problem, config).newton_step(prev, 0)
}

pub fn explicit_step(
    prev: &[f64],
    disc: &Discretization,
    problem: &ProblemSpec,
    config: &ThetaConfig,
) -> Result<Vec<f64>> {
    ThetaStepper::new(disc, problem, config).explicit_step(prev)
}

/// A run that stopped early. `partial` holds every state computed before
/// the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: Error,
    pub partial: StateTrajectory,
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self { error, partial: StateTrajectory::default() }
    }
}

/// Runs `M` steps from the nodal interpolant of the initial condition.
pub fn run_simulation(problem: &ProblemSpec, mesh: &Mesh, config: &ThetaConfig) -> std::result::Result<StateTrajectory, RunFailure> {
    let disc = Discretization::new(mesh.clone());
    run_with(problem, &disc, config)
}

/// [`run_simulation`] on pre-assembled operators.
pub fn run_with(
    problem: &ProblemSpec,
    disc: &Discretization,
    config: &ThetaConfig,
) -> std::result::Result<StateTrajectory, RunFailure> {
    problem.validate()?;
    problem.check_mesh(disc.mesh())?;
    config.validate()?;
    let w0 = problem.initial_state(disc.mesh());
    run_from(problem, disc, config, w0)
}

/// Runs `M` steps from an explicit starting state.
pub fn run_from(
    problem: &ProblemSpec,
    disc: &Discretization,
    config: &ThetaConfig,
    w0: Vec<f64>,
) -> std::result::Result<StateTrajectory, RunFailure> {
    config.validate()?;
    let stepper = ThetaStepper::new(disc, problem, config);
    stepper.check(&w0)?;
    let mut traj = StateTrajectory {
        states: Vec::with_capacity(config.steps + 1),
        times: Vec::with_capacity(config.steps + 1),
        reports: Vec::with_capacity(config.steps),
        l2_history: Vec::with_capacity(config.steps + 1),
    };
    traj.l2_history.push(disc.l2_norm(&w0)?);
    traj.states.push(w0);
    traj.times.push(0.0);
    for n in 0..config.steps {
        let prev = traj.states.last().expect("initial state pushed");
        match stepper.advance(prev, n + 1) {
            Ok((next, report)) => {
                let norm = match disc.l2_norm(&next) {
                    Ok(v) => v,
                    Err(error) => return Err(RunFailure { error, partial: traj }),
                };
                traj.l2_history.push(norm);
                traj.states.push(next);
                traj.times.push((n + 1) as f64 * config.k);
                traj.reports.push(report);
            }
            Err(error) => return Err(RunFailure { error, partial: traj }),
        }
    }
    Ok(traj)
}
