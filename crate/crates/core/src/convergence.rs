//! Self-convergence studies against a refined reference solution.
//!
//! Study grids are uniform and nest in the reference grid, so the reference
//! is compared at coarse nodes and coarse time levels by plain restriction.

use rayon::prelude::*;

use crate::diagnostics::{norm_linf, NormCalculator};
use crate::error::{Error, Result};
use crate::mesh::{build_structured_2d, build_uniform_1d, Mesh};
use crate::models::{control_difference_l2_2d, control_error_pair_1d, Dimensionality, ProblemSpec};
use crate::stepper::{run_with, Discretization, StateTrajectory, ThetaConfig};

pub const DEFAULT_REFERENCE_FACTOR: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyAxis {
    /// Refine `h = 1/n` at a fixed step count.
    Spatial,
    /// Refine `k = T/M` on a fixed mesh.
    Temporal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub axis: StudyAxis,
    /// Element counts `n` (spatial) or step counts `M` (temporal), strictly
    /// increasing, i.e. resolutions strictly decreasing.
    pub resolutions: Vec<usize>,
    /// The count held fixed on the other axis.
    pub fixed: usize,
    pub theta: f64,
    pub t_final: f64,
    pub problem: ProblemSpec,
    /// Reference count = finest study count × this factor.
    pub reference_factor: usize,
}

impl StudyPlan {
    pub fn spatial(problem: ProblemSpec, element_counts: Vec<usize>, steps: usize, theta: f64) -> Self {
        Self {
            axis: StudyAxis::Spatial,
            resolutions: element_counts,
            fixed: steps,
            theta,
            t_final: 1.0,
            problem,
            reference_factor: DEFAULT_REFERENCE_FACTOR,
        }
    }

    pub fn temporal(problem: ProblemSpec, step_counts: Vec<usize>, elements: usize, theta: f64) -> Self {
        Self {
            axis: StudyAxis::Temporal,
            resolutions: step_counts,
            fixed: elements,
            theta,
            t_final: 1.0,
            problem,
            reference_factor: DEFAULT_REFERENCE_FACTOR,
        }
    }

    pub fn with_reference_factor(mut self, factor: usize) -> Self {
        self.reference_factor = factor;
        self
    }

    pub fn reference_count(&self) -> usize {
        self.resolutions.last().copied().unwrap_or(0) * self.reference_factor
    }

    /// `(elements, steps)` of the reference run.
    pub fn reference_grid(&self) -> (usize, usize) {
        match self.axis {
            StudyAxis::Spatial => (self.reference_count(), self.fixed),
            StudyAxis::Temporal => (self.fixed, self.reference_count()),
        }
    }

    /// `(elements, steps)` of study row `i`.
    pub fn row_grid(&self, i: usize) -> (usize, usize) {
        match self.axis {
            StudyAxis::Spatial => (self.resolutions[i], self.fixed),
            StudyAxis::Temporal => (self.fixed, self.resolutions[i]),
        }
    }

    /// `h` or `k` of study row `i`.
    pub fn resolution(&self, i: usize) -> f64 {
        match self.axis {
            StudyAxis::Spatial => 1.0 / self.resolutions[i] as f64,
            StudyAxis::Temporal => self.t_final / self.resolutions[i] as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        if self.resolutions.is_empty() {
            return Err(Error::InvalidConfig("study needs at least one resolution".into()));
        }
        if self.resolutions[0] == 0 || self.fixed == 0 || self.reference_factor == 0 {
            return Err(Error::InvalidConfig("study counts must be positive".into()));
        }
        if self.resolutions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("study resolutions must be strictly decreasing".into()));
        }
        let reference = self.reference_count();
        if let Some(bad) = self.resolutions.iter().find(|&&r| reference % r != 0) {
            return Err(Error::InvalidConfig(format!("count {bad} does not nest in the reference count {reference}")));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::InvalidConfig("final time must be positive".into()));
        }
        ThetaConfig::new(self.theta, self.t_final, self.fixed).validate()
    }
}

pub(crate) fn mesh_for(dimension: Dimensionality, n: usize) -> Result<Mesh> {
    Ok(match dimension {
        Dimensionality::OneD => build_uniform_1d(n)?.into(),
        Dimensionality::TwoD => build_structured_2d(n)?.into(),
    })
}

/// Refined solution treated as exact.
#[derive(Debug, Clone)]
pub struct Reference {
    pub dimension: Dimensionality,
    pub elements: usize,
    pub steps: usize,
    pub trajectory: StateTrajectory,
}

impl Reference {
    /// Reference values at the nodes of the uniform `elements` mesh.
    pub fn restrict_state(&self, level: usize, elements: usize) -> Result<Vec<f64>> {
        if elements == 0 || self.elements % elements != 0 {
            return Err(Error::InvalidConfig(format!("{elements} elements do not nest in {}", self.elements)));
        }
        let r = self.elements / elements;
        let fine = &self.trajectory.states[level];
        Ok(match self.dimension {
            Dimensionality::OneD => (0..=elements).map(|i| fine[i * r]).collect(),
            Dimensionality::TwoD => {
                let side = self.elements + 1;
                let mut out = Vec::with_capacity((elements + 1) * (elements + 1));
                for j in 0..=elements {
                    for i in 0..=elements {
                        out.push(fine[j * r * side + i * r]);
                    }
                }
                out
            }
        })
    }

    /// Reference at every level of a `steps`-step grid on an `elements` mesh.
    pub fn restrict(&self, elements: usize, steps: usize) -> Result<Vec<Vec<f64>>> {
        if steps == 0 || self.steps % steps != 0 {
            return Err(Error::InvalidConfig(format!("{steps} steps do not nest in {}", self.steps)));
        }
        let r = self.steps / steps;
        (0..=steps).map(|n| self.restrict_state(n * r, elements)).collect()
    }
}

pub fn build_reference(
    problem: &ProblemSpec,
    fine_elements: usize,
    fine_steps: usize,
    theta: f64,
    t_final: f64,
) -> Result<Reference> {
    let mesh = mesh_for(problem.dimension, fine_elements)?;
    let disc = Discretization::new(mesh);
    let config = ThetaConfig::new(theta, t_final, fine_steps);
    let trajectory = run_with(problem, &disc, &config).map_err(|f| f.error)?;
    Ok(Reference { dimension: problem.dimension, elements: fine_elements, steps: fine_steps, trajectory })
}

/// Errors of one study row against the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    /// `h` or `k`.
    pub resolution: f64,
    pub elements: usize,
    pub steps: usize,
    /// `‖W^M - w^M‖` at the final time.
    pub state_l2: f64,
    /// `max |W^M - w^M|` over nodes at the final time.
    pub state_linf: f64,
    /// 1D: `max_n |V₀ⁿ - v₀ⁿ|`, 2D: `max_n ‖v₂ₕⁿ - v₂ⁿ‖_{L²(∂Ω)}`.
    pub control_a: f64,
    /// 1D: `max_n |V₁ⁿ - v₁ⁿ|`, unused in 2D.
    pub control_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorColumn {
    StateL2,
    StateLinf,
    V0,
    V1,
    V2,
}

impl ErrorColumn {
    pub fn name(self) -> &'static str {
        match self {
            ErrorColumn::StateL2 => "l2",
            ErrorColumn::StateLinf => "linf",
            ErrorColumn::V0 => "v0",
            ErrorColumn::V1 => "v1",
            ErrorColumn::V2 => "v2_l2",
        }
    }

    fn pick(self, s: &ErrorSample) -> f64 {
        match self {
            ErrorColumn::StateL2 => s.state_l2,
            ErrorColumn::StateLinf => s.state_linf,
            ErrorColumn::V0 | ErrorColumn::V2 => s.control_a,
            ErrorColumn::V1 => s.control_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub resolution: f64,
    pub errors: Vec<f64>,
    /// `None` on the first row and wherever an order is not computable.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub theta: f64,
    pub columns: Vec<ErrorColumn>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Orders of one column, skipping the first row.
    pub fn orders(&self, column: usize) -> Vec<Option<f64>> {
        self.rows.iter().skip(1).map(|r| r.orders[column]).collect()
    }

    pub fn errors(&self, column: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.errors[column]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub plan: StudyPlan,
    /// One entry per planned resolution; failed rows keep their error.
    pub samples: Vec<std::result::Result<ErrorSample, Error>>,
}

impl StudyOutcome {
    /// Table over successful rows. Orders use the actual resolution ratio
    /// between consecutive successful rows.
    pub fn table(&self, columns: &[ErrorColumn]) -> ConvergenceTable {
        let ok: Vec<&ErrorSample> = self.samples.iter().filter_map(|s| s.as_ref().ok()).collect();
        let mut rows = Vec::with_capacity(ok.len());
        for (i, s) in ok.iter().enumerate() {
            let errors: Vec<f64> = columns.iter().map(|c| c.pick(s)).collect();
            let orders = columns
                .iter()
                .map(|c| {
                    let prev = ok.get(i.wrapping_sub(1)).filter(|_| i > 0)?;
                    observed_order(c.pick(prev), c.pick(s), prev.resolution / s.resolution).ok()
                })
                .collect();
            rows.push(ConvergenceRow { resolution: s.resolution, errors, orders });
        }
        ConvergenceTable { theta: self.plan.theta, columns: columns.to_vec(), rows }
    }

    pub fn state_table(&self) -> ConvergenceTable {
        self.table(&[ErrorColumn::StateL2, ErrorColumn::StateLinf])
    }

    pub fn control_table(&self) -> ConvergenceTable {
        match self.plan.problem.dimension {
            Dimensionality::OneD => self.table(&[ErrorColumn::V0, ErrorColumn::V1]),
            Dimensionality::TwoD => self.table(&[ErrorColumn::V2]),
        }
    }
}

/// `log(e_coarse / e_fine) / log(ratio)`
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0 && ratio > 1.0) || !(e_coarse.is_finite() && e_fine.is_finite()) {
        return Err(Error::NonPositiveError);
    }
    Ok((e_coarse / e_fine).ln() / ratio.ln())
}

fn measure(plan: &StudyPlan, reference: &Reference, row: usize, traj: &StateTrajectory) -> Result<ErrorSample> {
    let (elements, steps) = plan.row_grid(row);
    let mesh = mesh_for(plan.problem.dimension, elements)?;
    let oracle = reference.restrict(elements, steps)?;
    let last = steps;
    let diff: Vec<f64> = traj.states[last].iter().zip(&oracle[last]).map(|(a, b)| a - b).collect();
    let norms = NormCalculator::new(&mesh);
    let params = &plan.problem.params;
    let (mut control_a, mut control_b) = (0.0_f64, 0.0_f64);
    for (w, r) in traj.states.iter().zip(&oracle) {
        match plan.problem.dimension {
            Dimensionality::OneD => {
                let (e0, e1) = control_error_pair_1d(w, (r[0], r[r.len() - 1]), params);
                control_a = control_a.max(e0);
                control_b = control_b.max(e1);
            }
            Dimensionality::TwoD => {
                control_a = control_a.max(control_difference_l2_2d(&mesh, w, r, params)?);
            }
        }
    }
    Ok(ErrorSample {
        resolution: plan.resolution(row),
        elements,
        steps,
        state_l2: norms.l2(&diff)?,
        state_linf: norm_linf(&diff),
        control_a,
        control_b,
    })
}

fn run_row(plan: &StudyPlan, row: usize) -> Result<StateTrajectory> {
    let (elements, steps) = plan.row_grid(row);
    let disc = Discretization::new(mesh_for(plan.problem.dimension, elements)?);
    let config = ThetaConfig::new(plan.theta, plan.t_final, steps);
    run_with(&plan.problem, &disc, &config).map_err(|f| f.error)
}

/// Runs the reference and every row (concurrently), then measures errors.
pub fn run_study(plan: &StudyPlan) -> Result<StudyOutcome> {
    plan.validate()?;
    let (ref_elements, ref_steps) = plan.reference_grid();
    let (reference, rows) = rayon::join(
        || build_reference(&plan.problem, ref_elements, ref_steps, plan.theta, plan.t_final),
        || (0..plan.resolutions.len()).into_par_iter().map(|i| run_row(plan, i)).collect::<Vec<_>>(),
    );
    let reference = reference?;
    let samples = rows
        .into_iter()
        .enumerate()
        .map(|(i, traj)| traj.and_then(|t| measure(plan, &reference, i, &t)))
        .collect();
    Ok(StudyOutcome { plan: plan.clone(), samples })
}

pub fn spatial_study(plan: &StudyPlan) -> Result<StudyOutcome> {
    if plan.axis != StudyAxis::Spatial {
        return Err(Error::InvalidConfig("spatial study needs a spatial plan".into()));
    }
    run_study(plan)
}

pub fn temporal_study(plan: &StudyPlan) -> Result<StudyOutcome> {
    if plan.axis != StudyAxis::Temporal {
        return Err(Error::InvalidConfig("temporal study needs a temporal plan".into()));
    }
    run_study(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observed_order_values() {
        assert!((observed_order(4e-4, 1e-4, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((observed_order(2e-4, 1e-4, 2.0).unwrap() - 1.0).abs() < 1e-14);
        let oc = observed_order(7.6454e-04, 1.7592e-04, 2.0).unwrap();
        assert!((oc - 2.12).abs() < 0.005, "{oc}");
        assert_eq!(observed_order(0.0, 1e-4, 2.0), Err(Error::NonPositiveError));
        assert_eq!(observed_order(1e-3, 1e-4, 1.0), Err(Error::NonPositiveError));
    }

    #[test]
    fn plan_validation() {
        let p = ProblemSpec::example1();
        assert!(StudyPlan::spatial(p.clone(), vec![4, 8, 16], 10, 1.0).validate().is_ok());
        assert!(StudyPlan::spatial(p.clone(), vec![8, 4], 10, 1.0).validate().is_err());
        assert!(StudyPlan::spatial(p.clone(), vec![3, 4], 10, 1.0).with_reference_factor(1).validate().is_err());
        assert!(StudyPlan::temporal(p, vec![], 10, 1.0).validate().is_err());
    }

    #[test]
    fn restriction_to_own_grid_is_identity() {
        for problem in [ProblemSpec::example1(), ProblemSpec::example2()] {
            let r = build_reference(&problem, 4, 3, 1.0, 0.1).unwrap();
            let all = r.restrict(4, 3).unwrap();
            assert_eq!(all, r.trajectory.states);
        }
    }

    #[test]
    fn restriction_picks_nested_nodes() {
        let r = Reference {
            dimension: Dimensionality::TwoD,
            elements: 4,
            steps: 1,
            trajectory: StateTrajectory { states: vec![(0..25).map(f64::from).collect()], ..Default::default() },
        };
        assert_eq!(r.restrict_state(0, 2).unwrap(), vec![0.0, 2.0, 4.0, 10.0, 12.0, 14.0, 20.0, 22.0, 24.0]);
        assert!(r.restrict_state(0, 3).is_err());
    }

    #[test]
    fn order_is_scale_invariant() {
        for kappa in [1e-6, 0.3, 7.0, 1e5] {
            let a = observed_order(3.1e-3, 8.2e-4, 2.0).unwrap();
            let b = observed_order(kappa * 3.1e-3, kappa * 8.2e-4, 2.0).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
