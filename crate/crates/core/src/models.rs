//! Problem definitions for the shifted variable `w = y - w_d` and the
//! boundary feedback laws.

use std::fmt;
use std::str::FromStr;

use crate::assembly::{edge_gauss4, BoundaryParams};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimensionality {
    OneD,
    TwoD,
}

impl Dimensionality {
    pub fn as_usize(self) -> usize {
        match self {
            Dimensionality::OneD => 1,
            Dimensionality::TwoD => 2,
        }
    }
}

/// Named initial conditions for the shifted state `w₀ = y₀ - w_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `sin(πx) - w_d`
    Example1,
    /// `5 x₁(1 - x₁) x₂(1 - x₂) - w_d`
    Example2,
    Zero,
    Constant(f64),
}

impl InitialCondition {
    pub fn evaluate(&self, point: [f64; 2], w_d: f64) -> f64 {
        let [x, y] = point;
        match *self {
            InitialCondition::Example1 => (std::f64::consts::PI * x).sin() - w_d,
            InitialCondition::Example2 => 5.0 * x * (1.0 - x) * y * (1.0 - y) - w_d,
            InitialCondition::Zero => 0.0,
            InitialCondition::Constant(k) => k,
        }
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "example1" => return Ok(Self::Example1),
            "example2" => return Ok(Self::Example2),
            "zero" => return Ok(Self::Zero),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("constant(").and_then(|r| r.strip_suffix(')')) {
            let k: f64 = inner
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad constant initial condition: {s}")))?;
            return Ok(Self::Constant(k));
        }
        Err(Error::InvalidConfig(format!("unknown initial condition: {s}")))
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Example1 => write!(f, "example1"),
            Self::Example2 => write!(f, "example2"),
            Self::Zero => write!(f, "zero"),
            Self::Constant(k) => write!(f, "constant({k})"),
        }
    }
}

/// A concrete problem. With `controlled = false` the boundary condition is
/// homogeneous Neumann and no feedback is ever evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dimension: Dimensionality,
    pub params: BoundaryParams,
    pub controlled: bool,
    pub initial_condition: InitialCondition,
}

impl ProblemSpec {
    /// 1D reference problem: `ν = 0.1`, `w_d = 1`, `c₀ = c₁ = 0.1`.
    pub fn example1() -> Self {
        Self {
            dimension: Dimensionality::OneD,
            params: BoundaryParams { nu: 0.1, w_d: 1.0, c0: 0.1, c1: 0.1, c2: 0.1 },
            controlled: true,
            initial_condition: InitialCondition::Example1,
        }
    }

    /// 2D reference problem: `ν = 1`, `w_d = 2`, `c₂ = 0.1`.
    pub fn example2() -> Self {
        Self {
            dimension: Dimensionality::TwoD,
            params: BoundaryParams { nu: 1.0, w_d: 2.0, c0: 0.1, c1: 0.1, c2: 0.1 },
            controlled: true,
            initial_condition: InitialCondition::Example2,
        }
    }

    pub fn w_d(&self) -> f64 {
        self.params.w_d
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        match (self.initial_condition, self.dimension) {
            (InitialCondition::Example1, Dimensionality::TwoD) => {
                Err(Error::InvalidConfig("example1 is a 1D initial condition".into()))
            }
            (InitialCondition::Example2, Dimensionality::OneD) => {
                Err(Error::InvalidConfig("example2 is a 2D initial condition".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if mesh.dimension() != self.dimension.as_usize() {
            return Err(Error::InvalidConfig(format!(
                "problem is {}D but mesh is {}D",
                self.dimension.as_usize(),
                mesh.dimension()
            )));
        }
        Ok(())
    }

    /// Nodal interpolant of the initial condition.
    pub fn initial_state(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.coordinates()
            .into_iter()
            .map(|p| self.initial_condition.evaluate(p, self.params.w_d))
            .collect()
    }
}

/// `(v₀, v₁)` from the boundary nodal values, with the `1/ν` scaling and the
/// sign on `v₁` of the Neumann data `w_x(0) = v₀`, `w_x(1) = v₁`.
pub fn control_input_1d(w: &[f64], params: &BoundaryParams) -> (f64, f64) {
    let (left, right) = (w[0], w[w.len() - 1]);
    (
        params.flux_1d(params.c0, left) / params.nu,
        -params.flux_1d(params.c1, right) / params.nu,
    )
}

/// `v₂ = -(1/ν)(2(c₂ + w_d) w + 2/(9c₂) w³)`
pub fn control_law_2d(w: f64, params: &BoundaryParams) -> f64 {
    -params.flux_2d(w) / params.nu
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryControl {
    /// Boundary node indices, counter-clockwise.
    pub nodes: Vec<usize>,
    /// `v₂` at each boundary node.
    pub values: Vec<f64>,
    /// `‖v₂‖_{L²(∂Ω)}` of `v₂` applied to the P1 trace.
    pub l2_norm: f64,
}

/// Evaluates `v₂` on ∂Ω. The norm integrates `v₂(W)²` (degree 6 per edge)
/// with 4-point Gauss.
pub fn control_input_2d(mesh: &Mesh, w: &[f64], params: &BoundaryParams) -> Result<BoundaryControl> {
    let m = mesh.as_2d()?;
    if w.len() != m.node_count() {
        return Err(Error::DimensionMismatch { expected: m.node_count(), found: w.len() });
    }
    let nodes = mesh.boundary_nodes();
    let values = nodes.iter().map(|&i| control_law_2d(w[i], params)).collect();
    let l2_norm = boundary_integral(mesh, w, |s| control_law_2d(s, params).powi(2))?.sqrt();
    Ok(BoundaryControl { nodes, values, l2_norm })
}

/// `∫_∂Ω f(W) dΓ` for the P1 trace of `W`, 4-point Gauss per edge.
pub(crate) fn boundary_integral(mesh: &Mesh, w: &[f64], f: impl Fn(f64) -> f64) -> Result<f64> {
    let m = mesh.as_2d()?;
    let gauss = edge_gauss4();
    let mut total = 0.0;
    for &edge in m.boundary_edges() {
        let len = m.edge_length(edge);
        let (a, b) = (w[edge[0]], w[edge[1]]);
        total += len * gauss.iter().map(|&(s, wt)| wt * f((1.0 - s) * a + s * b)).sum::<f64>();
    }
    Ok(total)
}

/// `∫_∂Ω f(A, B) dΓ` for two P1 traces on the same mesh.
pub(crate) fn boundary_integral_pair(mesh: &Mesh, a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let m = mesh.as_2d()?;
    if a.len() != m.node_count() || b.len() != m.node_count() {
        return Err(Error::DimensionMismatch { expected: m.node_count(), found: a.len().min(b.len()) });
    }
    let gauss = edge_gauss4();
    let mut total = 0.0;
    for &edge in m.boundary_edges() {
        let len = m.edge_length(edge);
        let (a0, a1, b0, b1) = (a[edge[0]], a[edge[1]], b[edge[0]], b[edge[1]]);
        total += len
            * gauss
                .iter()
                .map(|&(s, wt)| wt * f((1.0 - s) * a0 + s * a1, (1.0 - s) * b0 + s * b1))
                .sum::<f64>();
    }
    Ok(total)
}

/// `‖v₂(A) - v₂(B)‖_{L²(∂Ω)}`
pub fn control_difference_l2_2d(mesh: &Mesh, a: &[f64], b: &[f64], params: &BoundaryParams) -> Result<f64> {
    boundary_integral_pair(mesh, a, b, |sa, sb| (control_law_2d(sa, params) - control_law_2d(sb, params)).powi(2))
        .map(f64::sqrt)
}

/// `(|v₀(W) - v₀(w_ref)|, |v₁(W) - v₁(w_ref)|)` in the signed, `1/ν`-scaled
/// convention of [`control_input_1d`].
pub fn control_error_pair_1d(w: &[f64], reference_boundary: (f64, f64), params: &BoundaryParams) -> (f64, f64) {
    let (a0, a1) = control_input_1d(w, params);
    let (b0, b1) = control_input_1d(&[reference_boundary.0, reference_boundary.1], params);
    ((a0 - b0).abs(), (a1 - b1).abs())
}

/// `y = w + w_d`
pub fn shift_to_physical(w: &[f64], w_d: f64) -> Vec<f64> {
    w.iter().map(|v| v + w_d).collect()
}

/// Per-time-level control record of a trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlTrace {
    pub times: Vec<f64>,
    /// 1D only.
    pub v0: Vec<f64>,
    /// 1D only.
    pub v1: Vec<f64>,
    /// 2D only: `‖v₂(t_n)‖_{L²(∂Ω)}`.
    pub v2_boundary_l2: Vec<f64>,
    /// Control values at the boundary nodes, one vector per time level.
    pub boundary_values: Vec<Vec<f64>>,
}

impl ControlTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Builds the trace for a sequence of states. Uncontrolled problems get
    /// an all-zero trace without evaluating the feedback laws.
    pub fn from_states(problem: &ProblemSpec, mesh: &Mesh, times: &[f64], states: &[Vec<f64>]) -> Result<Self> {
        let mut trace = ControlTrace { times: times.to_vec(), ..Default::default() };
        let boundary = mesh.boundary_nodes();
        for w in states {
            match (problem.dimension, problem.controlled) {
                (Dimensionality::OneD, true) => {
                    let (v0, v1) = control_input_1d(w, &problem.params);
                    trace.v0.push(v0);
                    trace.v1.push(v1);
                    trace.boundary_values.push(vec![v0, v1]);
                }
                (Dimensionality::OneD, false) => {
                    trace.v0.push(0.0);
                    trace.v1.push(0.0);
                    trace.boundary_values.push(vec![0.0, 0.0]);
                }
                (Dimensionality::TwoD, true) => {
                    let c = control_input_2d(mesh, w, &problem.params)?;
                    trace.v2_boundary_l2.push(c.l2_norm);
                    trace.boundary_values.push(c.values);
                }
                (Dimensionality::TwoD, false) => {
                    trace.v2_boundary_l2.push(0.0);
                    trace.boundary_values.push(vec![0.0; boundary.len()]);
                }
            }
        }
        Ok(trace)
    }
}
