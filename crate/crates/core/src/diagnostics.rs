//! Norms, Lyapunov monitoring and decay-rate fitting.

use std::ops::Range;

use crate::assembly::{assemble_mass, assemble_stiffness, BoundaryParams};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::models::boundary_integral;
use crate::sparse::SparseOperator;
use crate::stepper::StateTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormReport {
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
    /// 2D only.
    pub boundary_l2: Option<f64>,
    /// 2D only.
    pub boundary_l4: Option<f64>,
    /// 1D only: `√(‖W‖² + W(0)² + W(1)²)`.
    pub triple_norm: Option<f64>,
}

/// Caches the mass and stiffness matrices of one mesh.
#[derive(Debug, Clone)]
pub struct NormCalculator {
    mesh: Mesh,
    mass: SparseOperator,
    stiffness: SparseOperator,
}

impl NormCalculator {
    pub fn new(mesh: &Mesh) -> Self {
        Self { mesh: mesh.clone(), mass: assemble_mass(mesh), stiffness: assemble_stiffness(mesh) }
    }

    fn check(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.mesh.node_count() {
            return Err(Error::DimensionMismatch { expected: self.mesh.node_count(), found: w.len() });
        }
        Ok(())
    }

    pub fn l2(&self, w: &[f64]) -> Result<f64> {
        self.check(w)?;
        Ok(self.mass.quadratic_form(w)?.max(0.0).sqrt())
    }

    pub fn h1(&self, w: &[f64]) -> Result<f64> {
        self.check(w)?;
        let total = self.mass.quadratic_form(w)? + self.stiffness.quadratic_form(w)?;
        Ok(total.max(0.0).sqrt())
    }

    pub fn h1_seminorm_squared(&self, w: &[f64]) -> Result<f64> {
        self.check(w)?;
        self.stiffness.quadratic_form(w)
    }

    pub fn triple(&self, w: &[f64]) -> Result<f64> {
        self.mesh.as_1d()?;
        let l2 = self.l2(w)?;
        let (a, b) = (w[0], w[w.len() - 1]);
        Ok((l2 * l2 + a * a + b * b).sqrt())
    }

    pub fn boundary_l2(&self, w: &[f64]) -> Result<f64> {
        self.check(w)?;
        Ok(boundary_integral(&self.mesh, w, |s| s * s)?.sqrt())
    }

    pub fn boundary_l4(&self, w: &[f64]) -> Result<f64> {
        self.check(w)?;
        Ok(boundary_integral(&self.mesh, w, |s| s.powi(4))?.powf(0.25))
    }

    pub fn report(&self, w: &[f64]) -> Result<NormReport> {
        let mut r = NormReport { l2: self.l2(w)?, h1: self.h1(w)?, linf: norm_linf(w), ..Default::default() };
        match self.mesh {
            Mesh::OneD(_) => r.triple_norm = Some(self.triple(w)?),
            Mesh::TwoD(_) => {
                r.boundary_l2 = Some(self.boundary_l2(w)?);
                r.boundary_l4 = Some(self.boundary_l4(w)?);
            }
        }
        Ok(r)
    }
}

pub fn norm_l2(mesh: &Mesh, w: &[f64]) -> Result<f64> {
    NormCalculator::new(mesh).l2(w)
}

pub fn norm_h1(mesh: &Mesh, w: &[f64]) -> Result<f64> {
    NormCalculator::new(mesh).h1(w)
}

/// Maximum nodal magnitude; exact for P1 functions.
pub fn norm_linf(w: &[f64]) -> f64 {
    w.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn triple_norm(mesh: &Mesh, w: &[f64]) -> Result<f64> {
    NormCalculator::new(mesh).triple(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LyapunovVerdict {
    pub monotone: bool,
    /// First `n` with `‖W^{n+1}‖ > ‖W^n‖ + tol` (or a non-finite norm).
    pub first_violation: Option<usize>,
}

/// Checks `‖W^{n+1}‖ ≤ ‖W^n‖ + tol` along a norm history.
pub fn lyapunov_monitor_norms(norms: &[f64], tol: f64) -> LyapunovVerdict {
    let first_violation = norms.windows(2).position(|w| !(w[1] <= w[0] + tol));
    LyapunovVerdict { monotone: first_violation.is_none(), first_violation }
}

pub fn lyapunov_monitor(trajectory: &StateTrajectory, tol: f64) -> LyapunovVerdict {
    lyapunov_monitor_norms(&trajectory.l2_history, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Fitted rate in `‖W^n‖ ≈ C e^{-α t_n}`.
    pub alpha_hat: f64,
    pub fit_window: Range<usize>,
    /// Root-mean-square misfit of `ln ‖W^n‖`.
    pub residual: f64,
}

/// Skips the first 10% of samples.
pub fn default_decay_window(len: usize) -> Range<usize> {
    (len / 10)..len
}

/// Least-squares slope of `ln ‖W^n‖` against `t_n` over `window`;
/// `alpha_hat = -slope`.
pub fn fit_decay_rate(times: &[f64], norms: &[f64], window: Range<usize>) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: norms.len() });
    }
    if window.end > norms.len() || window.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "decay window {window:?} needs at least two samples within {} points",
            norms.len()
        )));
    }
    for i in window.clone() {
        if !(norms[i] > 0.0) {
            return Err(Error::NonPositiveNorm { index: i });
        }
    }
    let n = window.len() as f64;
    let ts = &times[window.clone()];
    let ys: Vec<f64> = norms[window.clone()].iter().map(|v| v.ln()).collect();
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, y) in ts.iter().zip(&ys) {
        sxy += (t - t_mean) * (y - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let sse: f64 = ts.iter().zip(&ys).map(|(t, y)| (y - intercept - slope * t).powi(2)).sum();
    Ok(DecayFit { alpha_hat: -slope, fit_window: window, residual: (sse / n).sqrt() })
}

pub fn fit_trajectory_decay(trajectory: &StateTrajectory, window: Option<Range<usize>>) -> Result<DecayFit> {
    let window = window.unwrap_or_else(|| default_decay_window(trajectory.len()));
    fit_decay_rate(&trajectory.times, &trajectory.l2_history, window)
}

/// `E₁ = (c₀+w_d) W(0)² + (c₁+w_d) W(1)² + W(0)⁴/(9c₀) + W(1)⁴/(9c₁)`
pub fn compute_e1(w: &[f64], params: &BoundaryParams) -> f64 {
    let (a, b) = (w[0], w[w.len() - 1]);
    (params.c0 + params.w_d) * a * a
        + (params.c1 + params.w_d) * b * b
        + a.powi(4) / (9.0 * params.c0)
        + b.powi(4) / (9.0 * params.c1)
}
