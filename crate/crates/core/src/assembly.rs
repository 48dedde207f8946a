//! P1 finite element operators for the shifted Burgers system.
//!
//! All integrals are exact for P1 data: the element mass matrix integrates
//! the quadratic Burgers integrand exactly, and boundary edges use 3-point
//! Gauss (degree 5) for the cubic feedback term.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Mesh1D, Mesh2D};
use crate::sparse::{SparseOperator, TripletBuilder};

/// Physical and feedback parameters. `c0`, `c1` act at `x = 0` and `x = 1`
/// in 1D; `c2` is the gain on the whole boundary in 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParams {
    pub nu: f64,
    pub w_d: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        Self { nu: 0.1, w_d: 1.0, c0: 0.1, c1: 0.1, c2: 0.1 }
    }
}

impl BoundaryParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("nu", self.nu), ("c0", self.c0), ("c1", self.c1), ("c2", self.c2)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.w_d >= 0.0 && self.w_d.is_finite()) {
            return Err(Error::InvalidParams(format!("w_d must be non-negative, got {}", self.w_d)));
        }
        Ok(())
    }

    /// Boundary flux `(c + w_d) s + 2/(9c) s³` at one end of the interval.
    pub fn flux_1d(&self, gain: f64, s: f64) -> f64 {
        (gain + self.w_d) * s + 2.0 / (9.0 * gain) * s * s * s
    }

    pub fn flux_1d_derivative(&self, gain: f64, s: f64) -> f64 {
        (gain + self.w_d) + 6.0 / (9.0 * gain) * s * s
    }

    /// Boundary flux `2(c2 + w_d) s + 2/(9 c2) s³` on ∂Ω.
    pub fn flux_2d(&self, s: f64) -> f64 {
        2.0 * (self.c2 + self.w_d) * s + 2.0 / (9.0 * self.c2) * s * s * s
    }

    pub fn flux_2d_derivative(&self, s: f64) -> f64 {
        2.0 * (self.c2 + self.w_d) + 6.0 / (9.0 * self.c2) * s * s
    }
}

/// 3-point Gauss–Legendre on `[0, 1]`: `(abscissa, weight)`.
pub(crate) fn edge_gauss3() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6_f64).sqrt();
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}

/// 4-point Gauss–Legendre on `[0, 1]`, exact to degree 7.
pub(crate) fn edge_gauss4() -> [(f64, f64); 4] {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0_f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0_f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30.0_f64.sqrt()) / 36.0;
    let wb = (18.0 - 30.0_f64.sqrt()) / 36.0;
    [
        (0.5 * (1.0 - b), 0.5 * wb),
        (0.5 * (1.0 - a), 0.5 * wa),
        (0.5 * (1.0 + a), 0.5 * wa),
        (0.5 * (1.0 + b), 0.5 * wb),
    ]
}

fn check_dim(mesh: &Mesh, u: &[f64]) -> Result<()> {
    if mesh.node_count() != u.len() {
        return Err(Error::DimensionMismatch { expected: mesh.node_count(), found: u.len() });
    }
    Ok(())
}

fn mass_1d(mesh: &Mesh1D) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(mesh.node_count(), 4 * mesh.element_count());
    for e in 0..mesh.element_count() {
        let [i, j] = mesh.element(e);
        let h = mesh.element_length(e);
        b.add(i, i, h / 3.0);
        b.add(i, j, h / 6.0);
        b.add(j, i, h / 6.0);
        b.add(j, j, h / 3.0);
    }
    b.build()
}

fn mass_2d(mesh: &Mesh2D) -> SparseOperator {
    let mut b = TripletBuilder::with_capacity(mesh.node_count(), 9 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.signed_area(t);
        for a in 0..3 {
            for c in 0..3 {
                let factor = if a == c { 2.0 } else { 1.0 };
                b.add(tri[a], tri[c], factor * area / 12.0);
            }
        }
    }
    b.build()
}

/// `M[i][j] = ∫ φ_i φ_j`
pub fn assemble_mass(mesh: &Mesh) -> SparseOperator {
    match mesh {
        Mesh::OneD(m) => mass_1d(m),
        Mesh::TwoD(m) => mass_2d(m),
    }
}

/// `A[i][j] = ∫ ∇φ_i · ∇φ_j` (no viscosity factor).
pub fn assemble_stiffness(mesh: &Mesh) -> SparseOperator {
    match mesh {
        Mesh::OneD(m) => {
            let mut b = TripletBuilder::with_capacity(m.node_count(), 4 * m.element_count());
            for e in 0..m.element_count() {
                let [i, j] = m.element(e);
                let inv = 1.0 / m.element_length(e);
                b.add(i, i, inv);
                b.add(i, j, -inv);
                b.add(j, i, -inv);
                b.add(j, j, inv);
            }
            b.build()
        }
        Mesh::TwoD(m) => {
            let mut b = TripletBuilder::with_capacity(m.node_count(), 9 * m.triangles().len());
            for (t, tri) in m.triangles().iter().enumerate() {
                let (g, area) = m.basis_gradients(t);
                for a in 0..3 {
                    for c in 0..3 {
                        b.add(tri[a], tri[c], area * (g[a][0] * g[c][0] + g[a][1] * g[c][1]));
                    }
                }
            }
            b.build()
        }
    }
}

/// `C[i][j] = ∫ (∂_𝟏 φ_j) φ_i` with `𝟏 = 1` in 1D and `(1, 1)` in 2D.
pub fn assemble_convection(mesh: &Mesh) -> SparseOperator {
    match mesh {
        Mesh::OneD(m) => {
            let mut b = TripletBuilder::with_capacity(m.node_count(), 4 * m.element_count());
            for e in 0..m.element_count() {
                let [i, j] = m.element(e);
                // ∫ φ_i over the element is h/2, φ_j' = ±1/h
                b.add(i, i, -0.5);
                b.add(i, j, 0.5);
                b.add(j, i, -0.5);
                b.add(j, j, 0.5);
            }
            b.build()
        }
        Mesh::TwoD(m) => {
            let mut b = TripletBuilder::with_capacity(m.node_count(), 9 * m.triangles().len());
            for (t, tri) in m.triangles().iter().enumerate() {
                let (g, area) = m.basis_gradients(t);
                for a in 0..3 {
                    for c in 0..3 {
                        b.add(tri[a], tri[c], (g[c][0] + g[c][1]) * area / 3.0);
                    }
                }
            }
            b.build()
        }
    }
}

/// Residual `r_i = ∫ U (∂_𝟏 U) φ_i` and its exact Jacobian.
///
/// On each element `∂_𝟏 U` is a constant `g`, so `r_e = g · M_e U_e` and
/// `J_e[i][j] = (∂_𝟏 φ_j)(M_e U_e)_i + g M_e[i][j]`.
pub fn burgers_term(mesh: &Mesh, u: &[f64]) -> Result<(Vec<f64>, SparseOperator)> {
    check_dim(mesh, u)?;
    let n = mesh.node_count();
    let mut res = vec![0.0; n];
    match mesh {
        Mesh::OneD(m) => {
            let mut jac = TripletBuilder::with_capacity(n, 4 * m.element_count());
            for e in 0..m.element_count() {
                let nodes = m.element(e);
                let h = m.element_length(e);
                let dphi = [-1.0 / h, 1.0 / h];
                let ue = [u[nodes[0]], u[nodes[1]]];
                let g = (ue[1] - ue[0]) / h;
                let me = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
                let mu = [
                    me[0][0] * ue[0] + me[0][1] * ue[1],
                    me[1][0] * ue[0] + me[1][1] * ue[1],
                ];
                for a in 0..2 {
                    res[nodes[a]] += g * mu[a];
                    for c in 0..2 {
                        jac.add(nodes[a], nodes[c], dphi[c] * mu[a] + g * me[a][c]);
                    }
                }
            }
            Ok((res, jac.build()))
        }
        Mesh::TwoD(m) => {
            let mut jac = TripletBuilder::with_capacity(n, 9 * m.triangles().len());
            for (t, tri) in m.triangles().iter().enumerate() {
                let (grads, area) = m.basis_gradients(t);
                let dphi = grads.map(|gr| gr[0] + gr[1]);
                let ue = tri.map(|v| u[v]);
                // Σ dphi = 0, so differences make g exactly zero for constants
                let g: f64 = (1..3).map(|a| dphi[a] * (ue[a] - ue[0])).sum();
                let me = |a: usize, c: usize| if a == c { area / 6.0 } else { area / 12.0 };
                let mu: [f64; 3] = std::array::from_fn(|a| (0..3).map(|c| me(a, c) * ue[c]).sum());
                for a in 0..3 {
                    res[tri[a]] += g * mu[a];
                    for c in 0..3 {
                        jac.add(tri[a], tri[c], dphi[c] * mu[a] + g * me(a, c));
                    }
                }
            }
            Ok((res, jac.build()))
        }
    }
}

/// Point feedback terms at `x = 0` and `x = 1`:
/// `(c_i + w_d) U + 2/(9 c_i) U³` tested against the boundary basis function.
pub fn boundary_feedback_1d(u: &[f64], params: &BoundaryParams) -> Result<(Vec<f64>, SparseOperator)> {
    params.validate()?;
    if u.len() < 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: u.len() });
    }
    let last = u.len() - 1;
    let mut res = vec![0.0; u.len()];
    res[0] = params.flux_1d(params.c0, u[0]);
    res[last] = params.flux_1d(params.c1, u[last]);
    let mut jac = TripletBuilder::new(u.len());
    jac.add(0, 0, params.flux_1d_derivative(params.c0, u[0]));
    jac.add(last, last, params.flux_1d_derivative(params.c1, u[last]));
    Ok((res, jac.build()))
}

/// Edge integrals `∫_∂Ω (2(c2 + w_d) U + 2/(9 c2) U³) φ_i dΓ` and their
/// exact Jacobian.
pub fn boundary_feedback_2d(
    mesh: &Mesh,
    u: &[f64],
    params: &BoundaryParams,
) -> Result<(Vec<f64>, SparseOperator)> {
    let m = mesh.as_2d()?;
    check_dim(mesh, u)?;
    params.validate()?;
    let mut res = vec![0.0; u.len()];
    let mut jac = TripletBuilder::with_capacity(u.len(), 4 * m.boundary_edges().len());
    let gauss = edge_gauss3();
    for &edge in m.boundary_edges() {
        let len = m.edge_length(edge);
        let (ua, ub) = (u[edge[0]], u[edge[1]]);
        let mut r = [0.0; 2];
        let mut j = [[0.0; 2]; 2];
        for &(s, w) in &gauss {
            let phi = [1.0 - s, s];
            let val = phi[0] * ua + phi[1] * ub;
            let f = params.flux_2d(val);
            let df = params.flux_2d_derivative(val);
            for a in 0..2 {
                r[a] += len * w * f * phi[a];
                for c in 0..2 {
                    j[a][c] += len * w * df * phi[a] * phi[c];
                }
            }
        }
        for a in 0..2 {
            res[edge[a]] += r[a];
            for c in 0..2 {
                jac.add(edge[a], edge[c], j[a][c]);
            }
        }
    }
    Ok((res, jac.build()))
}

/// Dispatches to the 1D or 2D feedback term.
pub fn boundary_feedback(
    mesh: &Mesh,
    u: &[f64],
    params: &BoundaryParams,
) -> Result<(Vec<f64>, SparseOperator)> {
    match mesh {
        Mesh::OneD(_) => {
            check_dim(mesh, u)?;
            boundary_feedback_1d(u, params)
        }
        Mesh::TwoD(_) => boundary_feedback_2d(mesh, u, params),
    }
}
