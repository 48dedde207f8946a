//! P1 meshes: partitions of `[0, 1]` and structured triangulations of the
//! unit square.

use crate::error::{Error, Result};

/// A partition `0 = x_0 < x_1 < ... < x_N = 1` with elements `(j-1, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    h: f64,
}

impl Mesh1D {
    /// Builds a mesh from arbitrary ascending nodes. The first node must be
    /// exactly 0 and the last exactly 1.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidMesh("need at least two nodes".into()));
        }
        if nodes[0] != 0.0 || nodes[nodes.len() - 1] != 1.0 {
            return Err(Error::InvalidMesh("nodes must start at 0 and end at 1".into()));
        }
        let mut h = 0.0_f64;
        for w in nodes.windows(2) {
            let len = w[1] - w[0];
            if !(len > 0.0) {
                return Err(Error::InvalidMesh("nodes must be strictly increasing".into()));
            }
            h = h.max(len);
        }
        Ok(Self { nodes, h })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("element count must be positive".into()));
        }
        let nodes = (0..=n).map(|j| j as f64 / n as f64).collect();
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Node index pairs of element `e`.
    pub fn element(&self, e: usize) -> [usize; 2] {
        [e, e + 1]
    }

    pub fn element_length(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

/// Conforming triangulation of the unit square.
///
/// Triangles are stored counter-clockwise. `boundary_edges` walk the
/// boundary once, counter-clockwise, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<[usize; 2]>,
    h: f64,
}

impl Mesh2D {
    /// Uniform `n x n` grid, every cell split along its
    /// lower-left to upper-right diagonal. Refining `n -> 2n` nests exactly.
    pub fn structured(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("subdivision count must be positive".into()));
        }
        let side = n + 1;
        let idx = |i: usize, j: usize| j * side + i;
        let mut vertices = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let loop_nodes = square_boundary_loop(n);
        let boundary_edges = (0..loop_nodes.len())
            .map(|e| [loop_nodes[e], loop_nodes[(e + 1) % loop_nodes.len()]])
            .collect();
        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
            h: std::f64::consts::SQRT_2 / n as f64,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn node_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Signed area of triangle `t` (positive for counter-clockwise).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn edge_length(&self, edge: [usize; 2]) -> f64 {
        let (a, b) = (self.vertices[edge[0]], self.vertices[edge[1]]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Gradients of the three barycentric basis functions on triangle `t`,
    /// together with its area.
    pub fn basis_gradients(&self, t: usize) -> ([[f64; 2]; 3], f64) {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        let area = self.signed_area(t);
        let inv = 1.0 / (2.0 * area);
        let grads = [
            [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv],
            [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv],
            [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv],
        ];
        (grads, area)
    }
}

/// Boundary vertices of the structured grid, counter-clockwise from (0, 0).
fn square_boundary_loop(n: usize) -> Vec<usize> {
    let side = n + 1;
    let idx = |i: usize, j: usize| j * side + i;
    let mut out = Vec::with_capacity(4 * n);
    out.extend((0..n).map(|i| idx(i, 0)));
    out.extend((0..n).map(|j| idx(n, j)));
    out.extend((1..=n).rev().map(|i| idx(i, n)));
    out.extend((1..=n).rev().map(|j| idx(0, j)));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mesh {
    OneD(Mesh1D),
    TwoD(Mesh2D),
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        match self {
            Mesh::OneD(m) => m.node_count(),
            Mesh::TwoD(m) => m.node_count(),
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            Mesh::OneD(m) => m.h(),
            Mesh::TwoD(m) => m.h(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Mesh::OneD(_) => 1,
            Mesh::TwoD(_) => 2,
        }
    }

    /// Node coordinates, padded to two components (`y = 0` in 1D).
    pub fn coordinates(&self) -> Vec<[f64; 2]> {
        match self {
            Mesh::OneD(m) => m.nodes().iter().map(|&x| [x, 0.0]).collect(),
            Mesh::TwoD(m) => m.vertices().to_vec(),
        }
    }

    /// Boundary node indices: `[first, last]` in 1D, the counter-clockwise
    /// loop in 2D.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        match self {
            Mesh::OneD(m) => vec![0, m.node_count() - 1],
            Mesh::TwoD(m) => m.boundary_edges().iter().map(|e| e[0]).collect(),
        }
    }

    pub fn as_1d(&self) -> Result<&Mesh1D> {
        match self {
            Mesh::OneD(m) => Ok(m),
            Mesh::TwoD(_) => Err(Error::WrongDimension { expected: "1D" }),
        }
    }

    pub fn as_2d(&self) -> Result<&Mesh2D> {
        match self {
            Mesh::TwoD(m) => Ok(m),
            Mesh::OneD(_) => Err(Error::WrongDimension { expected: "2D" }),
        }
    }

    /// Writes the plain-text mesh dump: a `vertices <count>` line followed by
    /// one `x [y]` line per vertex, then an `elements <count>` line followed
    /// by one line of vertex indices per element.
    pub fn write_text<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        match self {
            Mesh::OneD(m) => {
                writeln!(out, "vertices {}", m.node_count())?;
                for x in m.nodes() {
                    writeln!(out, "{x:.17e}")?;
                }
                writeln!(out, "elements {}", m.element_count())?;
                for e in 0..m.element_count() {
                    let [a, b] = m.element(e);
                    writeln!(out, "{a} {b}")?;
                }
            }
            Mesh::TwoD(m) => {
                writeln!(out, "vertices {}", m.node_count())?;
                for [x, y] in m.vertices() {
                    writeln!(out, "{x:.17e} {y:.17e}")?;
                }
                writeln!(out, "elements {}", m.triangles().len())?;
                for [a, b, c] in m.triangles() {
                    writeln!(out, "{a} {b} {c}")?;
                }
            }
        }
        Ok(())
    }
}

impl From<Mesh1D> for Mesh {
    fn from(m: Mesh1D) -> Self {
        Mesh::OneD(m)
    }
}

impl From<Mesh2D> for Mesh {
    fn from(m: Mesh2D) -> Self {
        Mesh::TwoD(m)
    }
}

pub fn build_uniform_1d(n: usize) -> Result<Mesh1D> {
    Mesh1D::uniform(n)
}

pub fn build_structured_2d(n: usize) -> Result<Mesh2D> {
    Mesh2D::structured(n)
}
