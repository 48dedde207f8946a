//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use burgers_fem::mesh::Mesh;
use burgers_fem::sparse::SparseOperator;

/// Max-entry relative mismatch between `jac` and central differences of `f`.
pub fn fd_mismatch(f: impl Fn(&[f64]) -> Vec<f64>, jac: &SparseOperator, u: &[f64]) -> f64 {
    let eps = 1e-6;
    let dense = jac.to_dense();
    let scale = dense.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0_f64;
    for j in 0..u.len() {
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[j] += eps;
        dn[j] -= eps;
        let (fp, fm) = (f(&up), f(&dn));
        for i in 0..u.len() {
            let fd = (fp[i] - fm[i]) / (2.0 * eps);
            worst = worst.max((fd - dense[i][j]).abs() / scale);
        }
    }
    worst
}

/// 5-point Gauss on `[0, 1]`.
pub fn gauss5() -> Vec<(f64, f64)> {
    let r = [
        (0.0, 128.0 / 225.0),
        ((5.0 - 2.0 * (10.0_f64 / 7.0).sqrt()).sqrt() / 3.0, (322.0 + 13.0 * 70.0_f64.sqrt()) / 900.0),
        ((5.0 + 2.0 * (10.0_f64 / 7.0).sqrt()).sqrt() / 3.0, (322.0 - 13.0 * 70.0_f64.sqrt()) / 900.0),
    ];
    let mut out = vec![(0.5, 0.5 * r[0].1)];
    for &(x, w) in &r[1..] {
        out.push((0.5 * (1.0 - x), 0.5 * w));
        out.push((0.5 * (1.0 + x), 0.5 * w));
    }
    out
}

/// `‖W‖` by per-element 5-point Gauss (1D) or a collapsed-square
/// 5×5 Gauss product rule (2D).
pub fn brute_force_l2(mesh: &Mesh, w: &[f64]) -> f64 {
    let g = gauss5();
    let mut total = 0.0;
    match mesh {
        Mesh::OneD(m) => {
            for e in 0..m.element_count() {
                let [i, j] = m.element(e);
                let h = m.nodes()[j] - m.nodes()[i];
                for &(s, wt) in &g {
                    let u = (1.0 - s) * w[i] + s * w[j];
                    total += h * wt * u * u;
                }
            }
        }
        Mesh::TwoD(m) => {
            for tri in m.triangles() {
                let p: Vec<[f64; 2]> = tri.iter().map(|&v| m.vertices()[v]).collect();
                let jac = ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
                for &(a, wa) in &g {
                    for &(b, wb) in &g {
                        // (a, b) in the square -> (ξ, η) = (a, b(1 - a)) in the reference triangle
                        let (xi, eta) = (a, b * (1.0 - a));
                        let u = (1.0 - xi - eta) * w[tri[0]] + xi * w[tri[1]] + eta * w[tri[2]];
                        total += jac * wa * wb * (1.0 - a) * u * u;
                    }
                }
            }
        }
    }
    total.sqrt()
}
