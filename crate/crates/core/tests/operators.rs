//! Operator checks against independent oracles: finite differences, brute
//! force quadrature and closed-form identities.

use burgers_fem::assembly::*;
use burgers_fem::diagnostics::NormCalculator;
use burgers_fem::mesh::{build_structured_2d, build_uniform_1d, Mesh, Mesh1D};
use burgers_fem::models::{control_input_2d, ProblemSpec};
use burgers_fem::stepper::{Discretization, ThetaConfig, ThetaStepper};
use proptest::prelude::*;

mod common;
use common::{brute_force_l2, fd_mismatch};

fn meshes() -> Vec<Mesh> {
    vec![
        build_uniform_1d(5).unwrap().into(),
        Mesh1D::from_nodes(vec![0.0, 0.1, 0.35, 0.4, 0.7, 1.0]).unwrap().into(),
        build_uniform_1d(16).unwrap().into(),
        build_structured_2d(2).unwrap().into(),
        build_structured_2d(4).unwrap().into(),
    ]
}

fn params() -> BoundaryParams {
    BoundaryParams { nu: 0.3, w_d: 1.5, c0: 0.2, c1: 0.7, c2: 0.4 }
}

fn problem_for(mesh: &Mesh) -> ProblemSpec {
    let base = if mesh.dimension() == 1 { ProblemSpec::example1() } else { ProblemSpec::example2() };
    ProblemSpec { params: params(), ..base }
}

fn state_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn burgers_jacobian_matches_fd(seed in state_strategy(25)) {
        for mesh in meshes() {
            let u = &seed[..mesh.node_count()];
            let (_, jac) = burgers_term(&mesh, u).unwrap();
            let err = fd_mismatch(|v| burgers_term(&mesh, v).unwrap().0, &jac, u);
            prop_assert!(err < 1e-6, "mismatch {err}");
        }
    }

    #[test]
    fn feedback_jacobian_matches_fd(seed in state_strategy(25)) {
        let p = params();
        for mesh in meshes() {
            let u = &seed[..mesh.node_count()];
            let (_, jac) = boundary_feedback(&mesh, u, &p).unwrap();
            let err = fd_mismatch(|v| boundary_feedback(&mesh, v, &p).unwrap().0, &jac, u);
            prop_assert!(err < 1e-6, "mismatch {err}");
        }
    }

    #[test]
    fn step_jacobian_matches_fd(seed in state_strategy(50), theta in 0.3f64..=1.0) {
        for mesh in meshes() {
            let n = mesh.node_count();
            let (next, prev) = (&seed[..n], &seed[25..25 + n]);
            let disc = Discretization::new(mesh.clone());
            let problem = problem_for(&mesh);
            let config = ThetaConfig::new(theta, 1.0, 7);
            let stepper = ThetaStepper::new(&disc, &problem, &config);
            let (_, jac) = stepper.step_residual_and_jacobian(next, prev).unwrap();
            let err = fd_mismatch(|v| stepper.step_residual(v, prev).unwrap(), &jac, next);
            prop_assert!(err < 1e-6, "mismatch {err}");
        }
    }

    #[test]
    fn mass_is_positive_definite(seed in state_strategy(25)) {
        for mesh in meshes() {
            let x = &seed[..mesh.node_count()];
            if x.iter().all(|v| *v == 0.0) {
                continue;
            }
            prop_assert!(assemble_mass(&mesh).quadratic_form(x).unwrap() > 0.0);
        }
    }

    #[test]
    fn l2_norm_matches_brute_force(seed in state_strategy(25)) {
        for mesh in meshes() {
            let w = &seed[..mesh.node_count()];
            let fast = NormCalculator::new(&mesh).l2(w).unwrap();
            let slow = brute_force_l2(&mesh, w);
            prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0), "{fast} vs {slow}");
        }
    }

    #[test]
    fn norms_are_homogeneous(seed in state_strategy(25), kappa in -5.0f64..5.0) {
        for mesh in meshes() {
            let w = &seed[..mesh.node_count()];
            let kw: Vec<f64> = w.iter().map(|v| kappa * v).collect();
            let calc = NormCalculator::new(&mesh);
            let pairs = [
                (calc.l2(&kw).unwrap(), calc.l2(w).unwrap()),
                (calc.h1(&kw).unwrap(), calc.h1(w).unwrap()),
            ];
            for (a, b) in pairs {
                prop_assert!((a - kappa.abs() * b).abs() <= 1e-13 * (1.0 + a));
            }
            if mesh.dimension() == 2 {
                let (a, b) = (calc.boundary_l2(&kw).unwrap(), calc.boundary_l2(w).unwrap());
                prop_assert!((a - kappa.abs() * b).abs() <= 1e-13 * (1.0 + a));
                let (a, b) = (calc.boundary_l4(&kw).unwrap(), calc.boundary_l4(w).unwrap());
                prop_assert!((a - kappa.abs() * b).abs() <= 1e-13 * (1.0 + a));
            } else {
                let (a, b) = (calc.triple(&kw).unwrap(), calc.triple(w).unwrap());
                prop_assert!((a - kappa.abs() * b).abs() <= 1e-13 * (1.0 + a));
            }
        }
    }

    #[test]
    fn v2_norm_matches_composite_simpson(seed in state_strategy(25)) {
        let p = params();
        for n in [2usize, 4] {
            let mesh: Mesh = build_structured_2d(n).unwrap().into();
            let w = &seed[..mesh.node_count()];
            let fast = control_input_2d(&mesh, w, &p).unwrap().l2_norm;
            let m = mesh.as_2d().unwrap();
            let law = |s: f64| -(2.0 * (p.c2 + p.w_d) * s + 2.0 / (9.0 * p.c2) * s.powi(3)) / p.nu;
            let mut total = 0.0;
            for &[a, b] in m.boundary_edges() {
                let len = m.edge_length([a, b]);
                total += len * simpson(|t| law((1.0 - t) * w[a] + t * w[b]).powi(2), 2000);
            }
            let slow = total.sqrt();
            prop_assert!((fast - slow).abs() <= 1e-10 * slow.max(1.0), "{fast} vs {slow}");
        }
    }
}

/// Composite Simpson on `[0, 1]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn algebraic_identities() {
    for mesh in meshes() {
        let n = mesh.node_count();
        let ones = vec![1.0; n];
        let a1 = assemble_stiffness(&mesh).mul_vec(&ones).unwrap();
        let c1 = assemble_convection(&mesh).mul_vec(&ones).unwrap();
        assert!(a1.iter().chain(&c1).all(|v| v.abs() <= 1e-13));
        let m1 = assemble_mass(&mesh).mul_vec(&ones).unwrap();
        assert!((m1.iter().sum::<f64>() - 1.0).abs() <= 1e-13);
        assert!(m1.iter().all(|v| *v > 0.0));
        let (b, _) = burgers_term(&mesh, &vec![-0.4; n]).unwrap();
        assert!(b.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn convection_is_skew_up_to_boundary() {
    // C + Cᵀ is the boundary mass of the flux direction: for 1D it is
    // diag(-1, 0, ..., 0, 1).
    let mesh: Mesh = build_uniform_1d(6).unwrap().into();
    let c = assemble_convection(&mesh).to_dense();
    for i in 0..7 {
        for j in 0..7 {
            let expected = match (i, j) {
                (0, 0) => -1.0,
                (6, 6) => 1.0,
                _ => 0.0,
            };
            assert!((c[i][j] + c[j][i] - expected).abs() < 1e-14);
        }
    }
}

#[test]
fn stiffness_reproduces_dirichlet_energy_of_linears() {
    let mesh: Mesh = build_structured_2d(5).unwrap().into();
    let coords = mesh.coordinates();
    let w: Vec<f64> = coords.iter().map(|p| 2.0 * p[0] - 3.0 * p[1] + 0.5).collect();
    let energy = assemble_stiffness(&mesh).quadratic_form(&w).unwrap();
    assert!((energy - 13.0).abs() < 1e-12);
    let cw = assemble_convection(&mesh).mul_vec(&w).unwrap();
    // ∂₁w = 2 - 3 = -1, so C w = -M 1
    let m1 = assemble_mass(&mesh).mul_vec(&vec![1.0; w.len()]).unwrap();
    assert!(cw.iter().zip(&m1).all(|(a, b)| (a + b).abs() < 1e-13));
}

#[test]
fn assembly_is_bit_identical() {
    for mesh in meshes() {
        let u: Vec<f64> = (0..mesh.node_count()).map(|i| (0.37 * i as f64).sin()).collect();
        assert_eq!(assemble_mass(&mesh), assemble_mass(&mesh));
        assert_eq!(assemble_convection(&mesh), assemble_convection(&mesh));
        assert_eq!(burgers_term(&mesh, &u).unwrap(), burgers_term(&mesh, &u).unwrap());
        assert_eq!(boundary_feedback(&mesh, &u, &params()).unwrap(), boundary_feedback(&mesh, &u, &params()).unwrap());
    }
}
