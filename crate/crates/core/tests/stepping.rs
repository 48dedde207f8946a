//! Time stepping against hand-coded schemes and structural invariants.

use burgers_fem::assembly::BoundaryParams;
use burgers_fem::diagnostics::lyapunov_monitor;
use burgers_fem::mesh::{build_structured_2d, build_uniform_1d, Mesh};
use burgers_fem::models::{control_input_1d, ControlTrace, InitialCondition, ProblemSpec};
use burgers_fem::stepper::*;
use proptest::prelude::*;

/// Dense 1D operators from their element formulas.
struct Dense1D {
    h: f64,
    n: usize,
}

impl Dense1D {
    fn new(elements: usize) -> Self {
        Self { h: 1.0 / elements as f64, n: elements + 1 }
    }

    fn apply(&self, entry: impl Fn(usize, usize) -> f64, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| entry(i, j) * x[j]).sum()).collect()
    }

    fn mass(&self, i: usize, j: usize) -> f64 {
        let end = i == 0 || i == self.n - 1;
        match i.abs_diff(j) {
            0 if end => self.h / 3.0,
            0 => 2.0 * self.h / 3.0,
            1 => self.h / 6.0,
            _ => 0.0,
        }
    }

    fn stiff(&self, i: usize, j: usize) -> f64 {
        let end = i == 0 || i == self.n - 1;
        match i.abs_diff(j) {
            0 if end => 1.0 / self.h,
            0 => 2.0 / self.h,
            1 => -1.0 / self.h,
            _ => 0.0,
        }
    }

    /// `∫ φ_j' φ_i`
    fn conv(&self, i: usize, j: usize) -> f64 {
        match (i as isize - j as isize, i) {
            (0, 0) => -0.5,
            (0, k) if k == self.n - 1 => 0.5,
            (1, _) => -0.5,
            (-1, _) => 0.5,
            _ => 0.0,
        }
    }

    /// `∫ U U' φ_i` with 2-point Gauss per element (exact for the cubic).
    fn burgers(&self, u: &[f64]) -> Vec<f64> {
        let g = 0.5 / 3.0_f64.sqrt();
        let mut r = vec![0.0; self.n];
        for e in 0..self.n - 1 {
            let slope = (u[e + 1] - u[e]) / self.h;
            for s in [0.5 - g, 0.5 + g] {
                let val = (1.0 - s) * u[e] + s * u[e + 1];
                r[e] += 0.5 * self.h * val * slope * (1.0 - s);
                r[e + 1] += 0.5 * self.h * val * slope * s;
            }
        }
        r
    }

    fn residual(&self, p: &BoundaryParams, theta: f64, k: f64, next: &[f64], prev: &[f64]) -> Vec<f64> {
        let wt: Vec<f64> = next.iter().zip(prev).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
        let dw: Vec<f64> = next.iter().zip(prev).map(|(a, b)| (a - b) / k).collect();
        let m = self.apply(|i, j| self.mass(i, j), &dw);
        let a = self.apply(|i, j| self.stiff(i, j), &wt);
        let c = self.apply(|i, j| self.conv(i, j), &wt);
        let b = self.burgers(&wt);
        let mut f: Vec<f64> = (0..self.n).map(|i| m[i] + p.nu * a[i] + p.w_d * c[i] + b[i]).collect();
        let (l, r) = (wt[0], wt[self.n - 1]);
        f[0] += (p.c0 + p.w_d) * l + 2.0 / (9.0 * p.c0) * l.powi(3);
        f[self.n - 1] += (p.c1 + p.w_d) * r + 2.0 / (9.0 * p.c1) * r.powi(3);
        f
    }
}

fn disc1(n: usize) -> Discretization {
    Discretization::new(build_uniform_1d(n).unwrap().into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_matches_hand_coded_cn_and_be(
        next in proptest::collection::vec(-1.5f64..1.5, 9),
        prev in proptest::collection::vec(-1.5f64..1.5, 9),
        theta_is_half in any::<bool>(),
    ) {
        let theta = if theta_is_half { 0.5 } else { 1.0 };
        let problem = ProblemSpec::example1();
        let disc = disc1(8);
        let config = ThetaConfig::new(theta, 1.0, 10);
        let ours = step_residual(&next, &prev, &disc, &problem, &config).unwrap();
        let hand = Dense1D::new(8).residual(&problem.params, theta, config.k, &next, &prev);
        for (a, b) in ours.iter().zip(&hand) {
            prop_assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn controlled_runs_are_lyapunov_monotone(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 4),
        theta in 0.5f64..=1.0,
        steps in 5usize..40,
    ) {
        let problem = ProblemSpec::example1();
        let disc = disc1(12);
        let w0: Vec<f64> = disc
            .mesh()
            .coordinates()
            .iter()
            .map(|p| coeffs.iter().enumerate().map(|(m, c)| c * (std::f64::consts::PI * m as f64 * p[0]).cos()).sum())
            .collect();
        let traj = run_from(&problem, &disc, &ThetaConfig::new(theta, 1.0, steps), w0).unwrap();
        let verdict = lyapunov_monitor(&traj, 1e-12);
        prop_assert!(verdict.monotone, "violation at {:?}", verdict.first_violation);
    }

    #[test]
    fn odd_control_law_without_shift(s in -3.0f64..3.0, c0 in 0.05f64..2.0, nu in 0.05f64..2.0) {
        let p = BoundaryParams { nu, w_d: 0.0, c0, c1: c0, c2: c0 };
        let (a, b) = control_input_1d(&[s, 0.0, s], &p);
        let (am, bm) = control_input_1d(&[-s, 0.0, -s], &p);
        prop_assert!((a + am).abs() <= 1e-14 * (1.0 + a.abs()));
        prop_assert!((b + bm).abs() <= 1e-14 * (1.0 + b.abs()));
    }
}

#[test]
fn explicit_step_is_the_theta_zero_limit() {
    let problem = ProblemSpec::example1();
    let disc = disc1(10);
    let w0 = problem.initial_state(disc.mesh());
    let explicit = explicit_step(&w0, &disc, &problem, &ThetaConfig::new(0.0, 0.1, 100)).unwrap();
    let config = ThetaConfig::new(1e-12, 0.1, 100);
    let (implicit, report) = ThetaStepper::new(&disc, &problem, &config).newton_step(&w0, 1).unwrap();
    assert!(report.converged);
    let gap = explicit.iter().zip(&implicit).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap < 1e-8, "gap {gap}");
}

#[test]
fn zero_state_is_preserved_exactly() {
    for (problem, mesh) in [
        (ProblemSpec::example1(), Mesh::from(build_uniform_1d(9).unwrap())),
        (ProblemSpec::example2(), Mesh::from(build_structured_2d(3).unwrap())),
    ] {
        let problem = ProblemSpec { initial_condition: InitialCondition::Zero, ..problem };
        for theta in [0.0, 0.5, 1.0] {
            let traj = run_simulation(&problem, &mesh, &ThetaConfig::new(theta, 1.0, 6)).unwrap();
            assert!(traj.states.iter().flatten().all(|v| *v == 0.0));
            assert!(traj.l2_history.iter().all(|v| *v == 0.0));
        }
    }
}

#[test]
fn runs_are_bit_identical() {
    let mesh: Mesh = build_structured_2d(6).unwrap().into();
    let config = ThetaConfig::new(0.5, 1.0, 8);
    let a = run_simulation(&ProblemSpec::example2(), &mesh, &config).unwrap();
    let b = run_simulation(&ProblemSpec::example2(), &mesh, &config).unwrap();
    assert_eq!(a, b);
}

#[test]
fn newton_meets_tolerance_on_examples() {
    for (problem, mesh) in [
        (ProblemSpec::example1(), Mesh::from(build_uniform_1d(30).unwrap())),
        (ProblemSpec::example2(), Mesh::from(build_structured_2d(8).unwrap())),
    ] {
        let traj = run_simulation(&problem, &mesh, &ThetaConfig::new(1.0, 1.0, 100)).unwrap();
        for r in &traj.reports {
            assert!(r.converged && r.final_residual_norm <= 1e-12);
            assert!(r.newton_iterations <= 6, "step {} took {}", r.step, r.newton_iterations);
        }
    }
}

#[test]
fn controls_decay_along_the_run() {
    let problem = ProblemSpec::example1();
    let mesh: Mesh = build_uniform_1d(30).unwrap().into();
    for theta in [0.5, 0.75, 1.0] {
        let traj = run_simulation(&problem, &mesh, &ThetaConfig::new(theta, 1.0, 100)).unwrap();
        let trace = ControlTrace::from_states(&problem, &mesh, &traj.times, &traj.states).unwrap();
        let sup = |r: std::ops::Range<usize>| {
            r.map(|i| trace.v0[i].abs().max(trace.v1[i].abs())).fold(0.0_f64, f64::max)
        };
        assert!(sup(91..101) < sup(0..11));
    }
}

#[test]
fn uncontrolled_constant_is_steady_and_control_free() {
    let problem = ProblemSpec {
        controlled: false,
        initial_condition: InitialCondition::Constant(-0.6),
        ..ProblemSpec::example1()
    };
    let mesh: Mesh = build_uniform_1d(10).unwrap().into();
    let traj = run_simulation(&problem, &mesh, &ThetaConfig::new(1.0, 1.0, 5)).unwrap();
    assert!(traj.states.iter().flatten().all(|v| (v + 0.6).abs() < 1e-14));
    let trace = ControlTrace::from_states(&problem, &mesh, &traj.times, &traj.states).unwrap();
    assert!(trace.v0.iter().chain(&trace.v1).all(|v| *v == 0.0));
}
