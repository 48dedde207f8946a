use std::ffi::{c_char, CString};
use std::ptr;

use burgers_fem::models::ProblemSpec;
use burgers_fem::mesh::{build_uniform_1d, Mesh};
use burgers_fem::stepper::{run_simulation, ThetaConfig};
use burgers_fem_ffi::*;

fn last_error() -> String {
    unsafe {
        let len = burgers_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; len + 1];
        burgers_last_error_message(buf.as_mut_ptr(), buf.len());
        let bytes: Vec<u8> = buf[..len].iter().map(|&c| c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }
}

struct Sim(*mut BurgersSimulation);

impl Sim {
    fn new() -> Self {
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { burgers_simulation_new(&mut p) }, BurgersStatus::Ok);
        assert!(!p.is_null());
        Sim(p)
    }

    fn set(&self, k: &str, v: &str) -> BurgersStatus {
        let (k, v) = (CString::new(k).unwrap(), CString::new(v).unwrap());
        unsafe { burgers_simulation_set(self.0, k.as_ptr(), v.as_ptr()) }
    }
}

impl Drop for Sim {
    fn drop(&mut self) {
        unsafe { burgers_simulation_free(self.0) };
    }
}

#[test]
fn run_matches_library() {
    let sim = Sim::new();
    assert_eq!(sim.set("n", "16"), BurgersStatus::Ok);
    assert_eq!(sim.set("M", "20"), BurgersStatus::Ok);
    assert_eq!(unsafe { burgers_simulation_run(sim.0) }, BurgersStatus::Ok);

    let (mut nodes, mut levels) = (0usize, 0usize);
    unsafe {
        assert_eq!(burgers_simulation_node_count(sim.0, &mut nodes), BurgersStatus::Ok);
        assert_eq!(burgers_simulation_level_count(sim.0, &mut levels), BurgersStatus::Ok);
    }
    assert_eq!((nodes, levels), (17, 21));

    let mesh: Mesh = build_uniform_1d(16).unwrap().into();
    let expected = run_simulation(&ProblemSpec::example1(), &mesh, &ThetaConfig::new(1.0, 1.0, 20)).unwrap();
    let mut state = vec![0.0; nodes];
    let mut times = vec![0.0; levels];
    let mut l2 = vec![0.0; levels];
    unsafe {
        assert_eq!(burgers_simulation_state(sim.0, 20, state.as_mut_ptr(), nodes), BurgersStatus::Ok);
        assert_eq!(burgers_simulation_times(sim.0, times.as_mut_ptr(), levels), BurgersStatus::Ok);
        assert_eq!(burgers_simulation_l2_history(sim.0, l2.as_mut_ptr(), levels), BurgersStatus::Ok);
    }
    assert_eq!(state, expected.states[20]);
    assert_eq!(times, expected.times);
    assert_eq!(l2, expected.l2_history);
}

#[test]
fn errors_are_reported() {
    let sim = Sim::new();
    let mut n = 0usize;
    assert_eq!(unsafe { burgers_simulation_node_count(sim.0, &mut n) }, BurgersStatus::NotRun);

    assert_eq!(sim.set("no_such_key", "1"), BurgersStatus::InvalidConfig);
    assert!(last_error().contains("no_such_key"));

    assert_eq!(sim.set("nu", "-1"), BurgersStatus::Ok);
    assert_eq!(unsafe { burgers_simulation_run(sim.0) }, BurgersStatus::InvalidConfig);
    assert!(last_error().contains("nu"));

    assert_eq!(sim.set("nu", "0.1"), BurgersStatus::Ok);
    assert_eq!(sim.set("newton_max_iter", "1"), BurgersStatus::Ok);
    assert_eq!(unsafe { burgers_simulation_run(sim.0) }, BurgersStatus::SolverFailure);
    assert!(last_error().contains("step 1"));
}

#[test]
fn buffers_and_ranges_are_checked() {
    let sim = Sim::new();
    assert_eq!(sim.set("n", "4"), BurgersStatus::Ok);
    assert_eq!(sim.set("M", "2"), BurgersStatus::Ok);
    assert_eq!(unsafe { burgers_simulation_run(sim.0) }, BurgersStatus::Ok);
    let mut small = [0.0; 3];
    unsafe {
        assert_eq!(burgers_simulation_state(sim.0, 0, small.as_mut_ptr(), 3), BurgersStatus::BufferTooSmall);
        assert_eq!(burgers_simulation_state(sim.0, 3, small.as_mut_ptr(), 3), BurgersStatus::OutOfRange);
        assert_eq!(burgers_simulation_state(sim.0, 0, ptr::null_mut(), 5), BurgersStatus::NullPointer);
    }
}

#[test]
fn null_arguments() {
    unsafe {
        assert_eq!(burgers_simulation_new(ptr::null_mut()), BurgersStatus::NullPointer);
        assert_eq!(burgers_simulation_run(ptr::null_mut()), BurgersStatus::NullPointer);
        burgers_simulation_free(ptr::null_mut());
    }
    let sim = Sim::new();
    let k = CString::new("nu").unwrap();
    assert_eq!(unsafe { burgers_simulation_set(sim.0, k.as_ptr(), ptr::null()) }, BurgersStatus::NullPointer);
}

#[test]
fn observed_order_through_ffi() {
    let mut v = 0.0;
    assert_eq!(unsafe { burgers_observed_order(4e-4, 1e-4, 2.0, &mut v) }, BurgersStatus::Ok);
    assert!((v - 2.0).abs() < 1e-14);
    assert_eq!(unsafe { burgers_observed_order(0.0, 1e-4, 2.0, &mut v) }, BurgersStatus::InvalidArgument);
    assert!(!last_error().is_empty());
}

#[test]
fn truncated_error_message_is_terminated() {
    let sim = Sim::new();
    assert_eq!(sim.set("theta", "abc"), BurgersStatus::InvalidConfig);
    let mut buf = [1 as c_char; 4];
    let len = unsafe { burgers_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 3);
    assert_eq!(buf[3], 0);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/burgers_fem.h")).unwrap();
    for name in [
        "burgers_last_error_message",
        "burgers_simulation_new",
        "burgers_simulation_free",
        "burgers_simulation_set",
        "burgers_simulation_run",
        "burgers_simulation_node_count",
        "burgers_simulation_level_count",
        "burgers_simulation_state",
        "burgers_simulation_times",
        "burgers_simulation_l2_history",
        "burgers_observed_order",
        "typedef struct BurgersSimulation BurgersSimulation",
        "BURGERS_STATUS_SOLVER_FAILURE = 4",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
