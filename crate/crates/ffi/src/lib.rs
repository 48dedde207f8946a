//! C ABI over `burgers-fem`.
//!
//! Every function returns a [`BurgersStatus`]; on failure a message is kept
//! per thread and can be copied out with [`burgers_last_error_message`].
//! Panics never cross the boundary: they are caught and reported as
//! [`BurgersStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use burgers_fem::config::RunConfig;
use burgers_fem::convergence::observed_order;
use burgers_fem::mesh::{build_structured_2d, build_uniform_1d, Mesh};
use burgers_fem::models::Dimensionality;
use burgers_fem::stepper::{run_with, Discretization, StateTrajectory};
use burgers_fem::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurgersStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    SolverFailure = 4,
    /// The simulation has not been run, or the last run failed.
    NotRun = 5,
    OutOfRange = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque simulation handle.
pub struct BurgersSimulation {
    config: RunConfig,
    trajectory: Option<StateTrajectory>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: BurgersStatus, msg: impl Into<String>) -> BurgersStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> BurgersStatus {
    match err {
        Error::NonConvergence { .. } | Error::SingularJacobian { .. } => BurgersStatus::SolverFailure,
        Error::InvalidConfig(_) | Error::InvalidParams(_) | Error::InvalidMesh(_) | Error::WrongDimension { .. } => {
            BurgersStatus::InvalidConfig
        }
        _ => BurgersStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> BurgersStatus) -> BurgersStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(BurgersStatus::Panic, msg)
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, BurgersStatus> {
    if p.is_null() {
        return Err(fail(BurgersStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BurgersStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(p: *const BurgersSimulation) -> Result<&'a BurgersSimulation, BurgersStatus> {
    p.as_ref().ok_or_else(|| fail(BurgersStatus::NullPointer, "simulation handle is null"))
}

unsafe fn handle_mut<'a>(p: *mut BurgersSimulation) -> Result<&'a mut BurgersSimulation, BurgersStatus> {
    p.as_mut().ok_or_else(|| fail(BurgersStatus::NullPointer, "simulation handle is null"))
}

fn trajectory(sim: &BurgersSimulation) -> Result<&StateTrajectory, BurgersStatus> {
    sim.trajectory.as_ref().ok_or_else(|| fail(BurgersStatus::NotRun, "simulation has not been run"))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, capacity: usize) -> BurgersStatus {
    if out.is_null() {
        return fail(BurgersStatus::NullPointer, "output buffer is null");
    }
    if capacity < src.len() {
        return fail(BurgersStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", src.len()));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    BurgersStatus::Ok
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `capacity` bytes, into `buffer`. Returns the full message
/// length in bytes without the terminator. `buffer` may be null to query
/// the length.
///
/// # Safety
/// `buffer` must be null or valid for `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn burgers_last_error_message(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buffer.is_null() && capacity > 0 {
            let n = msg.len().min(capacity - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a simulation with the 1D example defaults.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_new(out: *mut *mut BurgersSimulation) -> BurgersStatus {
    guard(|| {
        if out.is_null() {
            return fail(BurgersStatus::NullPointer, "out is null");
        }
        let sim = Box::new(BurgersSimulation { config: RunConfig::default(), trajectory: None });
        *out = Box::into_raw(sim);
        BurgersStatus::Ok
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`burgers_simulation_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_free(sim: *mut BurgersSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Sets one configuration key, using the same keys as the CLI config file.
/// Discards any previous results.
///
/// # Safety
/// `sim` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_set(
    sim: *mut BurgersSimulation,
    key: *const c_char,
    value: *const c_char,
) -> BurgersStatus {
    guard(|| {
        let sim = tri!(handle_mut(sim));
        let key = tri!(cstr(key, "key"));
        let value = tri!(cstr(value, "value"));
        match sim.config.set(key, value) {
            Ok(()) => {
                sim.trajectory = None;
                BurgersStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Validates the configuration and runs the simulation.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_run(sim: *mut BurgersSimulation) -> BurgersStatus {
    guard(|| {
        let sim = tri!(handle_mut(sim));
        sim.trajectory = None;
        let config = &sim.config;
        if let Err(e) = config.validate() {
            return fail(status_of(&e), e.to_string());
        }
        let mesh: Result<Mesh, Error> = match config.dimension {
            Dimensionality::OneD => build_uniform_1d(config.n).map(Mesh::from),
            Dimensionality::TwoD => build_structured_2d(config.n).map(Mesh::from),
        };
        let mesh = match mesh {
            Ok(m) => m,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        match run_with(&config.problem(), &Discretization::new(mesh), &config.theta_config()) {
            Ok(t) => {
                sim.trajectory = Some(t);
                BurgersStatus::Ok
            }
            Err(f) => fail(status_of(&f.error), f.error.to_string()),
        }
    })
}

/// Number of mesh nodes, i.e. the length of one state vector.
///
/// # Safety
/// `sim` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_node_count(sim: *const BurgersSimulation, out: *mut usize) -> BurgersStatus {
    guard(|| {
        let sim = tri!(handle(sim));
        let t = tri!(trajectory(sim));
        if out.is_null() {
            return fail(BurgersStatus::NullPointer, "out is null");
        }
        *out = t.states[0].len();
        BurgersStatus::Ok
    })
}

/// Number of stored time levels, `M + 1`.
///
/// # Safety
/// `sim` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_level_count(sim: *const BurgersSimulation, out: *mut usize) -> BurgersStatus {
    guard(|| {
        let sim = tri!(handle(sim));
        let t = tri!(trajectory(sim));
        if out.is_null() {
            return fail(BurgersStatus::NullPointer, "out is null");
        }
        *out = t.len();
        BurgersStatus::Ok
    })
}

/// Copies the nodal values of time level `level` into `out`.
///
/// # Safety
/// `sim` must be a live handle and `out` valid for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_state(
    sim: *const BurgersSimulation,
    level: usize,
    out: *mut f64,
    capacity: usize,
) -> BurgersStatus {
    guard(|| {
        let sim = tri!(handle(sim));
        let t = tri!(trajectory(sim));
        match t.states.get(level) {
            Some(s) => copy_out(s, out, capacity),
            None => fail(BurgersStatus::OutOfRange, format!("level {level} of {}", t.len())),
        }
    })
}

/// Copies the time levels `t_n` into `out`.
///
/// # Safety
/// `sim` must be a live handle and `out` valid for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_times(
    sim: *const BurgersSimulation,
    out: *mut f64,
    capacity: usize,
) -> BurgersStatus {
    guard(|| {
        let sim = tri!(handle(sim));
        let t = tri!(trajectory(sim));
        copy_out(&t.times, out, capacity)
    })
}

/// Copies `‖W^n‖` for every level into `out`.
///
/// # Safety
/// `sim` must be a live handle and `out` valid for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn burgers_simulation_l2_history(
    sim: *const BurgersSimulation,
    out: *mut f64,
    capacity: usize,
) -> BurgersStatus {
    guard(|| {
        let sim = tri!(handle(sim));
        let t = tri!(trajectory(sim));
        copy_out(&t.l2_history, out, capacity)
    })
}

/// `log(e_coarse / e_fine) / log(ratio)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn burgers_observed_order(e_coarse: f64, e_fine: f64, ratio: f64, out: *mut f64) -> BurgersStatus {
    guard(|| {
        if out.is_null() {
            return fail(BurgersStatus::NullPointer, "out is null");
        }
        match observed_order(e_coarse, e_fine, ratio) {
            Ok(v) => {
                *out = v;
                BurgersStatus::Ok
            }
            Err(e) => fail(BurgersStatus::InvalidArgument, e.to_string()),
        }
    })
}
