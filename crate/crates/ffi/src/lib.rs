//! C ABI over the `crowd_sweep` core.
//!
//! Scenarios and trajectories cross the boundary as opaque handles, each
//! released with its matching `*_free`. Every fallible call
//! returns a status code; on failure a message is kept per thread and can be
//! read with [`cs_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use crowd_sweep::analytic::{optimize_constant_control, sweep_table, ObstacleRunParams, PhaseMode};
use crowd_sweep::cli::ScenarioFile;
use crowd_sweep::cones::{project_velocity, VelocityCone};
use crowd_sweep::dynamics::{simulate, ControlSignal, Scheme, TieBreak, Trajectory};
use crowd_sweep::{Error, Scenario};

pub const CS_OK: i32 = 0;
pub const CS_ERR_NULL_POINTER: i32 = 1;
pub const CS_ERR_INVALID_ARGUMENT: i32 = 2;
pub const CS_ERR_PARSE: i32 = 3;
pub const CS_ERR_VALIDATION: i32 = 4;
pub const CS_ERR_NUMERIC: i32 = 5;
pub const CS_ERR_BUFFER_TOO_SMALL: i32 = 6;
pub const CS_ERR_PANIC: i32 = 7;

pub const CS_SCHEME_VELOCITY: i32 = 0;
pub const CS_SCHEME_POSITION: i32 = 1;

pub const CS_SIDE_LEFT: i32 = 0;
pub const CS_SIDE_RIGHT: i32 = 1;

pub const CS_MODE_PAPER: i32 = 0;
pub const CS_MODE_GEOMETRIC: i32 = 1;

/// Validated scenario.
pub struct CsScenario {
    inner: Scenario,
}

/// Simulated trajectory.
pub struct CsTrajectory {
    inner: Trajectory,
}

/// Optimal constant control around one obstacle.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsObstacleRun {
    pub a_bar: f64,
    pub t1: f64,
    pub theta1: f64,
    pub theta_deg: f64,
    pub arc_len: f64,
    pub release_x: f64,
    pub release_y: f64,
    pub terminal_dist: f64,
    pub cost: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsSweepRow {
    pub tau: f64,
    pub a_bar: f64,
    pub t1: f64,
    pub theta1: f64,
    pub cost: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::InvalidArgument(_) => CS_ERR_INVALID_ARGUMENT,
            Error::Validation(_) | Error::NoTangent(_) | Error::Unsupported(_) => CS_ERR_VALIDATION,
            _ => CS_ERR_NUMERIC,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CS_OK
        }
        Ok(Err(e)) => {
            set_error(e.message);
            e.code
        }
        Err(_) => {
            set_error("internal panic");
            CS_ERR_PANIC
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(CS_ERR_NULL_POINTER, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn scheme(v: i32) -> Result<Scheme, Failure> {
    match v {
        CS_SCHEME_VELOCITY => Ok(Scheme::VelocityProjection),
        CS_SCHEME_POSITION => Ok(Scheme::PositionProjection),
        _ => Err(fail(CS_ERR_INVALID_ARGUMENT, format!("unknown scheme {v}"))),
    }
}

fn side(v: i32) -> Result<TieBreak, Failure> {
    match v {
        CS_SIDE_LEFT => Ok(TieBreak::Left),
        CS_SIDE_RIGHT => Ok(TieBreak::Right),
        _ => Err(fail(CS_ERR_INVALID_ARGUMENT, format!("unknown side {v}"))),
    }
}

fn mode(v: i32) -> Result<PhaseMode, Failure> {
    match v {
        CS_MODE_PAPER => Ok(PhaseMode::Paper),
        CS_MODE_GEOMETRIC => Ok(PhaseMode::Geometric),
        _ => Err(fail(CS_ERR_INVALID_ARGUMENT, format!("unknown mode {v}"))),
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to fit) and returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses and validates a scenario from a NUL-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_from_json(
    json: *const c_char,
    out: *mut *mut CsScenario,
) -> i32 {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(CS_ERR_PARSE, format!("scenario is not UTF-8: {e}")))?;
        let file: ScenarioFile = serde_json::from_str(text)
            .map_err(|e| fail(CS_ERR_PARSE, format!("malformed scenario: {e}")))?;
        let inner = file.into_scenario()?;
        *out = Box::into_raw(Box::new(CsScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `sc` must be null or a handle from [`cs_scenario_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_free(sc: *mut CsScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// # Safety
/// `sc` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_agent_count(sc: *const CsScenario) -> usize {
    sc.as_ref().map_or(0, |s| s.inner.agent_count())
}

/// # Safety
/// `sc` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_obstacle_count(sc: *const CsScenario) -> usize {
    sc.as_ref().map_or(0, |s| s.inner.obstacle_count())
}

/// Integrates the scenario under the constant control `control` with step `h`.
///
/// # Safety
/// `sc` must be a live scenario handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_simulate(
    sc: *const CsScenario,
    h: f64,
    control: f64,
    scheme_id: i32,
    side_id: i32,
    out: *mut *mut CsTrajectory,
) -> i32 {
    guard(|| {
        non_null(sc, "scenario")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let sc = &(*sc).inner;
        let u = ControlSignal::constant_for(sc, h, control)?;
        let inner = simulate(sc, &u, scheme(scheme_id)?, side(side_id)?)?;
        *out = Box::into_raw(Box::new(CsTrajectory { inner }));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle from [`cs_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_free(traj: *mut CsTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of time nodes (steps + 1).
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_node_count(traj: *const CsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.states.len())
}

/// Length of one state vector (twice the agent count).
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_dimension(traj: *const CsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.states[0].len())
}

/// Number of constraint pairs, the length of one multiplier row.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_pair_count(traj: *const CsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.pairs.len())
}

unsafe fn copy_row(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    non_null(buf, "buffer")?;
    if len < src.len() {
        return Err(fail(
            CS_ERR_BUFFER_TOO_SMALL,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Copies node `k`'s time and state (`x1, y1, x2, y2, ...`).
///
/// # Safety
/// `traj` must be a live handle, `t` valid for writes, `buf` valid for `len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_state(
    traj: *const CsTrajectory,
    k: usize,
    t: *mut f64,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        non_null(traj, "trajectory")?;
        non_null(t, "t")?;
        let tr = &(*traj).inner;
        let x = tr
            .states
            .get(k)
            .ok_or_else(|| fail(CS_ERR_INVALID_ARGUMENT, format!("node {k} out of range")))?;
        copy_row(x.as_slice(), buf, len)?;
        *t = tr.times[k];
        Ok(())
    })
}

/// Copies the contact multipliers of step `k` (one per pair, canonical
/// pair order).
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_multipliers(
    traj: *const CsTrajectory,
    k: usize,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        non_null(traj, "trajectory")?;
        let tr = &(*traj).inner;
        let row = tr
            .multipliers
            .get(k)
            .ok_or_else(|| fail(CS_ERR_INVALID_ARGUMENT, format!("step {k} out of range")))?;
        if row.is_empty() {
            return Ok(());
        }
        copy_row(row, buf, len)
    })
}

fn run_params(
    sc: &Scenario,
    tau: f64,
    mode_id: i32,
    side_id: i32,
) -> Result<ObstacleRunParams, Failure> {
    Ok(ObstacleRunParams::from_scenario(
        sc,
        tau,
        mode(mode_id)?,
        side(side_id)?,
    )?)
}

/// Optimal constant control for a one-agent, one-obstacle scenario.
///
/// # Safety
/// `sc` must be a live scenario handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_analytic_optimize(
    sc: *const CsScenario,
    tau: f64,
    mode_id: i32,
    side_id: i32,
    out: *mut CsObstacleRun,
) -> i32 {
    guard(|| {
        non_null(sc, "scenario")?;
        non_null(out, "out")?;
        let params = run_params(&(*sc).inner, tau, mode_id, side_id)?;
        let r = optimize_constant_control(&params)?;
        *out = CsObstacleRun {
            a_bar: r.a_bar,
            t1: r.t1,
            theta1: r.theta1,
            theta_deg: r.theta_deg,
            arc_len: r.arc_len,
            release_x: r.x_release.x,
            release_y: r.x_release.y,
            terminal_dist: r.terminal_dist,
            cost: r.cost,
        };
        Ok(())
    })
}

/// Optimal constant control for each of `n` weights, written to `rows` in
/// input order.
///
/// # Safety
/// `sc` must be a live handle; `taus` valid for `n` reads and `rows` for `n`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn cs_sweep(
    sc: *const CsScenario,
    taus: *const f64,
    n: usize,
    mode_id: i32,
    side_id: i32,
    rows: *mut CsSweepRow,
) -> i32 {
    guard(|| {
        non_null(sc, "scenario")?;
        if n == 0 {
            return Ok(());
        }
        non_null(taus, "taus")?;
        non_null(rows, "rows")?;
        let taus = slice::from_raw_parts(taus, n);
        let params = run_params(&(*sc).inner, taus[0], mode_id, side_id)?;
        let table = sweep_table(taus, &params)?;
        let out = slice::from_raw_parts_mut(rows, n);
        for (dst, r) in out.iter_mut().zip(table) {
            *dst = CsSweepRow {
                tau: r.tau,
                a_bar: r.a_bar,
                t1: r.t1,
                theta1: r.theta1,
                cost: r.cost,
            };
        }
        Ok(())
    })
}

/// Euclidean projection of `u` onto `{v : <g_k, v> + b_k >= 0}`.
///
/// `gradients` holds `m` rows of length `dim`; `offsets` may be null (all
/// zero). `v_out` receives `dim` values; `eta_out`, if not null, receives the
/// `m` multipliers.
///
/// # Safety
/// All non-null pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn cs_project_velocity(
    u: *const f64,
    dim: usize,
    gradients: *const f64,
    offsets: *const f64,
    m: usize,
    v_out: *mut f64,
    eta_out: *mut f64,
) -> i32 {
    guard(|| {
        if dim == 0 {
            return Err(fail(CS_ERR_INVALID_ARGUMENT, "dimension must be positive"));
        }
        non_null(u, "u")?;
        non_null(v_out, "v_out")?;
        let u = slice::from_raw_parts(u, dim);
        let rows = if m == 0 {
            Vec::new()
        } else {
            non_null(gradients, "gradients")?;
            slice::from_raw_parts(gradients, m * dim)
                .chunks(dim)
                .map(|c| c.to_vec())
                .collect()
        };
        let mut cone = VelocityCone::from_gradients(dim, rows)?;
        if !offsets.is_null() && m > 0 {
            for (c, b) in cone
                .constraints
                .iter_mut()
                .zip(slice::from_raw_parts(offsets, m))
            {
                c.offset = *b;
            }
        }
        let r = project_velocity(u, &cone)?;
        ptr::copy_nonoverlapping(r.v.as_ptr(), v_out, dim);
        if !eta_out.is_null() && m > 0 {
            ptr::copy_nonoverlapping(r.eta.as_ptr(), eta_out, m);
        }
        Ok(())
    })
}
