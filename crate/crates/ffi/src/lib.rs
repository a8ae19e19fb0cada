//! C ABI bindings for the `fbsde` solver.
//!
//! Every entry point returns an [`FbsdeStatus`]; on failure a description
//! is available from [`fbsde_last_error`] on the same thread. Objects are
//! handed out as opaque pointers and released with the matching `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use fbsde::cli::report;
use fbsde::{convergence_rate, problems, run_convergence_study, solve, ConvergenceReport, Error, SchemeParams};

/// Result codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbsdeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Io = 4,
    Panic = 5,
}

/// An FBSDE problem definition.
pub struct FbsdeProblem(problems::FbsdeProblem);

/// A convergence study result.
pub struct FbsdeReport(ConvergenceReport);

/// Discretization parameters; start from [`fbsde_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FbsdeParams {
    pub alpha: f64,
    pub quadrature_order: u32,
    pub halfwidth_sigmas: f64,
    /// Odd, at least 5.
    pub grid_points: u32,
}

impl From<FbsdeParams> for SchemeParams {
    fn from(p: FbsdeParams) -> Self {
        SchemeParams {
            alpha: p.alpha,
            quadrature_order: p.quadrature_order as usize,
            halfwidth_sigmas: p.halfwidth_sigmas,
            grid_points: p.grid_points as usize,
        }
    }
}

/// `(Y, Z)` at `(0, x0)`. Errors are NaN when the problem has no exact
/// solution.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FbsdeSolution {
    pub y0: f64,
    pub z0: f64,
    pub err_y: f64,
    pub err_z: f64,
    pub out_of_domain: u64,
    pub wall_time_seconds: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FbsdeReportRow {
    pub steps: u64,
    pub h: f64,
    pub err_y: f64,
    pub err_z: f64,
    pub wall_time_seconds: f64,
}

/// Coefficient callbacks for a user-defined problem. All functions receive
/// `user_data` first and may be called concurrently from several threads.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct FbsdeCallbacks {
    pub user_data: *mut c_void,
    pub drift: Option<extern "C" fn(*mut c_void, f64, f64) -> f64>,
    pub diffusion: Option<extern "C" fn(*mut c_void, f64, f64) -> f64>,
    pub generator: Option<extern "C" fn(*mut c_void, f64, f64, f64) -> f64>,
    pub terminal_y: Option<extern "C" fn(*mut c_void, f64) -> f64>,
    pub terminal_z: Option<extern "C" fn(*mut c_void, f64) -> f64>,
}

#[derive(Clone, Copy)]
struct UserData(*mut c_void);
// the caller guarantees thread-safe callbacks (see FbsdeCallbacks)
unsafe impl Send for UserData {}
unsafe impl Sync for UserData {}

impl UserData {
    fn get(self) -> *mut c_void {
        self.0
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> FbsdeStatus {
    match err {
        Error::Config(_) | Error::Usage(_) => FbsdeStatus::InvalidArgument,
        Error::NonFinite { .. } | Error::NonFiniteField { .. } => FbsdeStatus::Numerical,
        Error::Io { .. } => FbsdeStatus::Io,
    }
}

fn guard(body: impl FnOnce() -> Result<(), FbsdeStatus>) -> FbsdeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FbsdeStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            FbsdeStatus::Panic
        }
    }
}

fn fail(err: Error) -> FbsdeStatus {
    set_last_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> FbsdeStatus {
    set_last_error(format!("{what} is null"));
    FbsdeStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, FbsdeStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, FbsdeStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

fn box_out<T>(out: &mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn fbsde_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn fbsde_params_default() -> FbsdeParams {
    let d = SchemeParams::default();
    FbsdeParams {
        alpha: d.alpha,
        quadrature_order: d.quadrature_order as u32,
        halfwidth_sigmas: d.halfwidth_sigmas,
        grid_points: d.grid_points as u32,
    }
}

/// Logistic test problem with closed-form solution, `X = W` on `[0, 1]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fbsde_problem_example1(out: *mut *mut FbsdeProblem) -> FbsdeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        box_out(out, FbsdeProblem(problems::example1()));
        Ok(())
    })
}

/// FitzHugh-Nagumo type problem with parameter `a`, started at `x0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fbsde_problem_example2(a: f64, x0: f64, out: *mut *mut FbsdeProblem) -> FbsdeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if !(a.is_finite() && x0.is_finite()) {
            set_last_error("a and x0 must be finite");
            return Err(FbsdeStatus::InvalidArgument);
        }
        box_out(out, FbsdeProblem(problems::example2(a, x0)));
        Ok(())
    })
}

/// Problem defined by C callbacks. It has no exact solution, so it can be
/// solved but not used in a convergence study.
///
/// # Safety
/// `callbacks` and `out` must be valid pointers; the callbacks and
/// `user_data` must stay valid and thread-safe until the problem is freed.
#[no_mangle]
pub unsafe extern "C" fn fbsde_problem_from_callbacks(
    callbacks: *const FbsdeCallbacks,
    terminal_time: f64,
    x0: f64,
    out: *mut *mut FbsdeProblem,
) -> FbsdeStatus {
    guard(|| {
        let cb = *deref(callbacks, "callbacks")?;
        let out = out_ptr(out, "out")?;
        let (Some(drift), Some(diffusion), Some(generator), Some(terminal_y), Some(terminal_z)) =
            (cb.drift, cb.diffusion, cb.generator, cb.terminal_y, cb.terminal_z)
        else {
            return Err(null("a callback"));
        };
        let ud = UserData(cb.user_data);
        let problem = problems::FbsdeProblem::new(
            "callbacks",
            terminal_time,
            x0,
            move |t, x| drift(ud.get(), t, x),
            move |t, x| diffusion(ud.get(), t, x),
            move |t, y, z| generator(ud.get(), t, y, z),
            move |x| terminal_y(ud.get(), x),
            move |x| terminal_z(ud.get(), x),
        )
        .map_err(fail)?;
        box_out(out, FbsdeProblem(problem));
        Ok(())
    })
}

/// # Safety
/// `problem` must come from an `fbsde_problem_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn fbsde_problem_free(problem: *mut FbsdeProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Runs the backward recursion with `steps` time steps.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fbsde_solve(
    problem: *const FbsdeProblem,
    params: *const FbsdeParams,
    steps: u32,
    out: *mut FbsdeSolution,
) -> FbsdeStatus {
    guard(|| {
        let problem = &deref(problem, "problem")?.0;
        let params: SchemeParams = (*deref(params, "params")?).into();
        let out = out_ptr(out, "out")?;
        let r = solve(problem, &params, steps as usize, false).map_err(fail)?;
        *out = FbsdeSolution {
            y0: r.y0,
            z0: r.z0,
            err_y: r.err_y.unwrap_or(f64::NAN),
            err_z: r.err_z.unwrap_or(f64::NAN),
            out_of_domain: r.diagnostics.out_of_domain,
            wall_time_seconds: r.diagnostics.wall_time.as_secs_f64(),
        };
        Ok(())
    })
}

/// Convergence study over the `n_steps` step counts in `steps`.
///
/// # Safety
/// `steps` must point to `n_steps` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fbsde_convergence_study(
    problem: *const FbsdeProblem,
    params: *const FbsdeParams,
    steps: *const u32,
    n_steps: usize,
    out: *mut *mut FbsdeReport,
) -> FbsdeStatus {
    guard(|| {
        let problem = &deref(problem, "problem")?.0;
        let params: SchemeParams = (*deref(params, "params")?).into();
        let steps = deref(steps, "steps")?;
        let steps: Vec<usize> = std::slice::from_raw_parts(steps, n_steps).iter().map(|&n| n as usize).collect();
        let out = out_ptr(out, "out")?;
        let report = run_convergence_study(problem, &params, &steps).map_err(fail)?;
        box_out(out, FbsdeReport(report));
        Ok(())
    })
}

/// # Safety
/// `report` must be a valid report handle or null.
#[no_mangle]
pub unsafe extern "C" fn fbsde_report_len(report: *const FbsdeReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `report` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fbsde_report_row(report: *const FbsdeReport, index: usize, out: *mut FbsdeReportRow) -> FbsdeStatus {
    guard(|| {
        let report = &deref(report, "report")?.0;
        let out = out_ptr(out, "out")?;
        let Some(r) = report.rows.get(index) else {
            set_last_error(format!("row {index} out of range ({} rows)", report.rows.len()));
            return Err(FbsdeStatus::InvalidArgument);
        };
        *out = FbsdeReportRow {
            steps: r.steps as u64,
            h: r.h,
            err_y: r.err_y,
            err_z: r.err_z,
            wall_time_seconds: r.wall_time_seconds,
        };
        Ok(())
    })
}

/// Fitted convergence rates; NaN when every error sits at the round-off
/// floor.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fbsde_report_rates(report: *const FbsdeReport, cr_y: *mut f64, cr_z: *mut f64) -> FbsdeStatus {
    guard(|| {
        let report = &deref(report, "report")?.0;
        *out_ptr(cr_y, "cr_y")? = report.cr_y.unwrap_or(f64::NAN);
        *out_ptr(cr_z, "cr_z")? = report.cr_z.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Writes the report as CSV to `path` (UTF-8). With `record_runtime == 0`
/// the runtime column is written as `NA`.
///
/// # Safety
/// `report` must be valid and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fbsde_report_write_csv(
    report: *const FbsdeReport,
    path: *const c_char,
    record_runtime: i32,
) -> FbsdeStatus {
    guard(|| {
        let report = &deref(report, "report")?.0;
        if path.is_null() {
            return Err(null("path"));
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_last_error("path is not valid UTF-8");
            return Err(FbsdeStatus::InvalidArgument);
        };
        let csv = report::report_csv(report, record_runtime != 0);
        std::fs::write(Path::new(path), csv)
            .map_err(|source| fail(Error::Io { path: path.into(), source }))?;
        Ok(())
    })
}

/// # Safety
/// `report` must come from [`fbsde_convergence_study`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fbsde_report_free(report: *mut FbsdeReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Least-squares slope of `ln err` against `ln h`.
///
/// # Safety
/// `hs` and `errs` must point to `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fbsde_convergence_rate(hs: *const f64, errs: *const f64, n: usize, out: *mut f64) -> FbsdeStatus {
    guard(|| {
        let hs = std::slice::from_raw_parts(deref(hs, "hs")?, n);
        let errs = std::slice::from_raw_parts(deref(errs, "errs")?, n);
        let out = out_ptr(out, "out")?;
        *out = convergence_rate(hs, errs).map_err(fail)?;
        Ok(())
    })
}
