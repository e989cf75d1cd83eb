//! C interface to tepkit.
//!
//! Objects cross the boundary as opaque pointers created by `*_load*` or
//! `tep_run_*` and released by the matching `*_free`. Every fallible call
//! returns a [`TepStatus`]; on failure [`tep_last_error`] describes it.
//! Panics are caught and reported as [`TepStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use tepkit::hedging::{evaluate_plan_all_scenarios, run_baseline, run_ph, PhParams, PhResult, SolveParams};
use tepkit::instance::{load_instance, load_instance_file, to_canonical_json};
use tepkit::mip::{build_extensive_mip, solve_bnb, BnbOptions, BnbStatus, DEFAULT_ANGLE_BOUND};
use tepkit::scenario_lp::ScenarioLpModel;
use tepkit::{Error, Instance, Plan};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    InvalidArgument = 5,
    Infeasible = 6,
    Io = 7,
    Solver = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// A loaded, validated instance.
pub struct TepInstance {
    inner: Instance,
}

/// Outcome of a decomposition run.
pub struct TepResult {
    inner: PhResult,
}

/// Options for [`tep_run_ph`] and [`tep_run_baseline`]. Fill with
/// [`tep_ph_options_default`] first.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TepPhOptions {
    pub beta: f64,
    pub alpha: f64,
    /// Slack penalty; values ≤ 0 select the instance default.
    pub lambda: f64,
    /// Seconds per subproblem; ≤ 0 means unlimited.
    pub subproblem_seconds: f64,
    /// Overall seconds; negative or infinite means unlimited.
    pub overall_seconds: f64,
    /// 0 means no iteration cap.
    pub max_iterations: usize,
    pub workers: usize,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> TepStatus {
    match err {
        Error::Parse { .. } | Error::CaseFormat { .. } => TepStatus::Parse,
        Error::Validation(_) => TepStatus::Validation,
        Error::InvalidArgument(_) | Error::UnknownCandidate(_) | Error::UnknownScenario(_) => {
            TepStatus::InvalidArgument
        }
        Error::Infeasible(_) | Error::InfeasibleStart(_) => TepStatus::Infeasible,
        Error::Io(_) => TepStatus::Io,
        Error::LpStatus(_) | Error::Lp(_) => TepStatus::Solver,
    }
}

struct Fail(TepStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TepStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TepStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            TepStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(TepStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn instance_arg<'a>(p: *const TepInstance) -> Result<&'a Instance, Fail> {
    p.as_ref().map(|i| &i.inner).ok_or_else(|| null("instance"))
}

unsafe fn plan_arg(inst: &Instance, ids: *const usize, len: usize) -> Result<Plan, Fail> {
    if len == 0 {
        return Ok(Plan::empty());
    }
    if ids.is_null() {
        return Err(null("plan ids"));
    }
    let plan: Plan = std::slice::from_raw_parts(ids, len).iter().copied().collect();
    inst.check_plan(&plan)?;
    Ok(plan)
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies `plan` into `buf` (capacity `cap`) and stores its size in `len`.
/// `buf` may be NULL when `cap` is 0 to query the size.
unsafe fn write_plan(plan: &Plan, buf: *mut usize, cap: usize, len: *mut usize) -> Result<(), Fail> {
    *out_arg(len, "len")? = plan.len();
    if plan.len() > cap {
        return Err(Fail(TepStatus::BufferTooSmall, format!("plan has {} lines, buffer holds {cap}", plan.len())));
    }
    if !plan.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        for (i, &k) in plan.iter().enumerate() {
            *buf.add(i) = k;
        }
    }
    Ok(())
}

fn lambda_or_default(inst: &Instance, lambda: f64) -> f64 {
    if lambda > 0.0 {
        lambda
    } else {
        inst.default_penalty()
    }
}

/// Message describing the last failure on this thread, or NULL. The string
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates an instance from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tep_instance_load_json(json: *const c_char, out: *mut *mut TepInstance) -> TepStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inst = load_instance(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(TepInstance { inner: inst }));
        Ok(())
    })
}

/// Reads, parses and validates an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tep_instance_load_file(path: *const c_char, out: *mut *mut TepInstance) -> TepStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inst = load_instance_file(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(TepInstance { inner: inst }));
        Ok(())
    })
}

/// # Safety
/// `inst` must come from a load call and not have been freed, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tep_instance_free(inst: *mut TepInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Stores bus, candidate and scenario counts. Any output may be NULL.
///
/// # Safety
/// `inst` must be a live instance; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn tep_instance_sizes(
    inst: *const TepInstance,
    buses: *mut usize,
    candidates: *mut usize,
    scenarios: *mut usize,
) -> TepStatus {
    guard(|| {
        let inst = instance_arg(inst)?;
        if let Some(b) = buses.as_mut() {
            *b = inst.buses.len();
        }
        if let Some(c) = candidates.as_mut() {
            *c = inst.num_candidates();
        }
        if let Some(s) = scenarios.as_mut() {
            *s = inst.scenarios.len();
        }
        Ok(())
    })
}

/// Copies the candidate line ids in ascending order.
///
/// # Safety
/// `buf` must hold `cap` elements; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tep_instance_candidates(
    inst: *const TepInstance,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> TepStatus {
    guard(|| {
        let inst = instance_arg(inst)?;
        write_plan(&inst.all_candidates_plan(), buf, cap, len)
    })
}

/// Solves the dispatch LP of scenario `scenario` with the candidates in
/// `ids` built. Stores the LP objective (generation cost plus penalized
/// slack) and the total capacity violation.
///
/// # Safety
/// `ids` must hold `len` elements (or be NULL when `len` is 0); outputs
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn tep_solve_lp(
    inst: *const TepInstance,
    scenario: usize,
    ids: *const usize,
    len: usize,
    lambda: f64,
    objective: *mut f64,
    violation: *mut f64,
) -> TepStatus {
    guard(|| {
        let inst = instance_arg(inst)?;
        let plan = plan_arg(inst, ids, len)?;
        let (objective, violation) = (out_arg(objective, "objective")?, out_arg(violation, "violation")?);
        let mut model = ScenarioLpModel::new(inst, scenario, lambda_or_default(inst, lambda))?;
        model.set_built_set(&plan)?;
        let op = model.solve()?;
        *objective = op.objective;
        *violation = op.violation();
        Ok(())
    })
}

/// Evaluates a plan on every scenario with cross-scenario repair. Stores
/// the penalized expected cost and the size of the repaired plan.
///
/// # Safety
/// As for [`tep_solve_lp`].
#[no_mangle]
pub unsafe extern "C" fn tep_evaluate_plan(
    inst: *const TepInstance,
    ids: *const usize,
    len: usize,
    lambda: f64,
    penalized_cost: *mut f64,
    repaired_len: *mut usize,
) -> TepStatus {
    guard(|| {
        let inst = instance_arg(inst)?;
        let plan = plan_arg(inst, ids, len)?;
        let a = evaluate_plan_all_scenarios(inst, &plan, lambda_or_default(inst, lambda))?;
        *out_arg(penalized_cost, "penalized_cost")? = a.penalized_cost;
        *out_arg(repaired_len, "repaired_len")? = a.plan.len();
        Ok(())
    })
}

/// Exact branch-and-bound over all scenarios. `seconds` ≤ 0 means no time
/// limit. On success the incumbent is copied to `buf` and `optimal` is set
/// to 1 when optimality was proven.
///
/// # Safety
/// `buf` must hold `cap` elements; all other outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn tep_solve_bnb(
    inst: *const TepInstance,
    seconds: f64,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
    upper_bound: *mut f64,
    lower_bound: *mut f64,
    optimal: *mut i32,
) -> TepStatus {
    guard(|| {
        let inst = instance_arg(inst)?;
        let scenarios: Vec<usize> = (0..inst.scenarios.len()).collect();
        let model = build_extensive_mip(inst, &scenarios, DEFAULT_ANGLE_BOUND)?;
        let opts =
            BnbOptions { time_limit: (seconds > 0.0).then(|| Duration::from_secs_f64(seconds)), node_limit: None };
        let res = solve_bnb(inst, &model, None, &opts)?;
        *out_arg(upper_bound, "upper_bound")? = res.upper_bound;
        *out_arg(lower_bound, "lower_bound")? = res.lower_bound;
        *out_arg(optimal, "optimal")? = i32::from(res.status == BnbStatus::Optimal);
        match &res.incumbent {
            Some(plan) => write_plan(plan, buf, cap, len),
            None => Err(Fail(TepStatus::Infeasible, "no feasible plan found".into())),
        }
    })
}

/// Writes the default options.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tep_ph_options_default(out: *mut TepPhOptions) -> TepStatus {
    guard(|| {
        let d = PhParams::default();
        *out_arg(out, "out")? = TepPhOptions {
            beta: d.beta,
            alpha: d.alpha,
            lambda: 0.0,
            subproblem_seconds: 0.0,
            overall_seconds: -1.0,
            max_iterations: 0,
            workers: d.workers,
            seed: d.seed,
        };
        Ok(())
    })
}

fn ph_params(o: &TepPhOptions) -> Result<PhParams, Fail> {
    Ok(PhParams {
        solve: SolveParams {
            lambda: (o.lambda > 0.0).then_some(o.lambda),
            time_limit: (o.subproblem_seconds > 0.0).then(|| Duration::from_secs_f64(o.subproblem_seconds)),
            ..SolveParams::default()
        },
        beta: o.beta,
        alpha: o.alpha,
        workers: o.workers.max(1),
        seed: o.seed,
        time_limit: (o.overall_seconds >= 0.0 && o.overall_seconds.is_finite())
            .then(|| Duration::from_secs_f64(o.overall_seconds)),
        max_iterations: (o.max_iterations > 0).then_some(o.max_iterations),
    })
}

unsafe fn run(
    inst: *const TepInstance,
    options: *const TepPhOptions,
    out: *mut *mut TepResult,
    baseline: bool,
) -> TepStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inst = instance_arg(inst)?;
        let params = ph_params(options.as_ref().ok_or_else(|| null("options"))?)?;
        let res = if baseline { run_baseline(inst, &params)? } else { run_ph(inst, &params)? };
        *out = Box::into_raw(Box::new(TepResult { inner: res }));
        Ok(())
    })
}

/// Progressive hedging.
///
/// # Safety
/// `inst` must be live; `options` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tep_run_ph(
    inst: *const TepInstance,
    options: *const TepPhOptions,
    out: *mut *mut TepResult,
) -> TepStatus {
    run(inst, options, out, false)
}

/// One-pass baseline decomposition.
///
/// # Safety
/// As for [`tep_run_ph`].
#[no_mangle]
pub unsafe extern "C" fn tep_run_baseline(
    inst: *const TepInstance,
    options: *const TepPhOptions,
    out: *mut *mut TepResult,
) -> TepStatus {
    run(inst, options, out, true)
}

/// # Safety
/// `res` must come from a run call and not have been freed, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tep_result_free(res: *mut TepResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Stores the penalized cost and iteration count of a run.
///
/// # Safety
/// `res` must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tep_result_summary(
    res: *const TepResult,
    penalized_cost: *mut f64,
    iterations: *mut usize,
) -> TepStatus {
    guard(|| {
        let r = &res.as_ref().ok_or_else(|| null("result"))?.inner;
        *out_arg(penalized_cost, "penalized_cost")? = r.penalized_cost;
        *out_arg(iterations, "iterations")? = r.iterations.len();
        Ok(())
    })
}

/// Copies the best plan of a run.
///
/// # Safety
/// `buf` must hold `cap` elements; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn tep_result_plan(
    res: *const TepResult,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> TepStatus {
    guard(|| {
        let r = &res.as_ref().ok_or_else(|| null("result"))?.inner;
        write_plan(&r.plan, buf, cap, len)
    })
}

/// The full run as JSON; release with [`tep_string_free`].
///
/// # Safety
/// `res` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tep_result_json(res: *const TepResult, out: *mut *mut c_char) -> TepStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let r = &res.as_ref().ok_or_else(|| null("result"))?.inner;
        let value = serde_json::to_value(r).map_err(|e| Fail(TepStatus::Solver, e.to_string()))?;
        let text = CString::new(to_canonical_json(&value)).expect("JSON text has no NUL");
        *out = text.into_raw();
        Ok(())
    })
}
