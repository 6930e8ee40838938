//! C ABI for the mucalc solver: opaque handles, integer status codes, and
//! caller-freed strings. The generated header lands in `include/mucalc.h`.
//!
//! Usage sketch:
//!
//! ```c
//! MucalcSolver *s = NULL;
//! if (mucalc_solver_new("rel", "mu X. (p | dia X)", &s) != MUCALC_STATUS_OK) { ... }
//! MucalcVerdict v;
//! mucalc_solver_solve(s, &v);            /* MUCALC_VERDICT_SAT */
//! char *model = mucalc_solver_model(s);  /* serialized model or NULL */
//! mucalc_string_free(model);
//! mucalc_solver_free(s);
//! ```
//!
//! All functions are panic-safe: internal panics surface as
//! `MUCALC_STATUS_INTERNAL_ERROR` instead of unwinding across the boundary.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mucalc::engine::{Engine, EngineOptions, RunResult, Verdict};
use mucalc::formula::{normalize, LogicSpec};
use mucalc::model::write_model;
use mucalc::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum MucalcStatus {
    Ok = 0,
    /// A passed pointer was null.
    NullArgument = 1,
    /// Formula or logic tag failed to parse; see `mucalc_last_error`.
    ParseError = 2,
    /// Node or search budget exhausted.
    BudgetExceeded = 3,
    /// Invariant violation inside the solver; see `mucalc_last_error`.
    InternalError = 4,
    /// The handle is not in the right state (e.g. model before solve).
    InvalidState = 5,
}

/// Satisfiability verdicts.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum MucalcVerdict {
    Unknown = 0,
    Sat = 1,
    Unsat = 2,
}

/// Run statistics snapshot.
#[repr(C)]
pub struct MucalcStats {
    pub closure_size: u64,
    pub alternation_depth: u32,
    pub expanded_nodes: u64,
    pub backend_calls: u64,
    pub fixpoint_sweeps: u64,
}

/// Opaque solver handle.
pub struct MucalcSolver {
    logic: LogicSpec,
    chi: mucalc::Formula,
    result: Option<RunResult>,
    last_error: Option<CString>,
}

fn set_error(solver: &mut MucalcSolver, err: &Error) -> MucalcStatus {
    solver.last_error = CString::new(err.to_string()).ok();
    match err {
        Error::Parse { .. } | Error::Contract(_) | Error::Model(_) => MucalcStatus::ParseError,
        Error::Budget(_) => MucalcStatus::BudgetExceeded,
        Error::Internal(_) | Error::Io(_) => MucalcStatus::InternalError,
    }
}

/// Creates a solver for a formula in the given logic (`rel`, `graded`,
/// `prob`, or `fusion:tag+tag`). On success writes the new handle to `out`.
///
/// # Safety
/// `logic` and `formula` must be valid NUL-terminated UTF-8 strings and
/// `out` a valid pointer. The returned handle must be released with
/// [`mucalc_solver_free`].
#[no_mangle]
pub unsafe extern "C" fn mucalc_solver_new(
    logic: *const c_char,
    formula: *const c_char,
    out: *mut *mut MucalcSolver,
) -> MucalcStatus {
    if logic.is_null() || formula.is_null() || out.is_null() {
        return MucalcStatus::NullArgument;
    }
    let logic = CStr::from_ptr(logic).to_string_lossy().into_owned();
    let formula = CStr::from_ptr(formula).to_string_lossy().into_owned();
    let built = catch_unwind(|| -> Result<MucalcSolver, Error> {
        let spec = LogicSpec::parse(&logic).map_err(Error::Contract)?;
        let parsed = mucalc::parse::parse(formula.trim(), &spec)?;
        Ok(MucalcSolver {
            logic: spec,
            chi: normalize(&parsed),
            result: None,
            last_error: None,
        })
    });
    match built {
        Ok(Ok(solver)) => {
            *out = Box::into_raw(Box::new(solver));
            MucalcStatus::Ok
        }
        Ok(Err(err)) => {
            // No handle to hang the message on; encode the class only.
            match err {
                Error::Parse { .. } | Error::Contract(_) => MucalcStatus::ParseError,
                Error::Budget(_) => MucalcStatus::BudgetExceeded,
                _ => MucalcStatus::InternalError,
            }
        }
        Err(_) => MucalcStatus::InternalError,
    }
}

/// Runs the decision procedure, extracting and verifying a model on SAT.
/// Safe to call repeatedly; later calls return the cached verdict.
///
/// # Safety
/// `solver` must be a live handle from [`mucalc_solver_new`]; `verdict` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mucalc_solver_solve(
    solver: *mut MucalcSolver,
    verdict: *mut MucalcVerdict,
) -> MucalcStatus {
    if solver.is_null() || verdict.is_null() {
        return MucalcStatus::NullArgument;
    }
    let solver = &mut *solver;
    if solver.result.is_none() {
        let opts = EngineOptions { verify: true, ..Default::default() };
        let run = catch_unwind(AssertUnwindSafe(|| {
            let mut engine = Engine::new(&solver.chi, solver.logic.clone(), opts)?;
            engine.run()
        }));
        match run {
            Ok(Ok(result)) => solver.result = Some(result),
            Ok(Err(err)) => return set_error(solver, &err),
            Err(_) => {
                solver.last_error = CString::new("panic inside the solver").ok();
                return MucalcStatus::InternalError;
            }
        }
    }
    *verdict = match solver.result.as_ref().unwrap().verdict {
        Verdict::Sat => MucalcVerdict::Sat,
        Verdict::Unsat => MucalcVerdict::Unsat,
        Verdict::Unknown => MucalcVerdict::Unknown,
    };
    MucalcStatus::Ok
}

/// Returns the extracted model in the line-oriented model format, or NULL
/// when the formula was not satisfiable (or not solved yet). The string
/// must be released with [`mucalc_string_free`].
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mucalc_solver_model(solver: *mut MucalcSolver) -> *mut c_char {
    if solver.is_null() {
        return std::ptr::null_mut();
    }
    let solver = &*solver;
    match &solver.result {
        Some(result) => match &result.model {
            Some(model) => {
                let text = write_model(model, &solver.logic);
                CString::new(text)
                    .map(CString::into_raw)
                    .unwrap_or(std::ptr::null_mut())
            }
            None => std::ptr::null_mut(),
        },
        None => std::ptr::null_mut(),
    }
}

/// Copies run statistics into `stats`. Valid after a successful solve.
///
/// # Safety
/// `solver` must be a live handle; `stats` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mucalc_solver_stats(
    solver: *const MucalcSolver,
    stats: *mut MucalcStats,
) -> MucalcStatus {
    if solver.is_null() || stats.is_null() {
        return MucalcStatus::NullArgument;
    }
    let solver = &*solver;
    match &solver.result {
        Some(result) => {
            let s = &result.stats;
            *stats = MucalcStats {
                closure_size: s.closure_size as u64,
                alternation_depth: s.alternation_depth,
                expanded_nodes: s.expanded_nodes as u64,
                backend_calls: s.backend_calls as u64,
                fixpoint_sweeps: s.fixpoint_sweeps as u64,
            };
            MucalcStatus::Ok
        }
        None => MucalcStatus::InvalidState,
    }
}

/// Returns the last error message attached to the handle, or NULL. The
/// string must be released with [`mucalc_string_free`].
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mucalc_last_error(solver: *const MucalcSolver) -> *mut c_char {
    if solver.is_null() {
        return std::ptr::null_mut();
    }
    match &(*solver).last_error {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a mucalc function and not freed before.
#[no_mangle]
pub unsafe extern "C" fn mucalc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Releases a solver handle.
///
/// # Safety
/// `solver` must have been returned by [`mucalc_solver_new`] and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn mucalc_solver_free(solver: *mut MucalcSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}
