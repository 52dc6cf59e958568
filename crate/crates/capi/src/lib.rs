//! C ABI for the rewriting engine.
//!
//! The surface is a single opaque [`StEngine`] handle plus integer status
//! codes. An engine accumulates rule packages and script declarations;
//! strings cross the boundary as NUL-terminated UTF-8. Every string the
//! library hands out is released with [`st_string_free`]; the pointer
//! returned by [`st_engine_last_error`] stays owned by the engine and is
//! valid until the next call on the same handle.
//!
//! All entry points catch panics: a bug in the engine reports
//! `InternalError` instead of unwinding across the boundary.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use st_core::dsl::parse_term;
use st_core::runner::{apply_once, run_script, RunError, RunOptions};
use st_core::script::{load_rules, parse_script, parse_strategy, Env};

/// What happened to the last call. `Ok` and `Fail` are outcomes; the rest
/// are errors with a message available from `st_engine_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    /// The call succeeded.
    Ok = 0,
    /// The strategy signalled failure on the given term (not an error).
    Fail = 1,
    /// A rule package, script, strategy, or term failed to parse.
    ParseError = 2,
    /// The run aborted: a strategy failed or an expectation did not hold.
    RunError = 3,
    /// The configured time limit was exceeded.
    TimeLimit = 4,
    /// A null pointer or invalid UTF-8 was passed in.
    InvalidArgument = 5,
    /// The engine panicked; this is a bug in the library.
    InternalError = 6,
}

/// An engine instance: declared rules, boundedness facts, and the
/// configured time limit. Create with `st_engine_new`, release with
/// `st_engine_free`.
pub struct StEngine {
    env: Env,
    time_limit: Option<Duration>,
    last_error: CString,
}

impl StEngine {
    fn options(&self) -> RunOptions {
        RunOptions { time_limit: self.time_limit }
    }

    fn set_error(&mut self, msg: &str) {
        // A NUL can only arrive via a term that itself came from C, and
        // truncating the message is the friendliest recovery.
        let clean: String = msg.chars().filter(|&c| c != '\0').collect();
        self.last_error = CString::new(clean).expect("NULs removed");
    }

    fn clear_error(&mut self) {
        self.last_error = CString::default();
    }
}

fn run_error_status(e: &RunError) -> StStatus {
    match e {
        RunError::Script(_) => StStatus::ParseError,
        RunError::TimeLimitExceeded { .. } => StStatus::TimeLimit,
        _ => StStatus::RunError,
    }
}

/// Reads a required C string argument.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, StStatus> {
    if ptr.is_null() {
        return Err(StStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| StStatus::InvalidArgument)
}

/// Writes `text` to `out` as a malloc'd C string, if `out` is non-null.
unsafe fn write_out(out: *mut *mut c_char, text: &str) {
    if out.is_null() {
        return;
    }
    let clean: String = text.chars().filter(|&c| c != '\0').collect();
    let owned = CString::new(clean).expect("NULs removed");
    *out = owned.into_raw();
}

/// Runs `body` with panics converted to `InternalError`.
fn guarded(
    engine: &mut StEngine,
    body: impl FnOnce(&mut StEngine) -> StStatus,
) -> StStatus {
    match catch_unwind(AssertUnwindSafe(|| body(engine))) {
        Ok(status) => status,
        Err(_) => {
            engine.set_error("internal panic");
            StStatus::InternalError
        }
    }
}

/// Creates an engine with no rules and no time limit.
#[no_mangle]
pub extern "C" fn st_engine_new() -> *mut StEngine {
    Box::into_raw(Box::new(StEngine {
        env: Env::new(),
        time_limit: None,
        last_error: CString::default(),
    }))
}

/// Releases an engine. A null handle is a no-op.
///
/// # Safety
/// `engine` must be null or a pointer from `st_engine_new` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn st_engine_free(engine: *mut StEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Sets the wall-clock budget for subsequent runs, in microseconds.
/// Zero removes the limit.
///
/// # Safety
/// `engine` must be a live engine handle.
#[no_mangle]
pub unsafe extern "C" fn st_engine_set_time_limit_us(
    engine: *mut StEngine,
    micros: u64,
) -> StStatus {
    let Some(engine) = engine.as_mut() else {
        return StStatus::InvalidArgument;
    };
    engine.time_limit =
        (micros > 0).then(|| Duration::from_micros(micros));
    engine.clear_error();
    StStatus::Ok
}

/// Loads a rule package (declarations and `bounded` directives) into the
/// engine. Later packages may reference earlier declarations.
///
/// # Safety
/// `engine` must be a live engine handle and `src` a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn st_engine_load_rules(
    engine: *mut StEngine,
    src: *const c_char,
) -> StStatus {
    let Some(engine) = engine.as_mut() else {
        return StStatus::InvalidArgument;
    };
    let src = match read_str(src) {
        Ok(s) => s,
        Err(status) => {
            engine.set_error("rule source must be valid UTF-8");
            return status;
        }
    };
    guarded(engine, |engine| match load_rules(src, &mut engine.env) {
        Ok(()) => {
            engine.clear_error();
            StStatus::Ok
        }
        Err(e) => {
            engine.set_error(&e.to_string());
            StStatus::ParseError
        }
    })
}

/// Parses and runs a proof script against the engine's rules. On success
/// `result` (if non-null) receives the rendered final term; free it with
/// `st_string_free`. The script's declarations stay in the engine.
///
/// # Safety
/// `engine` must be a live engine handle, `src` a NUL-terminated string,
/// and `result` null or a valid location to store a string.
#[no_mangle]
pub unsafe extern "C" fn st_engine_run_script(
    engine: *mut StEngine,
    src: *const c_char,
    result: *mut *mut c_char,
) -> StStatus {
    let Some(engine) = engine.as_mut() else {
        return StStatus::InvalidArgument;
    };
    if !result.is_null() {
        *result = std::ptr::null_mut();
    }
    let src = match read_str(src) {
        Ok(s) => s,
        Err(status) => {
            engine.set_error("script source must be valid UTF-8");
            return status;
        }
    };
    guarded(engine, |engine| {
        let script = match parse_script(src, &mut engine.env) {
            Ok(s) => s,
            Err(e) => {
                engine.set_error(&e.to_string());
                return StStatus::ParseError;
            }
        };
        let options = engine.options();
        match run_script(&script, &engine.env, &options, &mut |_| {}) {
            Ok(term) => {
                write_out(result, &term.to_string());
                engine.clear_error();
                StStatus::Ok
            }
            Err(e) => {
                engine.set_error(&e.to_string());
                run_error_status(&e)
            }
        }
    })
}

/// Evaluates one strategy expression on one term. `Ok` stores the
/// rewritten term in `result` (if non-null); `Fail` reports that the
/// strategy signalled failure and stores nothing.
///
/// # Safety
/// `engine` must be a live engine handle, `strategy` and `term`
/// NUL-terminated strings, and `result` null or a valid location to
/// store a string.
#[no_mangle]
pub unsafe extern "C" fn st_engine_apply(
    engine: *mut StEngine,
    strategy: *const c_char,
    term: *const c_char,
    result: *mut *mut c_char,
) -> StStatus {
    let Some(engine) = engine.as_mut() else {
        return StStatus::InvalidArgument;
    };
    if !result.is_null() {
        *result = std::ptr::null_mut();
    }
    let (strategy, term) = match (read_str(strategy), read_str(term)) {
        (Ok(s), Ok(t)) => (s, t),
        _ => {
            engine.set_error(
                "strategy and term must be non-null valid UTF-8",
            );
            return StStatus::InvalidArgument;
        }
    };
    guarded(engine, |engine| {
        let strategy = match parse_strategy(strategy, &engine.env) {
            Ok(s) => s,
            Err(e) => {
                engine.set_error(&e.to_string());
                return StStatus::ParseError;
            }
        };
        let term = match parse_term(term) {
            Ok(t) => t,
            Err(e) => {
                engine.set_error(&e.to_string());
                return StStatus::ParseError;
            }
        };
        let options = engine.options();
        match apply_once(&engine.env, &strategy, &term, &options) {
            Ok(Some(out)) => {
                write_out(result, &out.to_string());
                engine.clear_error();
                StStatus::Ok
            }
            Ok(None) => {
                engine.set_error("strategy failed");
                StStatus::Fail
            }
            Err(e) => {
                engine.set_error(&e.to_string());
                run_error_status(&e)
            }
        }
    })
}

/// The message for the engine's most recent non-`Ok` status; the empty
/// string when the last call succeeded. The pointer is owned by the
/// engine and is invalidated by the next call on the same handle.
///
/// # Safety
/// `engine` must be a live engine handle.
#[no_mangle]
pub unsafe extern "C" fn st_engine_last_error(
    engine: *const StEngine,
) -> *const c_char {
    match engine.as_ref() {
        Some(engine) => engine.last_error.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Releases a string returned through a `result` out-parameter. A null
/// pointer is a no-op.
///
/// # Safety
/// `s` must be null or a string obtained from this library that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn st_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Owns a C string for the duration of a test call.
    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn new_engine() -> *mut StEngine {
        let e = st_engine_new();
        assert!(!e.is_null());
        e
    }

    unsafe fn last_error(e: *mut StEngine) -> String {
        CStr::from_ptr(st_engine_last_error(e))
            .to_string_lossy()
            .into_owned()
    }

    unsafe fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = CStr::from_ptr(p).to_string_lossy().into_owned();
        st_string_free(p);
        s
    }

    #[test]
    fn apply_rewrites_through_the_boundary() {
        unsafe {
            let e = new_engine();
            let rules = c("Flip := [f(a), g(a)];");
            assert_eq!(
                st_engine_load_rules(e, rules.as_ptr()),
                StStatus::Ok
            );
            let mut out: *mut c_char = std::ptr::null_mut();
            let status = st_engine_apply(
                e,
                c("TopDown(Transform(Flip))").as_ptr(),
                c("h(f(a))").as_ptr(),
                &mut out,
            );
            assert_eq!(status, StStatus::Ok);
            assert_eq!(take_string(out), "h(g(a))");
            assert_eq!(last_error(e), "");
            st_engine_free(e);
        }
    }

    #[test]
    fn fail_is_an_outcome_not_an_error() {
        unsafe {
            let e = new_engine();
            let mut out: *mut c_char = std::ptr::null_mut();
            let status = st_engine_apply(
                e,
                c("Fail").as_ptr(),
                c("a").as_ptr(),
                &mut out,
            );
            assert_eq!(status, StStatus::Fail);
            assert!(out.is_null());
            assert_eq!(last_error(e), "strategy failed");
            st_engine_free(e);
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        unsafe {
            let e = new_engine();
            let status =
                st_engine_load_rules(e, c("Broken := [a,;").as_ptr());
            assert_eq!(status, StStatus::ParseError);
            assert!(last_error(e).contains("line 1"));
            st_engine_free(e);
        }
    }

    #[test]
    fn scripts_run_and_failed_expectations_report() {
        unsafe {
            let e = new_engine();
            assert_eq!(
                st_engine_load_rules(e, c("R := [a, b];").as_ptr()),
                StStatus::Ok
            );
            let mut out: *mut c_char = std::ptr::null_mut();
            let good = c(
                "apply Transform(R) to a;\n\
                 expect b modulo oeps;",
            );
            assert_eq!(
                st_engine_run_script(e, good.as_ptr(), &mut out),
                StStatus::Ok
            );
            assert_eq!(take_string(out), "b");

            let bad = c(
                "apply Transform(R) to a;\n\
                 expect c modulo oeps;",
            );
            let status = st_engine_run_script(
                e,
                bad.as_ptr(),
                std::ptr::null_mut(),
            );
            assert_eq!(status, StStatus::RunError);
            assert!(last_error(e).contains("expectation failed"));
            st_engine_free(e);
        }
    }

    #[test]
    fn time_limit_interrupts_a_spinning_strategy() {
        unsafe {
            let e = new_engine();
            assert_eq!(
                st_engine_load_rules(
                    e,
                    c("Swap := [g(x_, y_), g(y, x)];").as_ptr()
                ),
                StStatus::Ok
            );
            assert_eq!(st_engine_set_time_limit_us(e, 1_000), StStatus::Ok);
            let status = st_engine_apply(
                e,
                c("Normalizer(FailAsIdentity(Transform(Swap)))").as_ptr(),
                c("g(a, b)").as_ptr(),
                std::ptr::null_mut(),
            );
            assert_eq!(status, StStatus::TimeLimit);
            // Clearing the limit lets the same engine work again.
            assert_eq!(st_engine_set_time_limit_us(e, 0), StStatus::Ok);
            let mut out: *mut c_char = std::ptr::null_mut();
            assert_eq!(
                st_engine_apply(
                    e,
                    c("Identity").as_ptr(),
                    c("g(a, b)").as_ptr(),
                    &mut out,
                ),
                StStatus::Ok
            );
            assert_eq!(take_string(out), "g(a, b)");
            st_engine_free(e);
        }
    }

    #[test]
    fn null_arguments_are_rejected_not_crashes() {
        unsafe {
            let e = new_engine();
            assert_eq!(
                st_engine_load_rules(e, std::ptr::null()),
                StStatus::InvalidArgument
            );
            assert_eq!(
                st_engine_apply(
                    e,
                    std::ptr::null(),
                    c("a").as_ptr(),
                    std::ptr::null_mut()
                ),
                StStatus::InvalidArgument
            );
            assert_eq!(
                st_engine_set_time_limit_us(
                    std::ptr::null_mut(),
                    1
                ),
                StStatus::InvalidArgument
            );
            assert!(st_engine_last_error(std::ptr::null()).is_null());
            st_engine_free(e);
            st_engine_free(std::ptr::null_mut());
            st_string_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn convergence_is_reachable_over_ffi() {
        unsafe {
            let e = new_engine();
            let mut out: *mut c_char = std::ptr::null_mut();
            let status = st_engine_apply(
                e,
                c("ConvergenceStrategy").as_ptr(),
                c("Oeps(1) + (-1)*Oeps(1)").as_ptr(),
                &mut out,
            );
            assert_eq!(status, StStatus::Ok);
            assert_eq!(take_string(out), "Oeps(3)");
            st_engine_free(e);
        }
    }
}
