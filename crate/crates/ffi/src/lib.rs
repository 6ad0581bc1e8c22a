//! C ABI over `ssc-core`.
//!
//! Documents are parsed into an opaque [`SscPattern`] handle. Every call
//! returns an [`SscStatus`]; on failure the message is kept per thread and can
//! be fetched with [`ssc_last_error_message`]. Strings handed out by this
//! library must be released with [`ssc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ssc_core::cli::{report, ReportOptions};
use ssc_core::color_rule::{is_colorable_with, SearchOptions};
use ssc_core::matching::is_nonsingular;
use ssc_core::verification::{decide, SamplePlan, VerdictStatus};
use ssc_core::{Error, PatternDocument};

/// Parsed document. Opaque to C.
pub struct SscPattern {
    source: String,
    doc: PatternDocument,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidPattern = 4,
    Dimension = 5,
    MissingStateDim = 6,
    BudgetExceeded = 7,
    UnknownCommand = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SscVerdict {
    /// Both graphs colorable: every member of the class is controllable.
    SufficientControllable = 0,
    /// The graph test failed and sampling found no counterexample.
    Inconclusive = 2,
    /// A sampled member fails the Kalman test.
    RefutedBySample = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes removed")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> SscStatus {
    match e {
        Error::Parse { .. } => SscStatus::Parse,
        Error::Invalid(_) | Error::ZeroStar(_) | Error::MissingColor(_) => {
            SscStatus::InvalidPattern
        }
        Error::NotSquare { .. }
        | Error::TooManyRows { .. }
        | Error::Dimension(_)
        | Error::InvalidTrace { .. } => SscStatus::Dimension,
        Error::MissingStateDim => SscStatus::MissingStateDim,
        Error::BudgetExceeded { .. } => SscStatus::BudgetExceeded,
        Error::UnknownCommand(_) => SscStatus::UnknownCommand,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), SscStatus>) -> SscStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SscStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            SscStatus::Panic
        }
    }
}

fn fail(e: Error) -> SscStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SscStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(SscStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        SscStatus::InvalidUtf8
    })
}

unsafe fn handle<'a>(p: *const SscPattern) -> Result<&'a SscPattern, SscStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("pattern handle is null");
        SscStatus::NullPointer
    })
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), SscStatus> {
    if out.is_null() {
        set_error("output pointer is null");
        return Err(SscStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

/// Parses a document (text format or JSON envelope). On success `*out`
/// receives a handle to release with `ssc_pattern_free`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssc_pattern_parse(
    text: *const c_char,
    out: *mut *mut SscPattern,
) -> SscStatus {
    guard(|| {
        let source = str_arg(text, "text")?.to_string();
        let doc = PatternDocument::parse(&source).map_err(fail)?;
        let boxed = Box::into_raw(Box::new(SscPattern { source, doc }));
        write_out(out, boxed).inspect_err(|_| drop(Box::from_raw(boxed)))
    })
}

/// # Safety
/// `p` must come from `ssc_pattern_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ssc_pattern_free(p: *mut SscPattern) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ssc_pattern_rows(p: *const SscPattern) -> usize {
    p.as_ref().map_or(0, |h| h.doc.matrix.rows())
}

/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ssc_pattern_cols(p: *const SscPattern) -> usize {
    p.as_ref().map_or(0, |h| h.doc.matrix.cols())
}

/// State dimension from the header, or 0 if absent.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ssc_pattern_state_dim(p: *const SscPattern) -> usize {
    p.as_ref().and_then(|h| h.doc.state_dim).unwrap_or(0)
}

/// Matching test on a square matrix.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssc_is_nonsingular(p: *const SscPattern, out: *mut bool) -> SscStatus {
    guard(|| {
        let cert = is_nonsingular(&handle(p)?.doc.matrix).map_err(fail)?;
        write_out(out, cert.verdict)
    })
}

/// Colorability of the matrix graph. With `greedy`, `false` is not
/// conclusive.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssc_is_colorable(
    p: *const SscPattern,
    greedy: bool,
    out: *mut bool,
) -> SscStatus {
    guard(|| {
        let opts = SearchOptions {
            greedy,
            ..SearchOptions::default()
        };
        let c = is_colorable_with(&handle(p)?.doc.matrix, &opts).map_err(fail)?;
        write_out(out, c.colorable)
    })
}

/// Graph test on `[A B]` and the barred matrix, then `trials` seeded
/// realizations when inconclusive. Needs a state dimension in the header.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssc_check_controllability(
    p: *const SscPattern,
    seed: u64,
    trials: usize,
    out: *mut SscVerdict,
) -> SscStatus {
    guard(|| {
        let sys = handle(p)?.doc.system().map_err(fail)?;
        let v = decide(
            &sys,
            &SearchOptions::default(),
            &SamplePlan::new(seed, trials),
        )
        .map_err(fail)?;
        let verdict = match v.status {
            VerdictStatus::SufficientControllable => SscVerdict::SufficientControllable,
            VerdictStatus::Inconclusive => SscVerdict::Inconclusive,
            VerdictStatus::RefutedBySample => SscVerdict::RefutedBySample,
        };
        write_out(out, verdict)
    })
}

/// The JSON report the `ssc` command line prints for `command` on this
/// document. `trials` of 0 selects the command's default. `*exit_code`
/// receives the command line's exit code and `*out` a string to release with
/// `ssc_string_free`.
///
/// # Safety
/// `p` must be a live handle, `command` a NUL-terminated string, and
/// `exit_code` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ssc_report_json(
    p: *const SscPattern,
    command: *const c_char,
    seed: u64,
    trials: usize,
    exit_code: *mut i32,
    out: *mut *mut c_char,
) -> SscStatus {
    guard(|| {
        let h = handle(p)?;
        let command = str_arg(command, "command")?;
        let opts = ReportOptions {
            seed,
            trials: (trials > 0).then_some(trials),
            ..ReportOptions::default()
        };
        let r = report(command, &h.source, &opts).map_err(fail)?;
        let s = CString::new(r.json_text())
            .expect("JSON has no NUL bytes")
            .into_raw();
        write_out(exit_code, r.exit_code).inspect_err(|_| drop(CString::from_raw(s)))?;
        write_out(out, s).inspect_err(|_| drop(CString::from_raw(s)))
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ssc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copy of the last error on this thread, or null. Release with
/// `ssc_string_free`.
#[no_mangle]
pub extern "C" fn ssc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |s| s.clone().into_raw())
    })
}
