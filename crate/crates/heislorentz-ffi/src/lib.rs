//! C ABI for the heislorentz library.
//!
//! The interface mirrors the command-line tool: a command name plus an
//! optional JSON configuration produce an immutable report handle that can be
//! queried for the overall outcome and the full JSON text. All strings are
//! UTF-8 and NUL-terminated; every pointer returned by a report accessor
//! stays valid until [`hl_report_free`] releases the handle.
//!
//! Errors are reported through [`HlStatus`] return codes; the most recent
//! failure message for the calling thread is available from
//! [`hl_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use heislorentz::cli::{run, CommandKind, RunConfig};
use heislorentz::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The command or configuration was rejected; see [`hl_last_error`].
    Config = 3,
    /// The run aborted on a numerical or structural failure.
    Failed = 4,
    /// An internal invariant was violated; see [`hl_last_error`].
    Internal = 5,
}

/// Opaque result of one verification run.
///
/// Create with [`hl_run`], inspect with the `hl_report_*` accessors, release
/// with [`hl_report_free`].
pub struct HlReport {
    json: CString,
    passed: bool,
    check_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(text).expect("NUL bytes stripped"));
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn static_cstring(text: &str, slot: &'static OnceLock<CString>) -> *const c_char {
    slot.get_or_init(|| CString::new(text).expect("no NUL bytes in constants")).as_ptr()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    static SLOT: OnceLock<CString> = OnceLock::new();
    static_cstring(heislorentz::VERSION, &SLOT)
}

/// Convention stamp describing the sign and ordering choices behind every
/// reported number, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_convention() -> *const c_char {
    static SLOT: OnceLock<CString> = OnceLock::new();
    static_cstring(heislorentz::CONVENTION, &SLOT)
}

/// Message of the most recent failure on the calling thread, or NULL if the
/// last call succeeded. The pointer is valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map(|s| s.as_ptr()).unwrap_or(ptr::null())
    })
}

fn parse_command(text: &str) -> Result<CommandKind, String> {
    let mut parts = text.split_whitespace();
    let head = parts.next().unwrap_or("");
    let arg = parts.next();
    if parts.next().is_some() {
        return Err(format!("command `{text}` has trailing arguments"));
    }
    match (head, arg) {
        ("validate", None) => Ok(CommandKind::Validate),
        ("metric", None) => Ok(CommandKind::Metric),
        ("killing", None) => Ok(CommandKind::Killing),
        ("quotient", None) => Ok(CommandKind::Quotient),
        ("equivalence", None) => Ok(CommandKind::Equivalence),
        ("rigidity", None) => Ok(CommandKind::Rigidity),
        ("example", Some(name)) => Ok(CommandKind::Example(name.to_string())),
        _ => Err(format!(
            "unknown command `{text}`; expected validate, metric, killing, quotient, \
             equivalence, rigidity, or `example <homogeneous|adams|monodromy>`"
        )),
    }
}

/// Runs `command` against `config_json` and stores a new report handle in
/// `out_report`.
///
/// `command` is one of `validate`, `metric`, `killing`, `quotient`,
/// `equivalence`, `rigidity`, or `example <name>`. `config_json` may be NULL
/// for the built-in defaults. On any status other than `HL_STATUS_OK`,
/// `*out_report` is NULL and [`hl_last_error`] describes the problem. A
/// report produced from a run whose checks failed still returns
/// `HL_STATUS_OK` here; the outcome is read with [`hl_report_passed`].
///
/// # Safety
///
/// `command` and (when non-NULL) `config_json` must point to NUL-terminated
/// strings, and `out_report` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_run(
    command: *const c_char,
    config_json: *const c_char,
    out_report: *mut *mut HlReport,
) -> HlStatus {
    if out_report.is_null() {
        set_last_error("out_report is NULL");
        return HlStatus::NullArgument;
    }
    *out_report = ptr::null_mut();
    if command.is_null() {
        set_last_error("command is NULL");
        return HlStatus::NullArgument;
    }
    let command = match CStr::from_ptr(command).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_last_error("command is not valid UTF-8");
            return HlStatus::InvalidUtf8;
        }
    };
    let config_text = if config_json.is_null() {
        None
    } else {
        match CStr::from_ptr(config_json).to_str() {
            Ok(s) => Some(s),
            Err(_) => {
                set_last_error("config_json is not valid UTF-8");
                return HlStatus::InvalidUtf8;
            }
        }
    };

    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<HlReport, (HlStatus, String)> {
        let kind = parse_command(command).map_err(|m| (HlStatus::Config, m))?;
        let cfg = match config_text {
            None => RunConfig::default(),
            Some(text) => RunConfig::from_json(text).map_err(|e| {
                let status = match &e {
                    Error::Config { .. } => HlStatus::Config,
                    _ => HlStatus::Failed,
                };
                (status, e.to_string())
            })?,
        };
        let report = run(&kind, &cfg).map_err(|e| {
            let status = match &e {
                Error::Config { .. } => HlStatus::Config,
                _ => HlStatus::Failed,
            };
            (status, e.to_string())
        })?;
        let json = CString::new(report.to_json().replace('\0', " "))
            .expect("JSON text has no NUL bytes");
        Ok(HlReport { json, passed: report.passed, check_count: report.checks.len() })
    }));

    match outcome {
        Ok(Ok(report)) => {
            clear_last_error();
            *out_report = Box::into_raw(Box::new(report));
            HlStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic of unknown type".into());
            set_last_error(format!("internal panic: {message}"));
            HlStatus::Internal
        }
    }
}

/// 1 if every check in the report passed, 0 if any failed, -1 on NULL.
///
/// # Safety
///
/// `report` must be NULL or a handle from [`hl_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_report_passed(report: *const HlReport) -> c_int {
    match report.as_ref() {
        Some(r) => c_int::from(r.passed),
        None => -1,
    }
}

/// Number of checks the report carries, or -1 on NULL.
///
/// # Safety
///
/// `report` must be NULL or a handle from [`hl_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_report_check_count(report: *const HlReport) -> c_int {
    match report.as_ref() {
        Some(r) => r.check_count as c_int,
        None => -1,
    }
}

/// Full report as NUL-terminated JSON, or NULL on NULL input. The pointer is
/// owned by the handle and is valid until [`hl_report_free`].
///
/// # Safety
///
/// `report` must be NULL or a handle from [`hl_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_report_json(report: *const HlReport) -> *const c_char {
    match report.as_ref() {
        Some(r) => r.json.as_ptr(),
        None => ptr::null(),
    }
}

/// Releases a report handle. NULL is ignored; freeing twice is undefined.
///
/// # Safety
///
/// `report` must be NULL or a handle from [`hl_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_report_free(report: *mut HlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
