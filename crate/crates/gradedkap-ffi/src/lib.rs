//! C ABI for the gradedkap engine. Handles are opaque, results are the
//! same deterministic JSON reports the CLI emits, and every entry point
//! returns a status code; the per-thread error message of the last failing
//! call is available as an owned string.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gradedkap::ce::CEModule;
use gradedkap::error::Error;
use gradedkap::input::{load, LoadedSpec};
use gradedkap::linfty::HomologicalVF;
use gradedkap::report::{
    atiyah_section, cohomology_section, homological_check, run_suites, spec_echo, CheckResult,
    ConfigEcho, Report,
};

/// Opaque engine handle: a parsed and validated input document.
pub struct GkEngine {
    loaded: LoadedSpec,
}

/// Status codes; nonzero values match the CLI exit codes where one exists.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkStatus {
    Ok = 0,
    CheckFailed = 1,
    InvalidInput = 2,
    Internal = 3,
    NullArgument = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let cstring = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("invalid error text").expect("static text"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(e: &Error) -> GkStatus {
    match e {
        Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::ChartMismatch(_)
        | Error::Torsion(_)
        | Error::InsufficientCap { .. } => GkStatus::InvalidInput,
        Error::NotHomological { .. } => GkStatus::CheckFailed,
        Error::Inconsistency(_) => GkStatus::Internal,
    }
}

fn fail(e: Error) -> GkStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, GkStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(GkStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        GkStatus::InvalidInput
    })
}

fn emit_string(out: *mut *mut c_char, body: String) -> GkStatus {
    if out.is_null() {
        set_error("null output pointer".into());
        return GkStatus::NullArgument;
    }
    match CString::new(body) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            GkStatus::Ok
        }
        Err(_) => {
            set_error("report contained an interior NUL byte".into());
            GkStatus::Internal
        }
    }
}

fn guarded(body: impl FnOnce() -> GkStatus + std::panic::UnwindSafe) -> GkStatus {
    match catch_unwind(body) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            GkStatus::Internal
        }
    }
}

fn base_report(loaded: &LoadedSpec, command: &str, homological: Option<CheckResult>) -> Report {
    let passed = homological.as_ref().map(|c| c.passed).unwrap_or(true);
    Report {
        tool: "gradedkap",
        version: env!("CARGO_PKG_VERSION"),
        spec: spec_echo(loaded),
        config: ConfigEcho {
            command: command.to_string(),
            connection: loaded.connection_kind.to_string(),
            arity_cap: loaded.arity_cap,
            weight_cap: loaded.weight_cap,
            suite: None,
            module: None,
            degree: None,
        },
        homological,
        atiyah: None,
        tower: None,
        cohomology: None,
        suites: Vec::new(),
        passed,
    }
}

fn render(report: &Report) -> Result<String, Error> {
    serde_json::to_string_pretty(report)
        .map_err(|e| Error::Inconsistency(format!("serialization failed: {e}")))
}

fn homological_or_fail(loaded: &LoadedSpec) -> Result<(HomologicalVF, CheckResult), Error> {
    let (q, check) = homological_check(loaded)?;
    match q {
        Some(q) => Ok((q, check)),
        None => Err(Error::NotHomological {
            coordinate: "input".into(),
            witness: check.witness.unwrap_or_default(),
        }),
    }
}

/// Parses a JSON document into an engine handle. On success writes the
/// handle to `out` and returns `Ok`; the caller releases it with
/// `gk_engine_free`.
///
/// # Safety
/// `json` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn gk_engine_new(
    json: *const c_char,
    out: *mut *mut GkEngine,
) -> GkStatus {
    guarded(AssertUnwindSafe(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return GkStatus::NullArgument;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match load(text) {
            Ok(loaded) => {
                let engine = Box::new(GkEngine { loaded });
                *out = Box::into_raw(engine);
                GkStatus::Ok
            }
            Err(e) => fail(e),
        }
    }))
}

/// Releases an engine handle. A null handle is ignored.
///
/// # Safety
/// `engine` must be a pointer returned by `gk_engine_new` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn gk_engine_free(engine: *mut GkEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// The error message of the last failing call on this thread, as an owned
/// string to release with `gk_string_free`; null when no error was
/// recorded.
#[no_mangle]
pub extern "C" fn gk_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        None => std::ptr::null_mut(),
        Some(msg) => msg.clone().into_raw(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `text` must have been returned by a gradedkap function and not freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn gk_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

unsafe fn with_engine<'a>(engine: *const GkEngine) -> Result<&'a GkEngine, GkStatus> {
    if engine.is_null() {
        set_error("null engine handle".into());
        return Err(GkStatus::NullArgument);
    }
    Ok(&*engine)
}

/// Runs the homological check; writes the JSON report. Returns
/// `CheckFailed` when the table is not homological (the report still
/// carries the witness).
///
/// # Safety
/// `engine` must be a live handle from `gk_engine_new`; `report_json`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_engine_check(
    engine: *const GkEngine,
    report_json: *mut *mut c_char,
) -> GkStatus {
    guarded(AssertUnwindSafe(|| {
        let engine = match with_engine(engine) {
            Ok(e) => e,
            Err(status) => return status,
        };
        match homological_check(&engine.loaded) {
            Err(e) => fail(e),
            Ok((_, check)) => {
                let passed = check.passed;
                let report = base_report(&engine.loaded, "check", Some(check));
                match render(&report) {
                    Err(e) => fail(e),
                    Ok(body) => {
                        let status = emit_string(report_json, body);
                        if status == GkStatus::Ok && !passed {
                            GkStatus::CheckFailed
                        } else {
                            status
                        }
                    }
                }
            }
        }
    }))
}

/// Computes the Atiyah cocycle of the document's connection and the
/// class-vanishing verdict; writes the JSON report.
///
/// # Safety
/// As for `gk_engine_check`.
#[no_mangle]
pub unsafe extern "C" fn gk_engine_atiyah(
    engine: *const GkEngine,
    report_json: *mut *mut c_char,
) -> GkStatus {
    guarded(AssertUnwindSafe(|| {
        let engine = match with_engine(engine) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let (q, check) = match homological_or_fail(&engine.loaded) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let mut report = base_report(&engine.loaded, "atiyah", Some(check));
        match atiyah_section(&engine.loaded, &q) {
            Err(e) => fail(e),
            Ok(section) => {
                report.atiyah = Some(section);
                report.passed = true;
                match render(&report) {
                    Err(e) => fail(e),
                    Ok(body) => emit_string(report_json, body),
                }
            }
        }
    }))
}

/// Computes the bracket tower through both routes up to `max_arity`
/// (0 keeps the document's cap) and writes the JSON report.
///
/// # Safety
/// As for `gk_engine_check`.
#[no_mangle]
pub unsafe extern "C" fn gk_engine_brackets(
    engine: *const GkEngine,
    max_arity: u32,
    report_json: *mut *mut c_char,
) -> GkStatus {
    guarded(AssertUnwindSafe(|| {
        let engine = match with_engine(engine) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let mut loaded = engine.loaded.clone();
        if max_arity > 0 {
            if max_arity < 2 {
                set_error("max_arity must be 0 (keep) or at least 2".into());
                return GkStatus::InvalidInput;
            }
            loaded.arity_cap = max_arity as usize;
        }
        let (q, check) = match homological_or_fail(&loaded) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let mut report = base_report(&loaded, "brackets", Some(check));
        match gradedkap::report::tower_section(&loaded, &q) {
            Err(e) => fail(e),
            Ok(section) => {
                report.tower = Some(section);
                report.passed = true;
                match render(&report) {
                    Err(e) => fail(e),
                    Ok(body) => emit_string(report_json, body),
                }
            }
        }
    }))
}

/// Runs a verification suite ("all", "pbw", "jacobi", "recursion",
/// "fedosov", "connections", "closedform") and writes the JSON report;
/// returns `Internal` when an exact identity fails.
///
/// # Safety
/// As for `gk_engine_check`, plus `suite` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gk_engine_verify(
    engine: *const GkEngine,
    suite: *const c_char,
    report_json: *mut *mut c_char,
) -> GkStatus {
    guarded(AssertUnwindSafe(|| {
        let engine = match with_engine(engine) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let suite = match read_str(suite) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let (q, check) = match homological_or_fail(&engine.loaded) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let mut report = base_report(&engine.loaded, "verify", Some(check));
        report.config.suite = Some(suite.to_string());
        match run_suites(&engine.loaded, &q, suite) {
            Err(e) => fail(e),
            Ok(suites) => {
                report.suites = suites;
                report.passed = report
                    .suites
                    .iter()
                    .all(|s| s.checks.iter().all(|c| c.passed));
                let passed = report.passed;
                match render(&report) {
                    Err(e) => fail(e),
                    Ok(body) => {
                        let status = emit_string(report_json, body);
                        if status == GkStatus::Ok && !passed {
                            set_error("a verification identity failed".into());
                            GkStatus::Internal
                        } else {
                            status
                        }
                    }
                }
            }
        }
    }))
}

/// Computes cohomology of a built-in module ("trivial", "adjoint",
/// "coadjoint", "atiyah") in one internal degree; writes the JSON report.
///
/// # Safety
/// As for `gk_engine_check`, plus `module` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gk_engine_cohomology(
    engine: *const GkEngine,
    module: *const c_char,
    degree: i64,
    report_json: *mut *mut c_char,
) -> GkStatus {
    guarded(AssertUnwindSafe(|| {
        let engine = match with_engine(engine) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let module_name = match read_str(module) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let parsed = match CEModule::parse(module_name) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let mut report = base_report(&engine.loaded, "cohomology", None);
        report.config.module = Some(module_name.to_string());
        report.config.degree = Some(degree);
        match cohomology_section(&engine.loaded, parsed, degree) {
            Err(e) => fail(e),
            Ok(section) => {
                report.cohomology = Some(section);
                report.passed = true;
                match render(&report) {
                    Err(e) => fail(e),
                    Ok(body) => emit_string(report_json, body),
                }
            }
        }
    }))
}
