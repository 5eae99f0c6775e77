//! C ABI over the indexify pipeline.
//!
//! A caller creates an [`IndexifySession`], loads a program and optional
//! configuration text, runs [`indexify_session_run`] and then reads results
//! back. Every fallible function returns an [`IndexifyStatus`]; the message
//! of the most recent failure is available from
//! [`indexify_session_last_error`]. Strings returned as `char *` are owned by
//! the caller and must be released with [`indexify_string_free`].

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use indexify::cli::{indexify, IndexConfig, Indexation};
use indexify::garden::Gardens;
use indexify::lang::{parse, typecheck, IndexedTypes, Program, Verdict};
use indexify::symex::{explore, explore_baseline, ExplorationReport, ExploreConfig, OpaquePolicy};
use indexify::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexifyStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    TypeError = 4,
    GardenError = 5,
    TableError = 6,
    RewriteError = 7,
    InterpError = 8,
    IoError = 9,
    InvalidArgument = 10,
    /// A call that needs an earlier step (a loaded program, a run) came first.
    NotReady = 11,
    Panic = 12,
}

/// Exploration mode for [`indexify_session_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexifyMode {
    Indexed = 0,
    BaselineAbandon = 1,
    BaselineConcretize = 2,
}

/// Opaque session handle.
pub struct IndexifySession {
    program: Option<Program>,
    config: IndexConfig,
    explore: ExploreConfig,
    indexation: Option<Indexation>,
    report: Option<ExplorationReport>,
    last_error: CString,
}

impl IndexifySession {
    fn fail(&mut self, status: IndexifyStatus, msg: impl ToString) -> IndexifyStatus {
        self.last_error = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
        status
    }

    fn error(&mut self, e: Error) -> IndexifyStatus {
        let status = match &e {
            Error::Parse(_) => IndexifyStatus::ParseError,
            Error::Type(_) => IndexifyStatus::TypeError,
            Error::Garden(_) => IndexifyStatus::GardenError,
            Error::Iot(_) => IndexifyStatus::TableError,
            Error::Rewrite(_) => IndexifyStatus::RewriteError,
            Error::Interp(_) => IndexifyStatus::InterpError,
            Error::Io { .. } => IndexifyStatus::IoError,
            Error::Usage(_) => IndexifyStatus::InvalidArgument,
        };
        self.fail(status, e)
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, IndexifyStatus> {
    if p.is_null() {
        return Err(IndexifyStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| IndexifyStatus::InvalidUtf8)
}

/// Runs `f` on the session, turning null handles and panics into statuses.
unsafe fn with_session(
    s: *mut IndexifySession,
    f: impl FnOnce(&mut IndexifySession) -> IndexifyStatus,
) -> IndexifyStatus {
    let Some(s) = s.as_mut() else { return IndexifyStatus::NullArgument };
    match catch_unwind(AssertUnwindSafe(|| f(&mut *s))) {
        Ok(st) => {
            if st == IndexifyStatus::Ok {
                s.last_error = CString::default();
            }
            st
        }
        Err(_) => s.fail(IndexifyStatus::Panic, "internal panic"),
    }
}

fn owned(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', "\\x00")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn indexify_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a session with the default configuration: strings indexed,
/// k = 3, maximum string length 8.
#[no_mangle]
pub extern "C" fn indexify_session_new() -> *mut IndexifySession {
    Box::into_raw(Box::new(IndexifySession {
        program: None,
        config: IndexConfig::default(),
        explore: ExploreConfig::default(),
        indexation: None,
        report: None,
        last_error: CString::default(),
    }))
}

/// # Safety
/// `s` must come from [`indexify_session_new`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_free(s: *mut IndexifySession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Message of the last failed call on this session, or an empty string. The
/// pointer stays valid until the next call on the session.
///
/// # Safety
/// `s` must be a live session or null.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_last_error(s: *const IndexifySession) -> *const c_char {
    match s.as_ref() {
        Some(s) => s.last_error.as_ptr(),
        None => c"null session".as_ptr(),
    }
}

/// Parses and type-checks `source`, replacing any earlier program and
/// discarding earlier results.
///
/// # Safety
/// `s` must be a live session; `source` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_load_source(s: *mut IndexifySession, source: *const c_char) -> IndexifyStatus {
    with_session(s, |s| {
        let src = match text(source) {
            Ok(t) => t,
            Err(st) => return s.fail(st, "source"),
        };
        let p = match parse(src) {
            Ok(p) => p,
            Err(e) => return s.error(e.into()),
        };
        if let Err(e) = typecheck(&p) {
            return s.error(e.into());
        }
        s.program = Some(p);
        s.indexation = None;
        s.report = None;
        IndexifyStatus::Ok
    })
}

/// Selects the indexed types: `"string"`, `"float"` or `"both"`.
///
/// # Safety
/// `s` must be a live session; `types` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_set_types(s: *mut IndexifySession, types: *const c_char) -> IndexifyStatus {
    with_session(s, |s| match text(types) {
        Err(st) => s.fail(st, "types"),
        Ok(t) => match IndexedTypes::from_flag(t) {
            Some(ty) if ty != IndexedTypes::NONE => {
                s.config.types = ty;
                IndexifyStatus::Ok
            }
            _ => s.fail(IndexifyStatus::InvalidArgument, format!("unknown type `{t}`")),
        },
    })
}

/// Garden growth limits: builder rounds and longest admitted string.
///
/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_set_limits(s: *mut IndexifySession, k: u32, max_len: usize) -> IndexifyStatus {
    with_session(s, |s| {
        s.config.k = k;
        s.config.max_len = max_len;
        IndexifyStatus::Ok
    })
}

/// Exploration limits. A zero `timeout_ms` keeps the default of 60 s.
///
/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_set_explore_limits(
    s: *mut IndexifySession,
    unroll_bound: u32,
    max_paths: usize,
    timeout_ms: u64,
) -> IndexifyStatus {
    with_session(s, |s| {
        s.explore.unroll_bound = unroll_bound;
        s.explore.max_paths = max_paths;
        if timeout_ms > 0 {
            s.explore.time_budget = Duration::from_millis(timeout_ms);
        }
        IndexifyStatus::Ok
    })
}

/// Uses a garden in the text file format verbatim instead of growing one.
///
/// # Safety
/// `s` must be a live session; `garden` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_set_garden(s: *mut IndexifySession, garden: *const c_char) -> IndexifyStatus {
    with_session(s, |s| {
        let t = match text(garden) {
            Ok(t) => t,
            Err(st) => return s.fail(st, "garden"),
        };
        match Gardens::parse(t) {
            Ok(g) => {
                s.config.garden = Some(g);
                IndexifyStatus::Ok
            }
            Err(e) => s.error(e.into()),
        }
    })
}

/// Operators to index, one name per line. Null restores the default (every
/// library operator of the indexed types).
///
/// # Safety
/// `s` must be a live session; `names` null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_set_fplus(s: *mut IndexifySession, names: *const c_char) -> IndexifyStatus {
    with_session(s, |s| {
        if names.is_null() {
            s.config.fplus = None;
            return IndexifyStatus::Ok;
        }
        match text(names) {
            Ok(t) => {
                s.config.fplus = Some(indexify::cli::name_list(t));
                IndexifyStatus::Ok
            }
            Err(st) => s.fail(st, "F+"),
        }
    })
}

/// Seeds (`str:` / `float:` lines) added to the harvested constants.
///
/// # Safety
/// `s` must be a live session; `seeds` null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_add_seeds(s: *mut IndexifySession, seeds: *const c_char) -> IndexifyStatus {
    with_session(s, |s| {
        if seeds.is_null() {
            s.config.add_seeds = None;
            return IndexifyStatus::Ok;
        }
        match text(seeds) {
            Ok(t) => {
                s.config.add_seeds = Some(t.to_string());
                IndexifyStatus::Ok
            }
            Err(st) => s.fail(st, "seeds"),
        }
    })
}

/// Explores the loaded program. Indexed mode indexifies it first.
///
/// # Safety
/// `s` must be a live session.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_run(s: *mut IndexifySession, mode: IndexifyMode) -> IndexifyStatus {
    with_session(s, |s| {
        let Some(p) = s.program.clone() else {
            return s.fail(IndexifyStatus::NotReady, "no program loaded");
        };
        let result = match mode {
            IndexifyMode::Indexed => indexify(&p, &s.config).and_then(|ix| {
                let r = explore(&ix.indexed, &ix.gardens, &ix.tables, &s.explore)?;
                s.indexation = Some(ix);
                Ok(r)
            }),
            IndexifyMode::BaselineAbandon | IndexifyMode::BaselineConcretize => {
                let policy =
                    if mode == IndexifyMode::BaselineAbandon { OpaquePolicy::Abandon } else { OpaquePolicy::Concretize };
                typecheck(&p)
                    .map_err(Error::from)
                    .and_then(|tp| explore_baseline(&tp, policy, &s.explore).map_err(Error::from))
            }
        };
        match result {
            Ok(r) => {
                s.report = Some(r);
                IndexifyStatus::Ok
            }
            Err(e) => s.error(e),
        }
    })
}

/// Counts from the last run. Any output pointer may be null.
///
/// # Safety
/// `s` must be a live session; non-null pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_counts(
    s: *mut IndexifySession,
    tests: *mut usize,
    assertion_failures: *mut usize,
    paths: *mut usize,
    escaped: *mut usize,
) -> IndexifyStatus {
    with_session(s, |s| {
        let Some(r) = &s.report else { return s.fail(IndexifyStatus::NotReady, "no run yet") };
        for (out, v) in [
            (tests, r.test_cases.len()),
            (assertion_failures, r.count(Verdict::AssertionFailure)),
            (paths, r.paths),
            (escaped, r.escaped),
        ] {
            if let Some(o) = out.as_mut() {
                *o = v;
            }
        }
        IndexifyStatus::Ok
    })
}

/// Branch and statement coverage of the last run, in percent.
///
/// # Safety
/// `s` must be a live session; non-null pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_coverage(s: *mut IndexifySession, bcov: *mut f64, icov: *mut f64) -> IndexifyStatus {
    with_session(s, |s| {
        let Some(r) = &s.report else { return s.fail(IndexifyStatus::NotReady, "no run yet") };
        if let Some(o) = bcov.as_mut() {
            *o = r.bcov();
        }
        if let Some(o) = icov.as_mut() {
            *o = r.icov();
        }
        IndexifyStatus::Ok
    })
}

/// What [`indexify_session_text`] returns.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexifyArtifact {
    /// The garden file.
    Garden = 0,
    /// All operator tables.
    Tables = 1,
    /// Rewritten source with the table definitions.
    IndexedIr = 2,
    /// The line-delimited report of the last run.
    Report = 3,
}

/// Writes a newly allocated copy of an artifact to `*out`. Garden, tables
/// and IR need an indexed run.
///
/// # Safety
/// `s` must be a live session; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn indexify_session_text(
    s: *mut IndexifySession,
    what: IndexifyArtifact,
    out: *mut *mut c_char,
) -> IndexifyStatus {
    if out.is_null() {
        return IndexifyStatus::NullArgument;
    }
    *out = ptr::null_mut();
    with_session(s, |s| {
        let t = match (what, &s.indexation, &s.report) {
            (IndexifyArtifact::Garden, Some(ix), _) => ix.gardens.serialize(),
            (IndexifyArtifact::Tables, Some(ix), _) => ix.iot_text(),
            (IndexifyArtifact::IndexedIr, Some(ix), _) => ix.ir(),
            (IndexifyArtifact::Report, _, Some(r)) => r.to_jsonl(),
            _ => return s.fail(IndexifyStatus::NotReady, "artifact not available yet"),
        };
        *out = owned(&t);
        IndexifyStatus::Ok
    })
}

/// # Safety
/// `p` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn indexify_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}
