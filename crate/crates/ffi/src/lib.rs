//! C ABI over the `traceloc` core.
//!
//! Handles are opaque pointers released with their `_free` function. Every
//! function returns a [`TlStatus`]; on failure the message is available from
//! [`tl_last_error_message`] on the same thread until the next call.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use traceloc::bugcache::decay_term;
use traceloc::composer::{fixed_coefficients, FeatureRow, FusionKind, FusionSpec, RankedList};
use traceloc::eval::average_precision;
use traceloc::pipeline::{run_pipeline, PipelineError, ReportBundle, RunConfig};
use traceloc::tracescore::{trace_score, TraceGraph};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    /// A required pointer was null.
    Null = 1,
    /// An argument is out of range or not valid UTF-8.
    InvalidArgument = 2,
    /// Bad configuration; the CLI exits with 1.
    Config = 3,
    /// Missing or malformed input data; the CLI exits with 2.
    Data = 4,
    /// An internal check failed; the CLI exits with 3.
    Invariant = 5,
    /// File system failure.
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Parsed run configuration.
pub struct TlConfig(RunConfig);

/// Metric reports of one run, one per composer.
pub struct TlReport {
    bundle: ReportBundle,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(TlStatus, String);

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match e {
            PipelineError::Config(_) => TlStatus::Config,
            PipelineError::Data(_) | PipelineError::InsufficientOverlap(_) => TlStatus::Data,
            PipelineError::Invariant(_) => TlStatus::Invariant,
            PipelineError::Io(_) => TlStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(TlStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(TlStatus::Null, format!("`{name}` is null"))
}

/// Runs `f`, turning errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
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
            TlStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn out_ptr<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(name))
}

/// Message of the last failed call on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn tl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a `key = value` config file. Relative paths resolve against its directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_config_load(path: *const c_char, out: *mut *mut TlConfig) -> TlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = std::ptr::null_mut();
        let path = text(path, "path")?;
        let cfg = RunConfig::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(TlConfig(cfg)));
        Ok(())
    })
}

/// Overrides one config key, with the same names as the config file. `workdir` sets the output directory.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn tl_config_set(cfg: *mut TlConfig, key: *const c_char, value: *const c_char) -> TlStatus {
    guard(|| {
        let cfg = out_ptr(cfg, "cfg")?;
        let (key, value) = (text(key, "key")?, text(value, "value")?);
        if key == "workdir" {
            cfg.0.workdir = PathBuf::from(value);
            return Ok(());
        }
        cfg.0.set(key, value)?;
        Ok(())
    })
}

/// Releases a config handle. Null is ignored.
///
/// # Safety
/// `cfg` must come from [`tl_config_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_config_free(cfg: *mut TlConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the whole pipeline, writing artifacts to the workdir, and returns the reports.
///
/// # Safety
/// `cfg` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_run(cfg: *const TlConfig, out: *mut *mut TlReport) -> TlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = std::ptr::null_mut();
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let summary = run_pipeline(&cfg.0)?;
        let names = summary
            .bundle
            .reports
            .iter()
            .map(|r| CString::new(r.composer.as_str()).map_err(|_| invalid("composer name contains NUL")))
            .collect::<Result<_, _>>()?;
        *out = Box::into_raw(Box::new(TlReport { bundle: summary.bundle, names }));
        Ok(())
    })
}

/// Number of composer reports.
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_report_count(report: *const TlReport, out: *mut usize) -> TlStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        *out_ptr(out, "out")? = report.bundle.reports.len();
        Ok(())
    })
}

/// Composer name of report `index`. The string lives as long as the handle.
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_report_composer(
    report: *const TlReport,
    index: usize,
    out: *mut *const c_char,
) -> TlStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out_ptr(out, "out")?;
        let name = report.names.get(index).ok_or_else(|| invalid(format!("report index {index} out of range")))?;
        *out = name.as_ptr();
        Ok(())
    })
}

/// Aggregate `metric` (MAP, MRR, Top1, Top5, Top10) of report `index`.
///
/// # Safety
/// `report` must be a live handle, `metric` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_report_metric(
    report: *const TlReport,
    index: usize,
    metric: *const c_char,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let metric = text(metric, "metric")?;
        let out = out_ptr(out, "out")?;
        let r = report.bundle.reports.get(index).ok_or_else(|| invalid(format!("report index {index} out of range")))?;
        *out = *r.aggregates.get(metric).ok_or_else(|| invalid(format!("unknown metric {metric:?}")))?;
        Ok(())
    })
}

/// The full report as JSON. Free the string with [`tl_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_report_to_json(report: *const TlReport, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = std::ptr::null_mut();
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let json = serde_json::to_string(&report.bundle).map_err(|e| Failure(TlStatus::Invariant, e.to_string()))?;
        *out = CString::new(json).map_err(|_| invalid("report contains NUL"))?.into_raw();
        Ok(())
    })
}

/// Releases a report handle. Null is ignored.
///
/// # Safety
/// `report` must come from [`tl_run`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_report_free(report: *mut TlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Fixed-weight coefficients for trace, structure and history, in that order.
///
/// # Safety
/// `out` must point to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_fixed_coefficients(a: f64, b: f64, out: *mut f64) -> TlStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(invalid("a and b must lie in [0, 1]"));
        }
        let out = slice_mut(out, 3, "out")?;
        let (r, s, h) = fixed_coefficients(a, b);
        out.copy_from_slice(&[r, s, h]);
        Ok(())
    })
}

/// Contribution of one fix commit `age_days` old in a `window_days` window.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tl_bugcache_term(age_days: f64, window_days: f64, out: *mut f64) -> TlStatus {
    guard(|| {
        if window_days.is_nan() || window_days <= 0.0 || !age_days.is_finite() {
            return Err(invalid("window must be positive and age finite"));
        }
        *out_ptr(out, "out")? = decay_term(age_days, window_days);
        Ok(())
    })
}

/// Trace scores for `n_files` files from `n_artifacts` related artifacts.
///
/// Artifact `i` has similarity `weights[i]` and fixed the files
/// `file_idx[offsets[i] .. offsets[i + 1]]`; `offsets` has `n_artifacts + 1`
/// entries starting at 0. Repeated indices within one artifact count once.
/// Files reached by no artifact score 0.
///
/// # Safety
/// Arrays must have the lengths above and `out` room for `n_files` doubles.
#[no_mangle]
pub unsafe extern "C" fn tl_trace_score(
    weights: *const f64,
    offsets: *const usize,
    file_idx: *const u32,
    n_artifacts: usize,
    n_files: usize,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let weights = slice(weights, n_artifacts, "weights")?;
        let offsets = slice(offsets, n_artifacts + 1, "offsets")?;
        if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("offsets must start at 0 and be non-decreasing"));
        }
        let file_idx = slice(file_idx, offsets[n_artifacts], "file_idx")?;
        let out = slice_mut(out, n_files, "out")?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("weights must be finite"));
        }
        if let Some(&bad) = file_idx.iter().find(|&&f| f as usize >= n_files) {
            return Err(invalid(format!("file index {bad} out of range")));
        }
        // zero-padded names keep map order equal to index order
        let file_name = |f: u32| format!("f{f:010}");
        let mut graph = TraceGraph { root: "query".into(), edges: BTreeMap::new(), fix_sets: BTreeMap::new() };
        for (i, &w) in weights.iter().enumerate() {
            let name = format!("a{i:020}");
            let fix: BTreeSet<String> = file_idx[offsets[i]..offsets[i + 1]].iter().map(|&f| file_name(f)).collect();
            graph.edges.insert(name.clone(), w);
            graph.fix_sets.insert(name, fix);
        }
        let table = trace_score(&graph);
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = table.scores.get(&file_name(j as u32)).copied().unwrap_or(0.0);
        }
        Ok(())
    })
}

/// Average precision of a ranking given as relevance flags in rank order.
///
/// `truth_size` counts every buggy file, retrieved or not, and must be positive.
///
/// # Safety
/// `relevant` must hold `n` bytes and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_average_precision(
    relevant: *const u8,
    n: usize,
    truth_size: usize,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let relevant = slice(relevant, n, "relevant")?;
        let out = out_ptr(out, "out")?;
        let hits = relevant.iter().filter(|&&r| r != 0).count();
        if truth_size == 0 || hits > truth_size {
            return Err(invalid("truth_size must be positive and at least the number of relevant ranks"));
        }
        let ranking = RankedList::from_scores(
            "query",
            (0..n).map(|i| (format!("r{i:020}"), (n - i) as f64)).collect(),
        );
        let mut truth: BTreeSet<String> =
            relevant.iter().enumerate().filter(|(_, &r)| r != 0).map(|(i, _)| format!("r{i:020}")).collect();
        // buggy files that were never retrieved
        truth.extend((hits..truth_size).map(|k| format!("missing{k}")));
        *out = average_precision(&ranking, &truth).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    })
}

/// Fuses three component scores per candidate with an unsupervised composer.
///
/// `kind` is a composer name such as `fixed_weight`, `combsum` or `borda`.
/// On success `out_order` holds candidate indices from best to worst.
///
/// # Safety
/// `paths` must hold `n` NUL-terminated strings, `r`, `h`, `s` and `out_order` `n` elements.
#[no_mangle]
pub unsafe extern "C" fn tl_fuse(
    kind: *const c_char,
    paths: *const *const c_char,
    r: *const f64,
    h: *const f64,
    s: *const f64,
    n: usize,
    out_order: *mut usize,
) -> TlStatus {
    guard(|| {
        let kind = FusionKind::parse(text(kind, "kind")?).map_err(|e| Failure(TlStatus::Config, e.to_string()))?;
        if kind.is_supervised() {
            return Err(Failure(TlStatus::Config, format!("{} needs training data", kind.as_str())));
        }
        let paths = slice(paths, n, "paths")?;
        let (r, h, s) = (slice(r, n, "r")?, slice(h, n, "h")?, slice(s, n, "s")?);
        let out = slice_mut(out_order, n, "out_order")?;
        let mut index = BTreeMap::new();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let path = text(paths[i], "paths[i]")?.to_string();
            if index.insert(path.clone(), i).is_some() {
                return Err(invalid(format!("duplicate path {path:?}")));
            }
            rows.push(FeatureRow { bug_id: "query".into(), file_path: path, susp_r: r[i], susp_h: h[i], susp_s: s[i], label: false });
        }
        if n == 0 {
            return Ok(());
        }
        let list = FusionSpec::new(kind).fuse("query", &rows).ok_or_else(|| invalid("composer produced no ranking"))?;
        for (slot, path) in out.iter_mut().zip(list.paths()) {
            *slot = index[path];
        }
        Ok(())
    })
}
