//! C ABI over `hetmeta`.
//!
//! Conventions: every fallible function returns a [`HetmetaStatus`] and
//! writes its result through an out-pointer. On failure the message and the
//! stable error code of the most recent error on the calling thread are
//! available from [`hetmeta_last_error_message`] and
//! [`hetmeta_last_error_code`]. Handles are opaque and must be released with
//! their matching `_free` function. Strings returned by the library are
//! released with [`hetmeta_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hetmeta::cli_io::{self, InputFile, ReportDocument};
use hetmeta::model::{self, Adjustment};
use hetmeta::sim::{self, BoxSummary, SimConfig, SimResult, Statistic};
use hetmeta::{effects, EffectSizeKind, Error, MetaDataset, OneArmStudy, SmdMethod, TwoArmStudy};

pub const HETMETA_KIND_MEAN: u32 = 0;
pub const HETMETA_KIND_MD: u32 = 1;
pub const HETMETA_KIND_SMD: u32 = 2;

pub const HETMETA_SMD_HEDGES: u32 = 0;
pub const HETMETA_SMD_COHEN: u32 = 1;

pub const HETMETA_STAT_I2: u32 = 0;
pub const HETMETA_STAT_I2_A: u32 = 1;
pub const HETMETA_STAT_I2_ANOVA: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HetmetaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Input rejected: parse, schema or validation failure.
    InputError = 3,
    /// Statistic undefined for otherwise valid input.
    ComputeError = 4,
    Panic = 5,
}

/// Opaque validated dataset.
pub struct HetmetaDataset(MetaDataset);

/// Opaque set of Monte Carlo results, one per grid point.
pub struct HetmetaSimResult(Vec<SimResult>);

/// Heterogeneity panel of a dataset. Undefined raw ratios are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HetmetaPanel {
    pub kind: u32,
    pub k: usize,
    pub sum_w: f64,
    pub sum_w2: f64,
    pub sum_wy: f64,
    pub weighted_mean: f64,
    pub q: f64,
    pub tau2_dl_raw: f64,
    pub tau2_dl: f64,
    pub sigma_tilde2: f64,
    pub n_tilde: f64,
    /// n~ for mean and MD, w~ for SMD.
    pub adjustment: f64,
    /// Nonzero when `adjustment` is the adjusted mean weight w~.
    pub adjustment_is_weight: c_int,
    pub i2_raw: f64,
    pub i2: f64,
    pub i2_a_raw: f64,
    pub i2_a: f64,
    pub size_weighted_mean: f64,
    pub msb: f64,
    pub msw: f64,
    pub i2_anova_raw: f64,
    pub i2_anova: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HetmetaBoxSummary {
    pub n_base: u32,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub lo_whisker: f64,
    pub hi_whisker: f64,
    pub icc_ma_true: f64,
}

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn cstring(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed")
}

fn set_error(code: &str, message: &str) {
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = Some(LastError {
            code: cstring(code),
            message: cstring(message),
        })
    });
}

fn status_of(err: &Error) -> HetmetaStatus {
    match err.root() {
        Error::DegenerateWeights { .. }
        | Error::InvalidStatistic { .. }
        | Error::InvalidAdjustedSize { .. }
        | Error::DegenerateVariance
        | Error::InvalidEffect { .. } => HetmetaStatus::ComputeError,
        _ => HetmetaStatus::InputError,
    }
}

struct Fail(HetmetaStatus);

impl From<Error> for Fail {
    fn from(err: Error) -> Self {
        set_error(err.code(), &err.to_string());
        Fail(status_of(&err))
    }
}

fn null(what: &str) -> Fail {
    set_error("ffi.null_pointer", &format!("`{what}` is null"));
    Fail(HetmetaStatus::NullPointer)
}

fn invalid(message: &str) -> Fail {
    set_error("ffi.invalid_argument", message);
    Fail(HetmetaStatus::InvalidArgument)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HetmetaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HetmetaStatus::Ok,
        Ok(Err(Fail(status))) => status,
        Err(_) => {
            set_error("ffi.panic", "internal panic");
            HetmetaStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller promises `ptr` points to `len` readable values.
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

unsafe fn out_ref<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: caller promises `ptr` is null or valid for writes.
    unsafe { ptr.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if ptr.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller promises a nul-terminated string.
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| invalid(&format!("`{what}` is not valid UTF-8")))
}

fn kind_of(kind: u32) -> Result<EffectSizeKind, Fail> {
    match kind {
        HETMETA_KIND_MEAN => Ok(EffectSizeKind::Mean),
        HETMETA_KIND_MD => Ok(EffectSizeKind::MeanDifference),
        HETMETA_KIND_SMD => Ok(EffectSizeKind::StandardizedMeanDifference),
        _ => Err(invalid(&format!("unknown kind {kind}"))),
    }
}

fn method_of(method: u32) -> Result<SmdMethod, Fail> {
    match method {
        HETMETA_SMD_HEDGES => Ok(SmdMethod::HedgesG),
        HETMETA_SMD_COHEN => Ok(SmdMethod::CohensD),
        _ => Err(invalid(&format!("unknown SMD method {method}"))),
    }
}

fn kind_code(kind: EffectSizeKind) -> u32 {
    match kind {
        EffectSizeKind::Mean => HETMETA_KIND_MEAN,
        EffectSizeKind::MeanDifference => HETMETA_KIND_MD,
        EffectSizeKind::StandardizedMeanDifference => HETMETA_KIND_SMD,
    }
}

fn publish<T>(out: &mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hetmeta_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last error on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn hetmeta_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |e| e.message.as_ptr())
    })
}

/// Stable code (for example `model.invalid_variance`) of the last error on
/// this thread, or null.
#[no_mangle]
pub extern "C" fn hetmeta_last_error_code() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |e| e.code.as_ptr())
    })
}

/// Builds a dataset of means from `k` studies.
///
/// # Safety
/// The arrays must hold `k` values each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_dataset_new_mean(
    y: *const f64,
    var_y: *const f64,
    n: *const u32,
    k: usize,
    out: *mut *mut HetmetaDataset,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let y = unsafe { slice(y, k, "y") }?;
        let var_y = unsafe { slice(var_y, k, "var_y") }?;
        let n = unsafe { slice(n, k, "n") }?;
        let studies = (0..k)
            .map(|i| OneArmStudy {
                y: y[i],
                var_y: var_y[i],
                n: n[i],
            })
            .collect::<Vec<_>>();
        publish(out, HetmetaDataset(MetaDataset::from_one_arm(&studies)?));
        Ok(())
    })
}

/// Builds an MD or SMD dataset from `k` two-arm summaries.
///
/// # Safety
/// The arrays must hold `k` values each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_dataset_new_two_arm(
    y_t: *const f64,
    se_t: *const f64,
    n_t: *const u32,
    y_c: *const f64,
    se_c: *const f64,
    n_c: *const u32,
    k: usize,
    kind: u32,
    smd_method: u32,
    out: *mut *mut HetmetaDataset,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let kind = kind_of(kind)?;
        if kind == EffectSizeKind::Mean {
            return Err(invalid("two-arm data needs kind MD or SMD"));
        }
        let method = method_of(smd_method)?;
        let (y_t, se_t, n_t) = unsafe {
            (slice(y_t, k, "y_t")?, slice(se_t, k, "se_t")?, slice(n_t, k, "n_t")?)
        };
        let (y_c, se_c, n_c) = unsafe {
            (slice(y_c, k, "y_c")?, slice(se_c, k, "se_c")?, slice(n_c, k, "n_c")?)
        };
        let arms = (0..k)
            .map(|i| {
                TwoArmStudy::new(y_t[i], se_t[i], n_t[i], y_c[i], se_c[i], n_c[i])
                    .map_err(|e| Error::Row {
                        row: i + 1,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        publish(out, HetmetaDataset(effects::two_arm_dataset(&arms, kind, method)?));
        Ok(())
    })
}

/// Reads a CSV file in the one-arm (`kind` mean) or two-arm layout.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_dataset_from_csv(
    path: *const c_char,
    kind: u32,
    smd_method: u32,
    out: *mut *mut HetmetaDataset,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let path = unsafe { str_arg(path, "path") }?;
        let kind = kind_of(kind)?;
        let method = method_of(smd_method)?;
        let bytes = InputFile::load(Path::new(path))?.bytes;
        let ds = match kind {
            EffectSizeKind::Mean => cli_io::read_one_arm(&bytes)?.dataset()?,
            _ => effects::two_arm_dataset(&cli_io::read_two_arm(&bytes)?.studies, kind, method)?,
        };
        publish(out, HetmetaDataset(ds));
        Ok(())
    })
}

/// Number of studies, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_dataset_k(ds: *const HetmetaDataset) -> usize {
    // SAFETY: see above.
    unsafe { ds.as_ref() }.map_or(0, |d| d.0.k())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_dataset_free(ds: *mut HetmetaDataset) {
    if !ds.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(ds) });
    }
}

/// Computes every statistic of the dataset.
///
/// # Safety
/// `ds` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_panel(
    ds: *const HetmetaDataset,
    out: *mut HetmetaPanel,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let ds = unsafe { ds.as_ref() }.ok_or_else(|| null("ds"))?;
        let p = model::full_panel(&ds.0)?;
        *out = HetmetaPanel {
            kind: kind_code(p.kind),
            k: p.k,
            sum_w: p.sum_w,
            sum_w2: p.sum_w2,
            sum_wy: p.sum_wy,
            weighted_mean: p.weighted_mean,
            q: p.q,
            tau2_dl_raw: p.tau2_dl_raw,
            tau2_dl: p.tau2_dl,
            sigma_tilde2: p.sigma_tilde2,
            n_tilde: p.n_tilde,
            adjustment: p.adjustment.value(),
            adjustment_is_weight: c_int::from(matches!(p.adjustment, Adjustment::Weight(_))),
            i2_raw: p.i2_raw.unwrap_or(f64::NAN),
            i2: p.i2,
            i2_a_raw: p.i2_a_raw.unwrap_or(f64::NAN),
            i2_a: p.i2_a,
            size_weighted_mean: p.size_weighted_mean,
            msb: p.msb,
            msw: p.msw,
            i2_anova_raw: p.i2_anova_raw,
            i2_anova: p.i2_anova,
        };
        Ok(())
    })
}

/// Full JSON report of the dataset, labelled with `source`. Free the result
/// with [`hetmeta_string_free`].
///
/// # Safety
/// `ds` must be a live handle, `source` null or nul-terminated, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_report_json(
    ds: *const HetmetaDataset,
    source: *const c_char,
    out: *mut *mut c_char,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let ds = unsafe { ds.as_ref() }.ok_or_else(|| null("ds"))?;
        let source = if source.is_null() {
            "ffi"
        } else {
            unsafe { str_arg(source, "source") }?
        };
        let input = InputFile {
            source: source.to_string(),
            bytes: Vec::new(),
        };
        let method = (ds.0.kind() == EffectSizeKind::StandardizedMeanDifference).then_some(SmdMethod::HedgesG);
        let doc = ReportDocument::new(&input, &[], &ds.0, method)?;
        *out = cstring(&doc.to_json()).into_raw();
        Ok(())
    })
}

fn scalar(out: *mut f64, f: impl FnOnce() -> hetmeta::Result<f64>) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        *out = f()?;
        Ok(())
    })
}

/// `max{(Q - (k - 1)) / Q, 0}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_i_squared(q: f64, k: usize, out: *mut f64) -> HetmetaStatus {
    scalar(out, || model::i_squared(q, k))
}

/// I²_A from Q and the adjusted mean size (n~, or w~ for SMD).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_i_squared_a(q: f64, k: usize, n_tilde: f64, out: *mut f64) -> HetmetaStatus {
    scalar(out, || model::i_squared_a(q, k, n_tilde))
}

/// `max{(MSB - MSW) / (MSB + (n~ - 1) MSW), 0}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_i_squared_anova(msb: f64, msw: f64, n_tilde: f64, out: *mut f64) -> HetmetaStatus {
    scalar(out, || model::i_squared_anova(msb, msw, n_tilde))
}

/// `tau2 / (tau2 + sigma_y2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_icc_ht(tau2: f64, sigma_y2: f64, out: *mut f64) -> HetmetaStatus {
    scalar(out, || model::icc_ht(tau2, sigma_y2))
}

/// `tau2 / (tau2 + sigma2_pop)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_icc_ma(tau2: f64, sigma2_pop: f64, out: *mut f64) -> HetmetaStatus {
    scalar(out, || model::icc_ma(tau2, sigma2_pop))
}

/// Adjusted mean of `k` sizes (or weights).
///
/// # Safety
/// `n` must hold `k` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_adjusted_mean_n(
    n: *const f64,
    k: usize,
    out: *mut f64,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let n = unsafe { slice(n, k, "n") }?;
        *out = model::adjusted_mean_n(n)?;
        Ok(())
    })
}

/// Runs the Monte Carlo scenario given as TOML text on `threads` workers
/// (0 uses the default pool).
///
/// # Safety
/// `config_toml` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_simulate(
    config_toml: *const c_char,
    threads: usize,
    out: *mut *mut HetmetaSimResult,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let config = SimConfig::from_toml_str(unsafe { str_arg(config_toml, "config_toml") }?)?;
        let threads = (threads > 0).then_some(threads);
        let results = sim::with_threads(threads, || sim::run_monte_carlo(&config))??;
        publish(out, HetmetaSimResult(results));
        Ok(())
    })
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_sim_result_len(r: *const HetmetaSimResult) -> usize {
    // SAFETY: see above.
    unsafe { r.as_ref() }.map_or(0, |r| r.0.len())
}

/// Boxplot summary of `statistic` at grid point `index`.
///
/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_sim_result_summary(
    r: *const HetmetaSimResult,
    index: usize,
    statistic: u32,
    out: *mut HetmetaBoxSummary,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let r = unsafe { r.as_ref() }.ok_or_else(|| null("r"))?;
        let point = r
            .0
            .get(index)
            .ok_or_else(|| invalid(&format!("grid index {index} out of range")))?;
        let stat = match statistic {
            HETMETA_STAT_I2 => Statistic::I2,
            HETMETA_STAT_I2_A => Statistic::I2A,
            HETMETA_STAT_I2_ANOVA => Statistic::I2Anova,
            _ => return Err(invalid(&format!("unknown statistic {statistic}"))),
        };
        let s: &BoxSummary = point.summaries.get(stat);
        *out = HetmetaBoxSummary {
            n_base: point.n_base,
            count: s.count,
            mean: s.mean,
            min: s.min,
            q1: s.q1,
            median: s.median,
            q3: s.q3,
            max: s.max,
            lo_whisker: s.lo_whisker,
            hi_whisker: s.hi_whisker,
            icc_ma_true: point.icc_ma_true,
        };
        Ok(())
    })
}

/// Summary CSV as written by `hetmeta simulate`. Free the result with
/// [`hetmeta_string_free`].
///
/// # Safety
/// `r` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_sim_result_csv(
    r: *const HetmetaSimResult,
    out: *mut *mut c_char,
) -> HetmetaStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let r = unsafe { r.as_ref() }.ok_or_else(|| null("r"))?;
        *out = cstring(&cli_io::simulation_csv(&r.0)).into_raw();
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_sim_result_free(r: *mut HetmetaSimResult) {
    if !r.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(r) });
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hetmeta_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: created by CString::into_raw in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}
