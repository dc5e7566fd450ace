//! C ABI for the kelsim simulator and theory functions.
//!
//! Conventions:
//! * every fallible call returns a [`KelsimStatus`]; results go through
//!   out-pointers,
//! * configurations and run outcomes are opaque heap handles released with
//!   their matching `*_free` function,
//! * the message of the last failure on the calling thread is available
//!   from [`kelsim_last_error_message`].
//!
//! The header `include/kelsim.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use kelsim::harness::{emit_timeseries, parse_config, run_sweep, SimConfig, SweepSpec};
use kelsim::integrator::{run, RunOutcome, Verdict};
use kelsim::model::ModelParams;
use kelsim::theory::{self, CriticalExponent, RegimeStatus, TheoremCase};
use kelsim::KelsimError;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KelsimStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Numeric = 3,
    Domain = 4,
    Precondition = 5,
    Degenerate = 6,
    Consistency = 7,
    Evaluation = 8,
    Io = 9,
    InvalidUtf8 = 10,
    OutOfRange = 11,
    Panic = 12,
}

/// Verdict codes reported by [`kelsim_outcome_verdict`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KelsimVerdict {
    CompletedBounded = 0,
    NumericalBlowup = 1,
    Aborted = 2,
}

/// Regime codes reported by [`kelsim_classify_regime`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KelsimRegime {
    NotCovered = 0,
    BoundedCaseI = 1,
    BoundedCaseII = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KelsimModelParams {
    pub dim: u32,
    pub chi: f64,
    pub mu: f64,
    pub c_d: f64,
    pub m_exp: f64,
    pub lambda0: f64,
    pub c_gn: f64,
}

impl From<KelsimModelParams> for ModelParams {
    fn from(p: KelsimModelParams) -> Self {
        ModelParams {
            dim: p.dim as usize,
            chi: p.chi,
            mu: p.mu,
            c_d: p.c_d,
            m_exp: p.m_exp,
            lambda0: p.lambda0,
            c_gn: p.c_gn,
        }
    }
}

impl From<ModelParams> for KelsimModelParams {
    fn from(p: ModelParams) -> Self {
        KelsimModelParams {
            dim: p.dim as u32,
            chi: p.chi,
            mu: p.mu,
            c_d: p.c_d,
            m_exp: p.m_exp,
            lambda0: p.lambda0,
            c_gn: p.c_gn,
        }
    }
}

/// Scalar diagnostics of one trajectory sample.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KelsimRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub linf_u: f64,
    pub min_u: f64,
    pub l2_u: f64,
    pub l2_v: f64,
}

/// Opaque parsed configuration.
pub struct KelsimConfig {
    inner: SimConfig,
}

/// Opaque simulation result.
pub struct KelsimOutcome {
    inner: RunOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &KelsimError) -> KelsimStatus {
    match err {
        KelsimError::Config(_) | KelsimError::ConfigLine { .. } => KelsimStatus::Config,
        KelsimError::Numeric(_) | KelsimError::StateCorruption(_) => KelsimStatus::Numeric,
        KelsimError::Domain(_) => KelsimStatus::Domain,
        KelsimError::Precondition(_) => KelsimStatus::Precondition,
        KelsimError::Degenerate(_) => KelsimStatus::Degenerate,
        KelsimError::Consistency(_) => KelsimStatus::Consistency,
        KelsimError::Evaluation(_) => KelsimStatus::Evaluation,
        KelsimError::Io { .. } => KelsimStatus::Io,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), KelsimStatus>) -> KelsimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => KelsimStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside kelsim".into());
            KelsimStatus::Panic
        }
    }
}

fn fail(err: KelsimError) -> KelsimStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null_check<T>(p: *const T, name: &str) -> Result<(), KelsimStatus> {
    if p.is_null() {
        set_error(format!("{name} is NULL"));
        Err(KelsimStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, KelsimStatus> {
    null_check(p, name)?;
    CStr::from_ptr(p).to_str().map_err(|e| {
        set_error(format!("{name} is not UTF-8: {e}"));
        KelsimStatus::InvalidUtf8
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kelsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Fills `out` with the library defaults.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kelsim_default_params(out: *mut KelsimModelParams) -> KelsimStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = ModelParams::default().into();
        Ok(())
    })
}

/// Critical exponent. `*unconstrained` is set when every `m` qualifies, in
/// which case `*out` is negative infinity.
///
/// # Safety
/// All pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_critical_exponent(
    params: *const KelsimModelParams,
    out: *mut f64,
    unconstrained: *mut bool,
) -> KelsimStatus {
    guard(|| {
        null_check(params, "params")?;
        null_check(out, "out")?;
        null_check(unconstrained, "unconstrained")?;
        let p: ModelParams = (*params).into();
        p.validate().map_err(fail)?;
        match theory::critical_exponent(&p) {
            CriticalExponent::Finite(v) => {
                *out = v;
                *unconstrained = false;
            }
            CriticalExponent::Unconstrained => {
                *out = f64::NEG_INFINITY;
                *unconstrained = true;
            }
        }
        Ok(())
    })
}

/// Diffusion-constant threshold for the borderline exponent.
///
/// # Safety
/// All pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_cd_threshold(
    params: *const KelsimModelParams,
    u0_l1: f64,
    out: *mut f64,
) -> KelsimStatus {
    guard(|| {
        null_check(params, "params")?;
        null_check(out, "out")?;
        *out = theory::cd_threshold(&(*params).into(), u0_l1).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// All pointers must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_classify_regime(
    params: *const KelsimModelParams,
    u0_l1: f64,
    out: *mut KelsimRegime,
) -> KelsimStatus {
    guard(|| {
        null_check(params, "params")?;
        null_check(out, "out")?;
        let p: ModelParams = (*params).into();
        p.validate().map_err(fail)?;
        *out = match theory::classify_regime(&p, u0_l1).status {
            RegimeStatus::TheoremBounded(TheoremCase::I) => KelsimRegime::BoundedCaseI,
            RegimeStatus::TheoremBounded(TheoremCase::II) => KelsimRegime::BoundedCaseII,
            RegimeStatus::NotCovered => KelsimRegime::NotCovered,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kelsim_b1_constant(p: f64, out: *mut f64) -> KelsimStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = theory::b1_constant(p).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// Output pointers must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kelsim_lemma_min(
    p: f64,
    chi: f64,
    lambda0: f64,
    minimizer: *mut f64,
    minimum: *mut f64,
) -> KelsimStatus {
    guard(|| {
        null_check(minimizer, "minimizer")?;
        null_check(minimum, "minimum")?;
        let r = theory::lemma_min(p, chi, lambda0).map_err(fail)?;
        *minimizer = r.minimizer;
        *minimum = r.minimum;
        Ok(())
    })
}

/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kelsim_h_function(
    p: f64,
    c_d: f64,
    c_gn: f64,
    u0_l1: f64,
    dim: u32,
    lambda0: f64,
    chi: f64,
    out: *mut f64,
) -> KelsimStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = theory::h_function(p, c_d, c_gn, u0_l1, dim as usize, lambda0, chi).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kelsim_find_p0(
    c_d: f64,
    c_gn: f64,
    u0_l1: f64,
    dim: u32,
    lambda0: f64,
    chi: f64,
    out: *mut f64,
) -> KelsimStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = theory::find_p0(c_d, c_gn, u0_l1, dim as usize, lambda0, chi).map_err(fail)?;
        Ok(())
    })
}

/// Parses a `key = value` configuration. On success `*out` owns a handle
/// to release with [`kelsim_config_free`].
///
/// # Safety
/// `text` must be NULL or a NUL-terminated string; `out` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_config_parse(text: *const c_char, out: *mut *mut KelsimConfig) -> KelsimStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = ptr::null_mut();
        let text = read_str(text, "text")?;
        let inner = parse_config(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(KelsimConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle from [`kelsim_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kelsim_config_free(config: *mut KelsimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle; `out` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_config_params(config: *const KelsimConfig, out: *mut KelsimModelParams) -> KelsimStatus {
    guard(|| {
        null_check(config, "config")?;
        null_check(out, "out")?;
        *out = (*config).inner.params.into();
        Ok(())
    })
}

/// Runs the configured simulation. The returned outcome handle must be
/// released with [`kelsim_outcome_free`].
///
/// # Safety
/// `config` must be a live handle; `out` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_simulate(config: *const KelsimConfig, out: *mut *mut KelsimOutcome) -> KelsimStatus {
    guard(|| {
        null_check(config, "config")?;
        null_check(out, "out")?;
        *out = ptr::null_mut();
        let cfg = &(*config).inner;
        let state = cfg.initial_state().map_err(fail)?;
        let inner = run(&state, &cfg.params, &cfg.grid, &cfg.control, cfg.record_every).map_err(fail)?;
        *out = Box::into_raw(Box::new(KelsimOutcome { inner }));
        Ok(())
    })
}

/// # Safety
/// `outcome` must be NULL or a handle from [`kelsim_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kelsim_outcome_free(outcome: *mut KelsimOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Verdict of a run; `*t_detect` is the detection time for blow-up and the
/// final time otherwise.
///
/// # Safety
/// `outcome` must be a live handle; other pointers NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_outcome_verdict(
    outcome: *const KelsimOutcome,
    verdict: *mut KelsimVerdict,
    t_detect: *mut f64,
) -> KelsimStatus {
    guard(|| {
        null_check(outcome, "outcome")?;
        null_check(verdict, "verdict")?;
        null_check(t_detect, "t_detect")?;
        let o = &(*outcome).inner;
        match &o.verdict {
            Verdict::CompletedBounded => {
                *verdict = KelsimVerdict::CompletedBounded;
                *t_detect = o.final_state.t;
            }
            Verdict::NumericalBlowup { t_detect: t } => {
                *verdict = KelsimVerdict::NumericalBlowup;
                *t_detect = *t;
            }
            Verdict::Aborted { reason } => {
                set_error(reason.clone());
                *verdict = KelsimVerdict::Aborted;
                *t_detect = o.final_state.t;
            }
        }
        Ok(())
    })
}

/// Number of diagnostics records, or 0 for a NULL handle.
///
/// # Safety
/// `outcome` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kelsim_outcome_record_count(outcome: *const KelsimOutcome) -> usize {
    if outcome.is_null() {
        0
    } else {
        (*outcome).inner.records.len()
    }
}

/// # Safety
/// `outcome` must be a live handle; `out` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_outcome_record(
    outcome: *const KelsimOutcome,
    index: usize,
    out: *mut KelsimRecord,
) -> KelsimStatus {
    guard(|| {
        null_check(outcome, "outcome")?;
        null_check(out, "out")?;
        let recs = &(*outcome).inner.records;
        let r = recs.get(index).ok_or_else(|| {
            set_error(format!("record {index} out of range ({} records)", recs.len()));
            KelsimStatus::OutOfRange
        })?;
        *out = KelsimRecord {
            t: r.t,
            dt: r.dt,
            mass: r.mass,
            linf_u: r.linf_u,
            min_u: r.min_u,
            l2_u: r.l2_u,
            l2_v: r.l2_v,
        };
        Ok(())
    })
}

/// Copies the final density into `buf` (capacity `len`); `*written`
/// receives the cell count. Fails with `OutOfRange` if `len` is too small.
///
/// # Safety
/// `buf` must be valid for `len` writes; other pointers NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_outcome_final_u(
    outcome: *const KelsimOutcome,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> KelsimStatus {
    guard(|| {
        null_check(outcome, "outcome")?;
        null_check(written, "written")?;
        let vals = (*outcome).inner.final_state.u.values();
        *written = vals.len();
        if len < vals.len() {
            set_error(format!("buffer holds {len} values, need {}", vals.len()));
            return Err(KelsimStatus::OutOfRange);
        }
        null_check(buf, "buf")?;
        ptr::copy_nonoverlapping(vals.as_ptr(), buf, vals.len());
        Ok(())
    })
}

/// Writes the time-series CSV of a run.
///
/// # Safety
/// `outcome` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn kelsim_outcome_write_timeseries(outcome: *const KelsimOutcome, path: *const c_char) -> KelsimStatus {
    guard(|| {
        null_check(outcome, "outcome")?;
        let path = read_str(path, "path")?;
        emit_timeseries(&(*outcome).inner, Path::new(path)).map_err(fail)
    })
}

/// Runs the configured sweep, writes the phase CSV to `csv_path` and
/// reports the number of cells where theory and simulation disagree.
///
/// # Safety
/// `config` must be a live handle; `csv_path` a NUL-terminated string;
/// `disagreements` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn kelsim_sweep(
    config: *const KelsimConfig,
    csv_path: *const c_char,
    disagreements: *mut usize,
) -> KelsimStatus {
    guard(|| {
        null_check(config, "config")?;
        null_check(disagreements, "disagreements")?;
        let path = read_str(csv_path, "csv_path")?;
        let report = run_sweep(&SweepSpec::from_config(&(*config).inner)).map_err(fail)?;
        report.write_csv(Path::new(path)).map_err(fail)?;
        *disagreements = report.disagreements().count();
        Ok(())
    })
}
