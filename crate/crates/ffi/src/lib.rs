//! C interface to the herdsim engine.
//!
//! A `HerdSession` owns a validated configuration. Functions return a
//! `HerdStatus`; on failure `herd_last_error` describes the problem for the
//! calling thread. Strings handed out by the library are released with
//! `herd_string_free`.
//!
//! Every pointer argument must be null or valid for the access implied by its
//! type, and strings must be NUL-terminated. Nullable inputs are noted; any
//! other null pointer yields `HERD_STATUS_NULL_POINTER`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use herdsim::analysis::enumerate::probability;
use herdsim::analysis::{check_conditions, discounted_correct, monte_carlo, AnalysisError, EventSpec};
use herdsim::config::{bundled, ConfigError, RunConfig};
use herdsim::decision::CongestionSpec;
use herdsim::equilibrium::Game;
use herdsim::numeric::{format_rational, parse_rational, to_f64, Rational};
use herdsim::signal_model::{parse_history, SignalModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HerdStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidUtf8 = -2,
    ParseError = -3,
    ConstraintViolation = -4,
    HorizonError = -5,
    InvalidArgument = -6,
    Internal = -255,
}

/// Opaque handle to a loaded configuration.
pub struct HerdSession {
    config: RunConfig,
    model: SignalModel,
    spec: CongestionSpec,
}

/// Monte Carlo estimate with a 95% Wilson interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HerdMonteCarlo {
    pub runs: u64,
    pub hits: u64,
    pub frequency: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(HerdStatus, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let status = match e {
            ConfigError::Io { .. } | ConfigError::Parse(_) => HerdStatus::ParseError,
            _ => HerdStatus::ConstraintViolation,
        };
        Failure(status, e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let status = match e {
            AnalysisError::HorizonTooSmall { .. } | AnalysisError::HorizonCap { .. } => HerdStatus::HorizonError,
            AnalysisError::Model(_) | AnalysisError::Decision(_) => HerdStatus::ConstraintViolation,
            _ => HerdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HerdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HerdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            HerdStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(HerdStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(HerdStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(s: *const HerdSession) -> Result<&'a HerdSession, Failure> {
    s.as_ref().ok_or_else(|| Failure(HerdStatus::NullPointer, "session is null".into()))
}

fn out_ptr<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(HerdStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn event(s: &str) -> Result<EventSpec, Failure> {
    s.parse().map_err(|e: String| Failure(HerdStatus::InvalidArgument, e))
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

impl HerdSession {
    fn from_config(config: RunConfig) -> Result<Self, Failure> {
        Ok(HerdSession { model: config.model()?, spec: config.spec()?, config })
    }

    fn horizon(&self, requested: usize) -> usize {
        if requested == 0 {
            self.config.horizon()
        } else {
            requested
        }
    }

    fn game(&self) -> Game<'_, Rational> {
        Game::new(&self.model, &self.spec, self.config.run.tiebreak)
    }
}

/// Loads a session from TOML text. On success `*out` receives a handle to
/// release with `herd_session_free`.
#[no_mangle]
pub unsafe extern "C" fn herd_session_new(toml: *const c_char, out: *mut *mut HerdSession) -> HerdStatus {
    guard(|| {
        out_ptr(out)?;
        *out = ptr::null_mut();
        let config = RunConfig::from_toml_str(text(toml, "config")?)?;
        *out = Box::into_raw(Box::new(HerdSession::from_config(config)?));
        Ok(())
    })
}

/// Loads one of the configs shipped with the library, such as `example1a`.
#[no_mangle]
pub unsafe extern "C" fn herd_session_bundled(name: *const c_char, out: *mut *mut HerdSession) -> HerdStatus {
    guard(|| {
        out_ptr(out)?;
        *out = ptr::null_mut();
        let name = text(name, "name")?;
        let config = bundled(name)
            .ok_or_else(|| Failure(HerdStatus::InvalidArgument, format!("no bundled config `{name}`")))?;
        *out = Box::into_raw(Box::new(HerdSession::from_config(config)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn herd_session_free(session: *mut HerdSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Horizon the session uses when a call passes 0.
#[no_mangle]
pub unsafe extern "C" fn herd_session_horizon(session: *const HerdSession) -> usize {
    session.as_ref().map_or(0, |s| s.config.horizon())
}

/// Exact probability of `event`, optionally conditioned on `condition`
/// (may be null). `out_exact`, if not null, receives the fraction as text.
#[no_mangle]
pub unsafe extern "C" fn herd_exact_probability(
    session: *const HerdSession,
    event_text: *const c_char,
    condition_text: *const c_char,
    horizon: usize,
    out_value: *mut f64,
    out_exact: *mut *mut c_char,
) -> HerdStatus {
    guard(|| {
        let s = handle(session)?;
        out_ptr(out_value)?;
        let e = event(text(event_text, "event")?)?;
        let c = if condition_text.is_null() { None } else { Some(event(text(condition_text, "condition")?)?) };
        let p = probability(&s.game(), s.horizon(horizon), &e, c.as_ref())?;
        *out_value = to_f64(&p);
        if !out_exact.is_null() {
            *out_exact = into_c(format_rational(&p));
        }
        Ok(())
    })
}

/// Condition report as JSON.
#[no_mangle]
pub unsafe extern "C" fn herd_check_conditions_json(
    session: *const HerdSession,
    horizon: usize,
    out: *mut *mut c_char,
) -> HerdStatus {
    guard(|| {
        let s = handle(session)?;
        out_ptr(out)?;
        let report = check_conditions(&s.model, s.spec.k(), s.horizon(horizon), s.config.run.numeric)?;
        *out = into_c(serde_json::to_string(&report).map_err(|e| Failure(HerdStatus::Internal, e.to_string()))?);
        Ok(())
    })
}

/// Per-period beliefs and strategies along `history` (e.g. `"LRR"`) as JSON.
#[no_mangle]
pub unsafe extern "C" fn herd_trace_json(
    session: *const HerdSession,
    history: *const c_char,
    out: *mut *mut c_char,
) -> HerdStatus {
    guard(|| {
        let s = handle(session)?;
        out_ptr(out)?;
        let h = parse_history(text(history, "history")?)
            .map_err(|c| Failure(HerdStatus::InvalidArgument, format!("invalid action `{c}`")))?;
        let rows = s.game().trace(&h);
        *out = into_c(serde_json::to_string(&rows).map_err(|e| Failure(HerdStatus::Internal, e.to_string()))?);
        Ok(())
    })
}

/// Simulated frequency of `event` over `runs` independent plays.
#[no_mangle]
pub unsafe extern "C" fn herd_monte_carlo(
    session: *const HerdSession,
    event_text: *const c_char,
    horizon: usize,
    runs: u64,
    seed: u64,
    out: *mut HerdMonteCarlo,
) -> HerdStatus {
    guard(|| {
        let s = handle(session)?;
        out_ptr(out)?;
        let e = event(text(event_text, "event")?)?;
        let r = monte_carlo(&s.game(), s.horizon(horizon), &e, runs, seed)?;
        *out = HerdMonteCarlo {
            runs: r.runs,
            hits: r.hits,
            frequency: r.frequency,
            std_error: r.std_error,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
        };
        Ok(())
    })
}

/// Discounted expected share of correct actions, `delta` given as text
/// such as `"9/10"`.
#[no_mangle]
pub unsafe extern "C" fn herd_discounted_correct(
    session: *const HerdSession,
    delta: *const c_char,
    horizon: usize,
    out_value: *mut f64,
) -> HerdStatus {
    guard(|| {
        let s = handle(session)?;
        out_ptr(out_value)?;
        let d = parse_rational(text(delta, "delta")?).map_err(|e| Failure(HerdStatus::InvalidArgument, e.to_string()))?;
        *out_value = discounted_correct(&s.game(), s.horizon(horizon), &d)?.float;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn herd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn herd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn herd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
