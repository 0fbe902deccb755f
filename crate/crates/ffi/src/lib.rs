//! C ABI over `schwarzschild-le`.
//!
//! Every entry point returns an [`SleStatus`]; results go through out
//! pointers. Profiles are opaque handles owned by the caller and released
//! with [`sle_profile_free`]. Strings handed out by the library are released
//! with [`sle_string_free`]. The message of the last failure on the calling
//! thread is available from [`sle_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use schwarzschild_le::report::{execute, parse_config, Mode};
use schwarzschild_le::verifier::{verify_case, CaseId, ScanGrid};
use schwarzschild_le::{BackgroundParams, Error, MultiplierParams, MultiplierProfile};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SleStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Config = 3,
    Domain = 4,
    Instability = 5,
    CheckFailed = 6,
    Utf8 = 7,
    Panic = 8,
    Other = 9,
}

/// Scans that can be run through [`sle_verify_case`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SleCase {
    Case1 = 0,
    Case2,
    Case3N1,
    Case3N2,
    Case3N3,
    Case3Q,
    Case3S,
    Case3Fprime,
    Fprime,
    Case4Fprime,
    Case4Lf,
    SignF,
    Budget,
}

const CASES: [SleCase; 13] = [
    SleCase::Case1,
    SleCase::Case2,
    SleCase::Case3N1,
    SleCase::Case3N2,
    SleCase::Case3N3,
    SleCase::Case3Q,
    SleCase::Case3S,
    SleCase::Case3Fprime,
    SleCase::Fprime,
    SleCase::Case4Fprime,
    SleCase::Case4Lf,
    SleCase::SignF,
    SleCase::Budget,
];

impl From<SleCase> for CaseId {
    fn from(c: SleCase) -> Self {
        match c {
            SleCase::Case1 => CaseId::Case1,
            SleCase::Case2 => CaseId::Case2,
            SleCase::Case3N1 => CaseId::Case3N1,
            SleCase::Case3N2 => CaseId::Case3N2,
            SleCase::Case3N3 => CaseId::Case3N3,
            SleCase::Case3Q => CaseId::Case3Q,
            SleCase::Case3S => CaseId::Case3S,
            SleCase::Case3Fprime => CaseId::Case3Fprime,
            SleCase::Fprime => CaseId::Fprime,
            SleCase::Case4Fprime => CaseId::Case4Fprime,
            SleCase::Case4Lf => CaseId::Case4Lf,
            SleCase::SignF => CaseId::SignF,
            SleCase::Budget => CaseId::Budget,
        }
    }
}

/// Opaque multiplier profile.
pub struct SleProfile(MultiplierProfile);

/// Verdict of one scan.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SleVerdict {
    pub passed: bool,
    pub min_margin: f64,
    pub witness_r: f64,
    pub grid_size: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SleStatus {
    match e {
        Error::InvalidParameter { .. } | Error::InvalidOrder(_) | Error::SideRequired(_) => SleStatus::InvalidParameter,
        Error::Config(_) | Error::Cfl { .. } => SleStatus::Config,
        Error::Domain(_) | Error::HorizonProximity(_) => SleStatus::Domain,
        Error::Instability { .. } => SleStatus::Instability,
        _ => SleStatus::Other,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SleStatus>) -> SleStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SleStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            SleStatus::Panic
        }
    }
}

fn lift<T>(r: schwarzschild_le::Result<T>) -> Result<T, SleStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T) -> Result<(), SleStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        Err(SleStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SleStatus> {
    non_null(s)?;
    CStr::from_ptr(s).to_str().map_err(|e| {
        set_error(&e.to_string());
        SleStatus::Utf8
    })
}

/// Message of the last failure on this thread. Valid until the next failing
/// call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn sle_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a profile. Pass NaN for `alpha` to use its default.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn sle_profile_new(
    d: i64,
    r_s: f64,
    eps: f64,
    delta: f64,
    delta0: f64,
    alpha: f64,
    out: *mut *mut SleProfile,
) -> SleStatus {
    guard(|| {
        non_null(out)?;
        let bg = lift(BackgroundParams::new(d, r_s))?;
        let mut mp = lift(MultiplierParams::new(eps, delta, delta0))?;
        if !alpha.is_nan() {
            mp = lift(mp.with_alpha(alpha))?;
        }
        *out = Box::into_raw(Box::new(SleProfile(MultiplierProfile::new(bg, mp))));
        Ok(())
    })
}

/// # Safety
/// `p` must come from [`sle_profile_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sle_profile_free(p: *mut SleProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `f`, `f'` and `l(f)` at radius `r`. Any output pointer may be null.
///
/// # Safety
/// `p` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sle_profile_eval(
    p: *const SleProfile,
    r: f64,
    f: *mut f64,
    f_prime: *mut f64,
    l_f: *mut f64,
) -> SleStatus {
    guard(|| {
        non_null(p)?;
        let prof = &(*p).0;
        let vals = (lift(prof.f_eval(r))?, lift(prof.f_prime(r))?, lift(prof.l_f_closed(r, None))?);
        for (dst, v) in [(f, vals.0), (f_prime, vals.1), (l_f, vals.2)] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        Ok(())
    })
}

/// Runs one scan with `points` per region; `case_id` is an `SleCase` value.
/// A scan that completes but fails still returns `SLE_STATUS_OK`; check
/// `out->passed`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sle_verify_case(
    p: *const SleProfile,
    case_id: i32,
    points: usize,
    out: *mut SleVerdict,
) -> SleStatus {
    guard(|| {
        non_null(p)?;
        non_null(out)?;
        let Some(&case) = usize::try_from(case_id).ok().and_then(|i| CASES.get(i)) else {
            set_error(&format!("unknown case id {case_id}"));
            return Err(SleStatus::InvalidParameter);
        };
        let rep = lift(verify_case(case.into(), &(*p).0, &ScanGrid::with_points(points)))?;
        let v = rep.verdict;
        *out =
            SleVerdict { passed: v.passed, min_margin: v.min_margin, witness_r: v.witness_r, grid_size: v.grid_size };
        Ok(())
    })
}

/// Runs a TOML configuration in memory and returns the JSON summary in
/// `json_out` (free with [`sle_string_free`]). `mode` may be null to use the
/// mode named in the configuration. Returns `SLE_STATUS_CHECK_FAILED` with the
/// summary still set when some check fails. Nothing is written to disk.
///
/// # Safety
/// `config` must be a NUL-terminated string, `mode` null or NUL-terminated,
/// and `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn sle_run(config: *const c_char, mode: *const c_char, json_out: *mut *mut c_char) -> SleStatus {
    guard(|| {
        non_null(json_out)?;
        *json_out = ptr::null_mut();
        let cfg = lift(parse_config(read_str(config)?))?;
        let mode = if mode.is_null() {
            cfg.mode
        } else {
            let name = read_str(mode)?;
            Some(lift(Mode::from_name(name))?)
        };
        let Some(mode) = mode else {
            set_error("no mode given");
            return Err(SleStatus::Config);
        };
        let summary = lift(execute(mode, &cfg))?.summary;
        let passed = summary.passed;
        *json_out = CString::new(summary.to_json()).map_err(|_| SleStatus::Other)?.into_raw();
        if passed {
            Ok(())
        } else {
            set_error("one or more checks failed");
            Err(SleStatus::CheckFailed)
        }
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sle_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
