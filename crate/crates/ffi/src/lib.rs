//! C ABI over `pf_forge`.
//!
//! Sequences cross the boundary as opaque `PfSeq` handles; rationals and
//! structured results cross as NUL-terminated strings (`"p/q"` and JSON).
//! Every function returns a [`PfStatus`]. On an error the code and message
//! are kept per thread and read back with [`pf_last_error_code`] and
//! [`pf_last_error_message`]. Strings handed out by this library are owned
//! by the caller and released with [`pf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pf_forge::constructors::{self, CertMode};
use pf_forge::deflation;
use pf_forge::domain::{self, ComposeOptions, DomainSpec};
use pf_forge::pf_check::{self, ScanOptions};
use pf_forge::rational::parse_rational;
use pf_forge::{CoeffSeq, PfError};

/// Opaque coefficient sequence.
pub struct PfSeq {
    inner: CoeffSeq,
}

#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    /// Success; for checks, the sequence passed.
    PF_OK = 0,
    /// A check failed; the verdict carries a witness.
    PF_FAIL = 1,
    /// A required pointer was null.
    PF_ERR_NULL = 2,
    /// An input string was not valid UTF-8.
    PF_ERR_UTF8 = 3,
    /// The library rejected the input; see the last error.
    PF_ERR_INVALID = 4,
    /// A panic was caught at the boundary.
    PF_ERR_PANIC = 5,
}

#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfMode {
    PF_MODE_CERTIFIED = 0,
    PF_MODE_WINDOWED = 1,
}

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn set_error(code: &str, message: String) {
    let clean = |s: String| CString::new(s.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = Some(LastError { code: clean(code.to_string()), message: clean(message) });
    });
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Null(&'static str),
    Utf8,
    Lib(PfError),
}

impl From<PfError> for Failure {
    fn from(e: PfError) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard<F: FnOnce() -> FfiResult<PfStatus>>(f: F) -> PfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure::Null(what))) => {
            set_error("E_NULL_POINTER", format!("{what} is null"));
            PfStatus::PF_ERR_NULL
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("E_UTF8", "input string is not valid UTF-8".into());
            PfStatus::PF_ERR_UTF8
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.code(), e.to_string());
            PfStatus::PF_ERR_INVALID
        }
        Err(_) => {
            set_error("E_PANIC", "panic inside pf_forge".into());
            PfStatus::PF_ERR_PANIC
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn read_seq<'a>(p: *const PfSeq) -> FfiResult<&'a CoeffSeq> {
    p.as_ref().map(|s| &s.inner).ok_or(Failure::Null("sequence handle"))
}

unsafe fn put_seq(out: *mut *mut PfSeq, seq: CoeffSeq) -> FfiResult<PfStatus> {
    *out = Box::into_raw(Box::new(PfSeq { inner: seq }));
    Ok(PfStatus::PF_OK)
}

unsafe fn put_string(out: *mut *mut c_char, s: String) {
    *out = CString::new(s).expect("JSON has no interior nul").into_raw();
}

fn check_out<T>(out: *mut *mut T) -> FfiResult<()> {
    if out.is_null() {
        Err(Failure::Null("output pointer"))
    } else {
        Ok(())
    }
}

/// Parses `{"coeffs": ["p/q", ...]}` into a new handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_seq_from_json(json: *const c_char, out: *mut *mut PfSeq) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let s = read_str(json, "json")?;
        put_seq(out, CoeffSeq::from_json(s)?)
    })
}

/// Coefficients of `1/(1-z)^power` up to index `window`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_seq_inv_pow(power: usize, window: usize, out: *mut *mut PfSeq) -> PfStatus {
    guard(|| {
        check_out(out)?;
        put_seq(out, constructors::coeffs_inv_pow(power, window)?)
    })
}

/// Coefficients of `sum_k z^{k!}` up to index `window`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_seq_lacunary(window: usize, out: *mut *mut PfSeq) -> PfStatus {
    guard(|| {
        check_out(out)?;
        put_seq(out, constructors::lacunary_h(window))
    })
}

/// Number of stored coefficients, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_seq_len(seq: *const PfSeq) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.len())
}

/// Coefficient `k` as `"p/q"`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_seq_coeff(seq: *const PfSeq, k: usize, out: *mut *mut c_char) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let c = read_seq(seq)?;
        let v = c.value(k as i64)?;
        put_string(out, v.to_string());
        Ok(PfStatus::PF_OK)
    })
}

/// # Safety
/// `seq` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_seq_to_json(seq: *const PfSeq, out: *mut *mut c_char) -> PfStatus {
    guard(|| {
        check_out(out)?;
        put_string(out, read_seq(seq)?.to_json());
        Ok(PfStatus::PF_OK)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `seq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_seq_free(seq: *mut PfSeq) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Contiguous-minor check; writes the verdict JSON. Returns `PF_OK` on a
/// strict pass and `PF_FAIL` with a witness otherwise.
///
/// # Safety
/// `seq` must be a live handle; `verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_check_contiguous(
    seq: *const PfSeq,
    r: usize,
    window: usize,
    verdict: *mut *mut c_char,
) -> PfStatus {
    guard(|| {
        check_out(verdict)?;
        let v = pf_check::check_contiguous(read_seq(seq)?, r, window)?;
        put_string(verdict, v.to_json());
        Ok(if v.passed() { PfStatus::PF_OK } else { PfStatus::PF_FAIL })
    })
}

/// Every minor of order `<= r` on `0..=window`, refusing scans above `budget`
/// evaluations (0 selects the default).
///
/// # Safety
/// `seq` must be a live handle; `verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_check_all_minors(
    seq: *const PfSeq,
    r: usize,
    window: usize,
    budget: u64,
    verdict: *mut *mut c_char,
) -> PfStatus {
    guard(|| {
        check_out(verdict)?;
        let opts = if budget == 0 { ScanOptions::default() } else { ScanOptions { budget } };
        let v = pf_check::check_all_minors_with(read_seq(seq)?, r, window, opts)?;
        put_string(verdict, v.to_json());
        Ok(if v.passed() { PfStatus::PF_OK } else { PfStatus::PF_FAIL })
    })
}

/// Perturbation plan for `1/(1-z)^{r^2} + eps g` with `|g^{(p)}|` bounded
/// through `c_bound` (`"p/q"`); writes the plan JSON.
///
/// # Safety
/// `c_bound` must be a valid string; `plan` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_epsilon_bound(
    r: usize,
    alpha: usize,
    c_bound: *const c_char,
    mode: PfMode,
    k: usize,
    plan: *mut *mut c_char,
) -> PfStatus {
    guard(|| {
        check_out(plan)?;
        let c = parse_rational(read_str(c_bound, "C")?)?;
        let mode = match mode {
            PfMode::PF_MODE_CERTIFIED => CertMode::Certified,
            PfMode::PF_MODE_WINDOWED => CertMode::Windowed,
        };
        put_string(plan, constructors::epsilon_bound(r, alpha, &c, mode, k)?.to_json());
        Ok(PfStatus::PF_OK)
    })
}

/// Coefficients of `1/(1-z)^{r^2} + eps g` up to `window`.
///
/// # Safety
/// `g` must be a live handle, `eps` a valid string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_build_perturbed(
    g: *const PfSeq,
    r: usize,
    eps: *const c_char,
    window: usize,
    out: *mut *mut PfSeq,
) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let eps = parse_rational(read_str(eps, "eps")?)?;
        put_seq(out, constructors::build_perturbed(read_seq(g)?, r, &eps, window)?)
    })
}

/// `c_k - c_{k-1}/T`, `steps` times, on a strictly positive sequence.
///
/// # Safety
/// `seq` must be a live handle, `t` a valid string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_deflate(seq: *const PfSeq, t: *const c_char, steps: usize, out: *mut *mut PfSeq) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let t = parse_rational(read_str(t, "T")?)?;
        put_seq(out, deflation::deflate(read_seq(seq)?, &t, steps)?.deflated)
    })
}

/// Validates a domain and composes a PF_r generating function for it;
/// writes the composition JSON.
///
/// # Safety
/// `domain_json` must be a valid string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_compose_domain(
    domain_json: *const c_char,
    r: usize,
    window: usize,
    terms: usize,
    out: *mut *mut c_char,
) -> PfStatus {
    guard(|| {
        check_out(out)?;
        let spec = DomainSpec::from_json(read_str(domain_json, "domain")?)?;
        let opts = ComposeOptions { terms, ..ComposeOptions::default() };
        let comp = domain::compose_pfr_domain(&spec, r, window, opts)?;
        put_string(out, serde_json::to_string(&comp).map_err(PfError::from)?);
        Ok(PfStatus::PF_OK)
    })
}

/// Code of the last error on this thread (`"E_..."`), or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pf_last_error_code() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.code.as_ptr()))
}

/// Message of the last error on this thread, or null. Same lifetime as
/// [`pf_last_error_code`].
#[no_mangle]
pub extern "C" fn pf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.message.as_ptr()))
}
