//! C ABI over `sti-core`.
//!
//! Terms and derivations cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free`. Every fallible call
//! returns a [`StiStatus`]; on failure the message is available from
//! [`sti_last_error`] on the same thread until the next failing call.
//! Strings returned by the library are freed with [`sti_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sti_core::derivation::{from_json_str, pretty_print, to_json_string, DecodeError};
use sti_core::harness::verify_bounds;
use sti_core::inference::{infer, InferError, SearchBounds};
use sti_core::measures::{degree, proof_size, rank, weight};
use sti_core::term::DEFAULT_FUEL;
use sti_core::{check_derivation, parse_term, Derivation, Term};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    /// A derivation failed to check, or a bound verdict failed.
    CheckFailed = 4,
    /// Fuel or search bounds ran out.
    Exhausted = 5,
    InvalidArgument = 6,
    Panic = 7,
}

/// Opaque λ-term.
pub struct StiTerm(Term);

/// Opaque typing derivation.
pub struct StiDerivation(Derivation);

/// Inference search bounds; see [`sti_bounds_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct StiBounds {
    pub max_type_elements: usize,
    pub max_degree: u64,
    pub max_proof_size: u64,
    pub time_fuel: u64,
}

impl From<StiBounds> for SearchBounds {
    fn from(b: StiBounds) -> SearchBounds {
        SearchBounds {
            max_type_elements: b.max_type_elements,
            max_degree: b.max_degree,
            max_proof_size: b.max_proof_size,
            time_fuel: b.time_fuel,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StiMeasures {
    pub proof_size: u64,
    pub subject_size: u64,
    pub rank: u64,
    pub degree: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct StiBoundReport {
    pub subject_size: u64,
    pub degree: u64,
    pub rank: u64,
    /// `|M|^(D+1)`, saturated at `UINT64_MAX`.
    pub theorem_bound: u64,
    pub longest_reduction: u64,
    pub max_normal_form_size: u64,
    pub weight_ceiling: u64,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', "\\0");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes replaced")));
}

type Res<T> = Result<T, (StiStatus, String)>;

fn guard(f: impl FnOnce() -> Res<()>) -> StiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StiStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside sti");
            StiStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Res<&'a str> {
    if p.is_null() {
        return Err((StiStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (StiStatus::InvalidUtf8, e.to_string()))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref()
        .ok_or_else(|| (StiStatus::NullPointer, format!("null {what}")))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Res<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| (StiStatus::NullPointer, "null output pointer".into()))
}

fn string_out(s: String) -> *mut c_char {
    CString::new(s.replace('\0', "\\0")).map_or(ptr::null_mut(), CString::into_raw)
}

fn infer_status(e: &InferError) -> StiStatus {
    match e {
        InferError::BoundsExhausted { .. } => StiStatus::Exhausted,
        InferError::InvalidBounds(_) | InferError::Context(_) => StiStatus::InvalidArgument,
        InferError::Internal(_) => StiStatus::CheckFailed,
    }
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sti_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn sti_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn sti_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sti_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn sti_bounds_default() -> StiBounds {
    let b = SearchBounds::default();
    StiBounds {
        max_type_elements: b.max_type_elements,
        max_degree: b.max_degree,
        max_proof_size: b.max_proof_size,
        time_fuel: b.time_fuel,
    }
}

// ---------------------------------------------------------------------------
// terms

/// Parses `text`, e.g. `"\\x. x x"`, into `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sti_term_parse(text: *const c_char, out: *mut *mut StiTerm) -> StiStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let t = parse_term(str_arg(text)?).map_err(|e| (StiStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(StiTerm(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sti_term_free(t: *mut StiTerm) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// `|M|`, or 0 for NULL.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sti_term_size(t: *const StiTerm) -> usize {
    t.as_ref().map_or(0, |t| t.0.size())
}

/// The term in concrete syntax; free with [`sti_string_free`]. NULL for NULL.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sti_term_to_string(t: *const StiTerm) -> *mut c_char {
    t.as_ref()
        .map_or(ptr::null_mut(), |t| string_out(t.0.to_string()))
}

// ---------------------------------------------------------------------------
// derivations

/// Searches for a derivation of `t`. `bounds` may be NULL for the defaults.
///
/// # Safety
/// `t` must be a live handle, `bounds` NULL or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sti_infer(
    t: *const StiTerm,
    bounds: *const StiBounds,
    out: *mut *mut StiDerivation,
) -> StiStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let t = ref_arg(t, "term")?;
        let b = bounds
            .as_ref()
            .map_or_else(SearchBounds::default, |b| (*b).into());
        let r = infer(&t.0, &b).map_err(|e| (infer_status(&e), e.to_string()))?;
        *out = Box::into_raw(Box::new(StiDerivation(r.derivation)));
        Ok(())
    })
}

/// Reads and checks a derivation from its JSON encoding.
/// `STI_STATUS_CHECK_FAILED` if it decodes but does not check.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_from_json(
    json: *const c_char,
    out: *mut *mut StiDerivation,
) -> StiStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let d = from_json_str(str_arg(json)?).map_err(|e| match e {
            DecodeError::Check(_) => (StiStatus::CheckFailed, e.to_string()),
            e => (StiStatus::ParseError, e.to_string()),
        })?;
        *out = Box::into_raw(Box::new(StiDerivation(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_free(d: *mut StiDerivation) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// JSON encoding; free with [`sti_string_free`]. NULL for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_to_json(d: *const StiDerivation) -> *mut c_char {
    d.as_ref()
        .map_or(ptr::null_mut(), |d| string_out(to_json_string(&d.0)))
}

/// Indented text layout; free with [`sti_string_free`]. NULL for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_pretty(d: *const StiDerivation) -> *mut c_char {
    d.as_ref()
        .map_or(ptr::null_mut(), |d| string_out(pretty_print(&d.0)))
}

/// The subject term as a new handle.
///
/// # Safety
/// `d` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_subject(
    d: *const StiDerivation,
    out: *mut *mut StiTerm,
) -> StiStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let d = ref_arg(d, "derivation")?;
        *out = Box::into_raw(Box::new(StiTerm(d.0.subject().clone())));
        Ok(())
    })
}

/// `STI_STATUS_OK` if every rule instance checks, else
/// `STI_STATUS_CHECK_FAILED` with the violations as the error message.
///
/// # Safety
/// `d` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_check(d: *const StiDerivation) -> StiStatus {
    guard(|| {
        let d = ref_arg(d, "derivation")?;
        let r = check_derivation(&d.0);
        if r.is_ok() {
            Ok(())
        } else {
            Err((StiStatus::CheckFailed, r.to_string()))
        }
    })
}

/// # Safety
/// `d` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_measures(
    d: *const StiDerivation,
    out: *mut StiMeasures,
) -> StiStatus {
    guard(|| {
        let out = out_arg(out)?;
        let d = &ref_arg(d, "derivation")?.0;
        *out = StiMeasures {
            proof_size: proof_size(d),
            subject_size: d.subject().size() as u64,
            rank: rank(d),
            degree: degree(d),
        };
        Ok(())
    })
}

/// `W(Π, r)`; `r` must be positive.
///
/// # Safety
/// `d` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sti_derivation_weight(
    d: *const StiDerivation,
    r: u64,
    out: *mut u64,
) -> StiStatus {
    guard(|| {
        let out = out_arg(out)?;
        let d = ref_arg(d, "derivation")?;
        if r == 0 {
            return Err((StiStatus::InvalidArgument, "r must be positive".into()));
        }
        *out = weight(&d.0, r);
        Ok(())
    })
}

/// Checks the reduction bounds of the subject of `d` against its measures.
/// `fuel` of 0 means the default. Returns `STI_STATUS_CHECK_FAILED` when a
/// verdict fails; `*out` is filled in either way.
///
/// # Safety
/// `d` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sti_verify_bounds(
    d: *const StiDerivation,
    fuel: usize,
    out: *mut StiBoundReport,
) -> StiStatus {
    guard(|| {
        let out = out_arg(out)?;
        let d = &ref_arg(d, "derivation")?.0;
        let fuel = if fuel == 0 { DEFAULT_FUEL } else { fuel };
        let r = verify_bounds(d.subject(), d, fuel).map_err(|e| {
            let status = if e.is_exhaustion() {
                StiStatus::Exhausted
            } else {
                StiStatus::CheckFailed
            };
            (status, e.to_string())
        })?;
        *out = StiBoundReport {
            subject_size: r.subject_size,
            degree: r.degree,
            rank: r.rank,
            theorem_bound: u64::try_from(r.theorem_bound).unwrap_or(u64::MAX),
            longest_reduction: r.longest_reduction,
            max_normal_form_size: r.max_normal_form_size,
            weight_ceiling: r.weight_ceiling,
            passed: r.passed(),
        };
        if r.passed() {
            Ok(())
        } else {
            Err((
                StiStatus::CheckFailed,
                format!("bound verdicts failed: {:?}", r.verdicts),
            ))
        }
    })
}
