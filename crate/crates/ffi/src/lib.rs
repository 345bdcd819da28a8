//! C interface to `coset-core`.
//!
//! Every function returns a [`CosetStatus`]; results travel through out
//! pointers. On failure a message is kept per thread and can be read with
//! [`coset_last_error`]. Handles are opaque and must be released with the
//! matching `*_free` function. Strings returned by the library are freed
//! with [`coset_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coset_core::game::{p_win, p_win_extended, theorem1_bound, unentangled_value, winning_rate_envelope, Strategy, StrategyFile};
use coset_core::gf2::{enumerate_grassmannian, gaussian_binomial, intersection_count, Grassmannian};
use coset_core::perms::{full_family, orthogonal_family, verify_family, PermutationFamily};
use coset_core::qstate::Tolerances;
use coset_core::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Out-of-range or inconsistent parameters.
    InvalidArgument = 2,
    /// Malformed JSON or an invalid strategy.
    Format = 3,
    /// The Grassmannian is larger than the cap.
    CapExceeded = 4,
    /// Internal invariant or eigensolver failure.
    Internal = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// `Gr_2(n, k)` in canonical order.
pub struct CosetGrassmannian {
    inner: Grassmannian,
}

/// Family of mutually orthogonal permutations.
pub struct CosetFamily {
    inner: PermutationFamily,
}

/// Validated game strategy.
pub struct CosetStrategy {
    inner: Strategy,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CosetStatus {
    match e {
        Error::CapExceeded { .. } => CosetStatus::CapExceeded,
        Error::Format { .. } | Error::InvalidStrategy { .. } | Error::InvalidBitString(_) => CosetStatus::Format,
        Error::InvariantViolation(_) | Error::NoConvergence { .. } | Error::Io(_) => CosetStatus::Internal,
        Error::DimensionTooLarge { .. } | Error::DimensionMismatch { .. } | Error::InvalidParameters(_) => {
            CosetStatus::InvalidArgument
        }
    }
}

/// Runs `f`, recording errors and panics.
fn guard<F>(f: F) -> CosetStatus
where
    F: FnOnce() -> Result<(), (CosetStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CosetStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside coset-core".into());
            CosetStatus::Panic
        }
    }
}

fn core<T>(r: coset_core::Result<T>) -> Result<T, (CosetStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CosetStatus, String) {
    (CosetStatus::NullPointer, format!("{what} is null"))
}

fn check_nk(n: usize, k: usize) -> Result<(), (CosetStatus, String)> {
    if k > n {
        return Err((CosetStatus::InvalidArgument, format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (CosetStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn coset_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn coset_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `binom(n, k)_2` as a decimal string.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_gaussian_binomial(n: usize, k: usize, out: *mut *mut c_char) -> CosetStatus {
    guard(|| write(out, to_c_string(gaussian_binomial(n, k).to_string()), "out"))
}

/// Number of `k`-subspaces meeting a fixed one in dimension `m`, as a
/// decimal string.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_intersection_count(n: usize, k: usize, m: usize, out: *mut *mut c_char) -> CosetStatus {
    guard(|| {
        check_nk(n, k)?;
        write(out, to_c_string(intersection_count(n, k, m).to_string()), "out")
    })
}

/// Upper bound on the entangled winning probability of the `(n, k)` game.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_entangled_bound(n: usize, k: usize, out: *mut f64) -> CosetStatus {
    guard(|| write(out, core(theorem1_bound(n, k))?, "out"))
}

/// Optimal winning probability over unentangled strategies.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_unentangled_value(n: usize, k: usize, out: *mut f64) -> CosetStatus {
    guard(|| write(out, core(unentangled_value(n, k))?, "out"))
}

/// `2^(-min(R, 1-R)/2)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_rate_envelope(rate: f64, out: *mut f64) -> CosetStatus {
    guard(|| write(out, core(winning_rate_envelope(rate))?, "out"))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_grassmannian_new(
    n: usize,
    k: usize,
    cap: u64,
    out: *mut *mut CosetGrassmannian,
) -> CosetStatus {
    guard(|| {
        check_nk(n, k)?;
        let inner = core(enumerate_grassmannian(n, k, cap))?;
        write(out, Box::into_raw(Box::new(CosetGrassmannian { inner })), "out")
    })
}

/// # Safety
/// `g` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_grassmannian_len(g: *const CosetGrassmannian, out: *mut usize) -> CosetStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("grassmannian"))?;
        write(out, g.inner.len(), "out")
    })
}

/// Basis of subspace `index` as comma-separated bit strings.
///
/// # Safety
/// `g` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_grassmannian_subspace(
    g: *const CosetGrassmannian,
    index: usize,
    out: *mut *mut c_char,
) -> CosetStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("grassmannian"))?;
        let w = g
            .inner
            .get(index)
            .ok_or_else(|| (CosetStatus::InvalidArgument, format!("index {index} out of range")))?;
        write(out, to_c_string(w.row_strings().join(",")), "out")
    })
}

/// # Safety
/// `g` must be null or a handle from [`coset_grassmannian_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coset_grassmannian_free(g: *mut CosetGrassmannian) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Full family of `binom(n, k)_2` permutations, or the `m`-intersection
/// family when `m >= 0`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_family_new(
    n: usize,
    k: usize,
    m: i64,
    cap: u64,
    out: *mut *mut CosetFamily,
) -> CosetStatus {
    guard(|| {
        check_nk(n, k)?;
        let inner = if m < 0 {
            core(full_family(n, k, cap))?
        } else {
            core(orthogonal_family(n, k, m as usize, cap))?
        };
        write(out, Box::into_raw(Box::new(CosetFamily { inner })), "out")
    })
}

/// # Safety
/// `f` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_family_len(f: *const CosetFamily, out: *mut usize) -> CosetStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("family"))?;
        write(out, f.inner.len(), "out")
    })
}

/// Copies member `index` into `perm` (which must hold `perm_len` entries,
/// at least the Grassmannian size) and its intersection dimension into `m`.
///
/// # Safety
/// `f` must be a live handle, `m` valid for writes and `perm` valid for
/// `perm_len` writes.
#[no_mangle]
pub unsafe extern "C" fn coset_family_entry(
    f: *const CosetFamily,
    index: usize,
    m: *mut usize,
    perm: *mut usize,
    perm_len: usize,
) -> CosetStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("family"))?;
        let e = f
            .inner
            .entries
            .get(index)
            .ok_or_else(|| (CosetStatus::InvalidArgument, format!("index {index} out of range")))?;
        if perm.is_null() {
            return Err(null("perm"));
        }
        if perm_len < e.perm.len() {
            return Err((
                CosetStatus::InvalidArgument,
                format!("perm buffer holds {perm_len}, need {}", e.perm.len()),
            ));
        }
        ptr::copy_nonoverlapping(e.perm.as_ptr(), perm, e.perm.len());
        write(m, e.m, "m")
    })
}

/// Checks bijectivity, the intersection property and orthogonality.
///
/// # Safety
/// `f` must be a live handle; `passed` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_family_verify(f: *const CosetFamily, cap: u64, passed: *mut bool) -> CosetStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("family"))?;
        let report = core(verify_family(&f.inner, cap))?;
        write(passed, report.passed, "passed")
    })
}

/// Serialized family, `{n, k, entries: [{m, perm}]}`.
///
/// # Safety
/// `f` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_family_to_json(f: *const CosetFamily, out: *mut *mut c_char) -> CosetStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("family"))?;
        let json = serde_json::to_string(&f.inner).map_err(|e| (CosetStatus::Internal, e.to_string()))?;
        write(out, to_c_string(json), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from [`coset_family_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coset_family_free(f: *mut CosetFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Parses and validates a strategy file with default tolerances.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_strategy_from_json(json: *const c_char, out: *mut *mut CosetStrategy) -> CosetStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (CosetStatus::Format, format!("not UTF-8: {e}")))?;
        let file = core(StrategyFile::parse(text))?;
        let inner = core(file.into_strategy(&Tolerances::default()))?;
        write(out, Box::into_raw(Box::new(CosetStrategy { inner })), "out")
    })
}

/// Winning probability by direct evaluation of the channel.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_strategy_p_win(s: *const CosetStrategy, out: *mut f64) -> CosetStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("strategy"))?;
        write(out, core(p_win(&s.inner))?, "out")
    })
}

/// Winning probability evaluated against the Choi state.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn coset_strategy_p_win_extended(s: *const CosetStrategy, out: *mut f64) -> CosetStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("strategy"))?;
        write(out, core(p_win_extended(&s.inner))?, "out")
    })
}

/// # Safety
/// `s` must be null or a handle from [`coset_strategy_from_json`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn coset_strategy_free(s: *mut CosetStrategy) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
