//! C ABI over the residuum library.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`ResiduumStatus`]; on failure a message is available from
//! [`residuum_last_error`] until the next call on the same thread.
//! Strings returned by the library are freed with [`residuum_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use residuum::checker::check_source;
use residuum::diagnostic::Report;
use residuum::quantale::{Effect, EffectError, EffectSystem};
use residuum::registry::lookup;
use residuum::syntax::LineIndex;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResiduumStatus {
    Ok = 0,
    /// The operation is undefined on these arguments; the output is null.
    Undefined = 1,
    NullArgument = 2,
    InvalidUtf8 = 3,
    UnknownSystem = 4,
    BadEffect = 5,
    SystemMismatch = 6,
    Internal = 7,
}

/// An effect system. Opaque.
pub struct ResiduumSystem {
    sys: EffectSystem,
}

/// An effect of one particular system. Opaque.
pub struct ResiduumEffect {
    effect: Effect,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(ResiduumStatus, String);

impl From<EffectError> for Fail {
    fn from(e: EffectError) -> Self {
        let status = match e {
            EffectError::SystemMismatch { .. } => ResiduumStatus::SystemMismatch,
            EffectError::UnknownEffect(_) | EffectError::BadLiteral { .. } => ResiduumStatus::BadEffect,
            EffectError::ForeignPayload | EffectError::StateLimit { .. } => ResiduumStatus::Internal,
        };
        Fail(status, e.to_string())
    }
}

/// Runs `f`, translating failures and panics into a status.
fn guard(f: impl FnOnce() -> Result<ResiduumStatus, Fail>) -> ResiduumStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            ResiduumStatus::Internal
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    // SAFETY: the caller guarantees `p` is null or a live handle.
    unsafe { p.as_ref() }.ok_or_else(|| Fail(ResiduumStatus::NullArgument, format!("`{what}` is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(ResiduumStatus::NullArgument, format!("`{what}` is null")));
    }
    // SAFETY: non-null and, per the contract, nul-terminated.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail(ResiduumStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn out_ptr<'a, T>(out: *mut *mut T) -> Result<&'a mut *mut T, Fail> {
    // SAFETY: the caller guarantees `out` is null or writable.
    let slot = unsafe { out.as_mut() }.ok_or_else(|| Fail(ResiduumStatus::NullArgument, "`out` is null".into()))?;
    *slot = ptr::null_mut();
    Ok(slot)
}

fn emit(slot: &mut *mut ResiduumEffect, e: Option<Effect>) -> ResiduumStatus {
    match e {
        Some(effect) => {
            *slot = Box::into_raw(Box::new(ResiduumEffect { effect }));
            ResiduumStatus::Ok
        }
        None => ResiduumStatus::Undefined,
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message for the last failed call on this thread, or null. Borrowed; valid
/// until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn residuum_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Looks up a system by key (`atomicity`, `trace:a,b`, `custom:path`, ...).
///
/// # Safety
/// `key` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn residuum_system_new(key: *const c_char, out: *mut *mut ResiduumSystem) -> ResiduumStatus {
    guard(|| {
        let slot = unsafe { out_ptr(out) }?;
        let key = unsafe { text(key, "key") }?;
        let sys = lookup(key).map_err(|e| Fail(ResiduumStatus::UnknownSystem, e.to_string()))?;
        *slot = Box::into_raw(Box::new(ResiduumSystem { sys }));
        Ok(ResiduumStatus::Ok)
    })
}

/// # Safety
/// `sys` must be null or a handle from [`residuum_system_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn residuum_system_free(sys: *mut ResiduumSystem) {
    if !sys.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(sys) });
    }
}

/// Whether sequencing in `sys` is commutative; false for a null handle.
///
/// # Safety
/// `sys` must be null or a live system handle.
#[no_mangle]
pub unsafe extern "C" fn residuum_system_is_commutative(sys: *const ResiduumSystem) -> bool {
    unsafe { sys.as_ref() }.is_some_and(|s| s.sys.is_commutative())
}

/// Parses an effect literal in the system's syntax.
///
/// # Safety
/// `sys` must be a live system handle, `literal` nul-terminated, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn residuum_effect_parse(
    sys: *const ResiduumSystem,
    literal: *const c_char,
    out: *mut *mut ResiduumEffect,
) -> ResiduumStatus {
    guard(|| {
        let slot = unsafe { out_ptr(out) }?;
        let sys = unsafe { reference(sys, "sys") }?;
        let lit = unsafe { text(literal, "literal") }?;
        Ok(emit(slot, Some(sys.sys.parse_effect(lit)?)))
    })
}

/// The effect of `perform label`.
///
/// # Safety
/// As for [`residuum_effect_parse`].
#[no_mangle]
pub unsafe extern "C" fn residuum_effect_atom(
    sys: *const ResiduumSystem,
    label: *const c_char,
    out: *mut *mut ResiduumEffect,
) -> ResiduumStatus {
    guard(|| {
        let slot = unsafe { out_ptr(out) }?;
        let sys = unsafe { reference(sys, "sys") }?;
        let label = unsafe { text(label, "label") }?;
        let e = sys.sys.atom(label).ok_or_else(|| Fail(ResiduumStatus::BadEffect, format!("unknown label `{label}`")))?;
        Ok(emit(slot, Some(e)))
    })
}

/// # Safety
/// `sys` must be a live system handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn residuum_effect_unit(sys: *const ResiduumSystem, out: *mut *mut ResiduumEffect) -> ResiduumStatus {
    guard(|| {
        let slot = unsafe { out_ptr(out) }?;
        let sys = unsafe { reference(sys, "sys") }?;
        Ok(emit(slot, Some(sys.sys.unit())))
    })
}

/// # Safety
/// `e` must be null or an effect handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn residuum_effect_free(e: *mut ResiduumEffect) {
    if !e.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(e) });
    }
}

type Binary = fn(&EffectSystem, &Effect, &Effect) -> Result<Option<Effect>, EffectError>;

unsafe fn binary(
    op: Binary,
    sys: *const ResiduumSystem,
    a: *const ResiduumEffect,
    b: *const ResiduumEffect,
    out: *mut *mut ResiduumEffect,
) -> ResiduumStatus {
    guard(|| {
        let slot = unsafe { out_ptr(out) }?;
        let sys = unsafe { reference(sys, "sys") }?;
        let a = unsafe { reference(a, "a") }?;
        let b = unsafe { reference(b, "b") }?;
        Ok(emit(slot, op(&sys.sys, &a.effect, &b.effect)?))
    })
}

/// `a ▷ b`. Returns `Undefined` (and a null `out`) when undefined.
///
/// # Safety
/// All handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn residuum_seq(
    sys: *const ResiduumSystem,
    a: *const ResiduumEffect,
    b: *const ResiduumEffect,
    out: *mut *mut ResiduumEffect,
) -> ResiduumStatus {
    unsafe { binary(EffectSystem::seq, sys, a, b, out) }
}

/// `a ⊔ b`.
///
/// # Safety
/// As for [`residuum_seq`].
#[no_mangle]
pub unsafe extern "C" fn residuum_join(
    sys: *const ResiduumSystem,
    a: *const ResiduumEffect,
    b: *const ResiduumEffect,
    out: *mut *mut ResiduumEffect,
) -> ResiduumStatus {
    unsafe { binary(EffectSystem::join, sys, a, b, out) }
}

/// The largest effect that may follow `sofar` while staying within `target`.
///
/// # Safety
/// As for [`residuum_seq`].
#[no_mangle]
pub unsafe extern "C" fn residuum_residual(
    sys: *const ResiduumSystem,
    sofar: *const ResiduumEffect,
    target: *const ResiduumEffect,
    out: *mut *mut ResiduumEffect,
) -> ResiduumStatus {
    unsafe { binary(EffectSystem::residual, sys, sofar, target, out) }
}

/// Iteration `a*`.
///
/// # Safety
/// As for [`residuum_seq`].
#[no_mangle]
pub unsafe extern "C" fn residuum_iter(
    sys: *const ResiduumSystem,
    a: *const ResiduumEffect,
    out: *mut *mut ResiduumEffect,
) -> ResiduumStatus {
    guard(|| {
        let slot = unsafe { out_ptr(out) }?;
        let sys = unsafe { reference(sys, "sys") }?;
        let a = unsafe { reference(a, "a") }?;
        Ok(emit(slot, sys.sys.iter(&a.effect)?))
    })
}

/// Writes whether `a ⊑ b` to `out`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn residuum_le(
    sys: *const ResiduumSystem,
    a: *const ResiduumEffect,
    b: *const ResiduumEffect,
    out: *mut bool,
) -> ResiduumStatus {
    guard(|| {
        // SAFETY: caller guarantees `out` is null or writable.
        let slot = unsafe { out.as_mut() }.ok_or_else(|| Fail(ResiduumStatus::NullArgument, "`out` is null".into()))?;
        let sys = unsafe { reference(sys, "sys") }?;
        let a = unsafe { reference(a, "a") }?;
        let b = unsafe { reference(b, "b") }?;
        *slot = sys.sys.le(&a.effect, &b.effect)?;
        Ok(ResiduumStatus::Ok)
    })
}

/// Renders an effect; null on bad handles. Free with
/// [`residuum_string_free`].
///
/// # Safety
/// Handles must be null or live.
#[no_mangle]
pub unsafe extern "C" fn residuum_effect_render(sys: *const ResiduumSystem, e: *const ResiduumEffect) -> *mut c_char {
    match unsafe { (sys.as_ref(), e.as_ref()) } {
        (Some(s), Some(e)) if e.effect.system() == s.sys.id() => owned_string(s.sys.render(&e.effect)),
        _ => ptr::null_mut(),
    }
}

/// Checks a program. On `Ok`, `out_json` receives a JSON array of
/// diagnostics (the `check --format json` schema, with `file` set to
/// `file_name`) and `out_count` its length.
///
/// # Safety
/// `sys` live; `source` and `file_name` nul-terminated; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn residuum_check_source(
    sys: *const ResiduumSystem,
    source: *const c_char,
    file_name: *const c_char,
    out_json: *mut *mut c_char,
    out_count: *mut usize,
) -> ResiduumStatus {
    guard(|| {
        let slot = unsafe { out_ptr(out_json) }?;
        // SAFETY: caller guarantees `out_count` is null or writable.
        let count = unsafe { out_count.as_mut() }
            .ok_or_else(|| Fail(ResiduumStatus::NullArgument, "`out_count` is null".into()))?;
        let sys = unsafe { reference(sys, "sys") }?;
        let src = unsafe { text(source, "source") }?;
        let file = unsafe { text(file_name, "file_name") }?;
        let index = LineIndex::new(src);
        let reports: Vec<Report> =
            check_source(&sys.sys, src).iter().map(|d| Report::new(file, &index, sys.sys.name(), d)).collect();
        let json = serde_json::to_string(&reports).map_err(|e| Fail(ResiduumStatus::Internal, e.to_string()))?;
        *count = reports.len();
        *slot = owned_string(json);
        Ok(ResiduumStatus::Ok)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn residuum_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { CString::from_raw(s) });
    }
}
