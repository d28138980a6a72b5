//! C ABI over `spreadbench`.
//!
//! Every fallible call returns an [`SbStatus`]; on failure the message is
//! available from [`sb_last_error`] on the same thread. Objects are opaque
//! handles released by their matching `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spreadbench::analysis::krivine_p_estimate;
use spreadbench::cli::{run, RunConfig};
use spreadbench::combinatorics::{coarsenings, is_coarser, Blocking};
use spreadbench::spaces::{make_example_space, type_p_witness, Space, SpaceSpec, SparseVector};
use spreadbench::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidSpec = 2,
    InvalidInput = 3,
    Parse = 4,
    Utf8 = 5,
    Protocol = 6,
    Io = 7,
    Panic = 8,
}

/// A validated normed space.
pub struct SbSpace(Space);

/// A finitely supported vector.
pub struct SbVector(SparseVector);

/// A blocking of the naturals.
pub struct SbBlocking(Blocking);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SbStatus {
    match e {
        Error::InvalidSpec(_) => SbStatus::InvalidSpec,
        Error::InvalidInput(_) => SbStatus::InvalidInput,
        Error::Parse(_) => SbStatus::Parse,
        Error::Protocol { .. } => SbStatus::Protocol,
        Error::Io(_) => SbStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> SbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SbStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            SbStatus::Utf8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}

/// Parses a space specification document.
#[no_mangle]
pub unsafe extern "C" fn sb_space_from_json(json: *const c_char, out: *mut *mut SbSpace) -> SbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec: SpaceSpec = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(SbSpace(Space::new(spec)?)));
        Ok(())
    })
}

/// The segmented `ℓ_p`-sum with `n_s` the least natural above `s^{p·p_s/(p−p_s)}`.
#[no_mangle]
pub unsafe extern "C" fn sb_make_example_space(p: f64, ps: *const f64, len: usize, out: *mut *mut SbSpace) -> SbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if ps.is_null() && len > 0 {
            return Err(Fail::Null("ps"));
        }
        let ps = if len == 0 { &[][..] } else { std::slice::from_raw_parts(ps, len) };
        *out = Box::into_raw(Box::new(SbSpace(Space::new(make_example_space(p, ps)?)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sb_space_free(space: *mut SbSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// A vector from parallel arrays of 1-based indices and values.
#[no_mangle]
pub unsafe extern "C" fn sb_vector_new(
    indices: *const usize,
    values: *const f64,
    len: usize,
    out: *mut *mut SbVector,
) -> SbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let pairs: Vec<(usize, f64)> = if len == 0 {
            Vec::new()
        } else {
            if indices.is_null() {
                return Err(Fail::Null("indices"));
            }
            if values.is_null() {
                return Err(Fail::Null("values"));
            }
            let idx = std::slice::from_raw_parts(indices, len);
            let val = std::slice::from_raw_parts(values, len);
            idx.iter().copied().zip(val.iter().copied()).collect()
        };
        *out = Box::into_raw(Box::new(SbVector(SparseVector::new(pairs)?)));
        Ok(())
    })
}

/// Parses `"1:1,3:-1"`.
#[no_mangle]
pub unsafe extern "C" fn sb_vector_parse(text: *const c_char, out: *mut *mut SbVector) -> SbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let v: SparseVector = str_arg(text, "text")?.parse()?;
        *out = Box::into_raw(Box::new(SbVector(v)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sb_vector_free(v: *mut SbVector) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

#[no_mangle]
pub unsafe extern "C" fn sb_norm(space: *const SbSpace, v: *const SbVector, out: *mut f64) -> SbStatus {
    guard(|| {
        let space = ref_arg(space, "space")?;
        let v = ref_arg(v, "vector")?;
        *out_arg(out, "out")? = space.0.norm(&v.0)?;
        Ok(())
    })
}

/// Parses `"1,2|4,7"`.
#[no_mangle]
pub unsafe extern "C" fn sb_blocking_parse(text: *const c_char, out: *mut *mut SbBlocking) -> SbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let b: Blocking = str_arg(text, "text")?.parse()?;
        *out = Box::into_raw(Box::new(SbBlocking(b)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sb_blocking_free(b: *mut SbBlocking) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

#[no_mangle]
pub unsafe extern "C" fn sb_blocking_len(b: *const SbBlocking, out: *mut usize) -> SbStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(b, "blocking")?.0.len();
        Ok(())
    })
}

/// Whether every block of `f` is a union of blocks of `e`.
#[no_mangle]
pub unsafe extern "C" fn sb_is_coarser(f: *const SbBlocking, e: *const SbBlocking, out: *mut bool) -> SbStatus {
    guard(|| {
        *out_arg(out, "out")? = is_coarser(&ref_arg(f, "f")?.0, &ref_arg(e, "e")?.0);
        Ok(())
    })
}

/// Number of length-`k` blockings coarser than `p`.
#[no_mangle]
pub unsafe extern "C" fn sb_coarsenings_count(p: *const SbBlocking, k: usize, out: *mut usize) -> SbStatus {
    guard(|| {
        *out_arg(out, "out")? = coarsenings(&ref_arg(p, "p")?.0, k).len();
        Ok(())
    })
}

/// Whether segment `s` witnesses failure of type `p` with constant `c`.
#[no_mangle]
pub unsafe extern "C" fn sb_type_p_witness(space: *const SbSpace, s: usize, c: f64, out: *mut bool) -> SbStatus {
    guard(|| {
        *out_arg(out, "out")? = type_p_witness(ref_arg(space, "space")?.0.spec(), s, c)?;
        Ok(())
    })
}

/// Least-squares Krivine p; `INFINITY` for flat growth.
#[no_mangle]
pub unsafe extern "C" fn sb_krivine_p(space: *const SbSpace, max_n: usize, offset: usize, out: *mut f64) -> SbStatus {
    guard(|| {
        *out_arg(out, "out")? = krivine_p_estimate(&ref_arg(space, "space")?.0, max_n, offset)?.p;
        Ok(())
    })
}

/// Runs a command from a run-config document. On success `*out_report`
/// receives the report (free with [`sb_string_free`]) and `*out_passed` is
/// 1 if every check passed, 0 otherwise.
#[no_mangle]
pub unsafe extern "C" fn sb_run_command_json(
    config_json: *const c_char,
    out_report: *mut *mut c_char,
    out_passed: *mut i32,
) -> SbStatus {
    guard(|| {
        let out_report = out_arg(out_report, "out_report")?;
        let out_passed = out_arg(out_passed, "out_passed")?;
        let config: RunConfig = serde_json::from_str(str_arg(config_json, "config_json")?).map_err(Error::from)?;
        let outcome = run(&config)?;
        let text = CString::new(outcome.rendered()).map_err(|e| Error::Io(e.to_string()))?;
        *out_report = text.into_raw();
        *out_passed = i32::from(outcome.passed);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
