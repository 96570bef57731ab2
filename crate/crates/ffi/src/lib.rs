//! C ABI over the nilsol report runners. Every function returns a status
//! code: 0 success, 2 invalid input, 3 numerical failure, 4 bad argument.
//! JSON outputs are heap strings owned by this library; release them with
//! `nilsol_string_free`. Thread count is taken from `NILSOL_THREADS`.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::path::PathBuf;

use nilsol::report::{self, RunOptions};

pub const NILSOL_OK: c_int = 0;
pub const NILSOL_ERR_INPUT: c_int = 2;
pub const NILSOL_ERR_NUMERICAL: c_int = 3;
pub const NILSOL_ERR_ARGUMENT: c_int = 4;

/// Opaque validated model handle.
pub struct NilsolModel {
    path: PathBuf,
}

/// Run options shared by the sampled and flow entry points. Zero `samples`
/// and zero `t_end` fall back to the defaults; other values pass through.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct NilsolOptions {
    /// Number of sampled directions (default 32).
    pub samples: u64,
    /// Seed of the deterministic direction sampler.
    pub seed: u64,
    /// Flow horizon (default 1.0).
    pub t_end: c_double,
    /// Nonzero integrates the volume-normalized flow.
    pub normalized: c_int,
    /// Nonzero proceeds when the drift is not Killing.
    pub force: c_int,
    /// Nonzero includes wall-clock timing; breaks byte determinism.
    pub timing: c_int,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul stripped");
    });
}

fn fail(e: &nilsol::Error) -> c_int {
    set_error(e.to_string());
    if e.is_input_error() {
        NILSOL_ERR_INPUT
    } else {
        NILSOL_ERR_NUMERICAL
    }
}

fn bad_argument(message: &str) -> c_int {
    set_error(message.to_string());
    NILSOL_ERR_ARGUMENT
}

fn thread_count() -> usize {
    std::env::var("NILSOL_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

fn run_options(opts: Option<&NilsolOptions>) -> RunOptions {
    let mut out = RunOptions {
        threads: thread_count(),
        ..RunOptions::default()
    };
    if let Some(o) = opts {
        if o.samples > 0 {
            out.samples = o.samples as usize;
        }
        out.seed = o.seed;
        if o.t_end != 0.0 {
            out.t_end = o.t_end;
        }
        out.normalized = o.normalized != 0;
        out.force = o.force != 0;
        out.timing = o.timing != 0;
    }
    out
}

/// Writes `text` as a heap C string into `out`.
unsafe fn emit(out: *mut *mut c_char, text: String) -> c_int {
    let c = CString::new(text).expect("JSON has no interior nul");
    unsafe { *out = c.into_raw() };
    NILSOL_OK
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn nilsol_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread; valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn nilsol_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Fills `out` with the default options.
///
/// # Safety
/// `out` must point to writable memory for one `NilsolOptions`.
#[no_mangle]
pub unsafe extern "C" fn nilsol_options_default(out: *mut NilsolOptions) -> c_int {
    if out.is_null() {
        return bad_argument("options pointer is null");
    }
    let d = RunOptions::default();
    unsafe {
        *out = NilsolOptions {
            samples: d.samples as u64,
            seed: d.seed,
            t_end: d.t_end,
            normalized: 0,
            force: 0,
            timing: 0,
        };
    }
    NILSOL_OK
}

/// Opens and validates a model file; on success stores a handle in `out`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable. The file
/// is re-read by each run call and must stay readable for the handle's life.
#[no_mangle]
pub unsafe extern "C" fn nilsol_model_open(
    path: *const c_char,
    out: *mut *mut NilsolModel,
) -> c_int {
    if path.is_null() || out.is_null() {
        return bad_argument("null path or output pointer");
    }
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(p) => PathBuf::from(p),
        Err(_) => return bad_argument("path is not valid UTF-8"),
    };
    match nilsol::model::read_model(&path).and_then(|m| m.to_structure()) {
        Ok(_) => {
            unsafe { *out = Box::into_raw(Box::new(NilsolModel { path })) };
            NILSOL_OK
        }
        Err(e) => fail(&e),
    }
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from `nilsol_model_open` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nilsol_model_free(model: *mut NilsolModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Releases a string returned by a run call. Null is ignored.
///
/// # Safety
/// `s` must come from a run call of this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nilsol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn with_model<F>(model: *const NilsolModel, out: *mut *mut c_char, f: F) -> c_int
where
    F: FnOnce(&PathBuf) -> nilsol::Result<String>,
{
    if model.is_null() || out.is_null() {
        return bad_argument("null model or output pointer");
    }
    let handle = unsafe { &*model };
    match f(&handle.path) {
        Ok(text) => unsafe { emit(out, text) },
        Err(e) => fail(&e),
    }
}

/// Structural validation report as JSON.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nilsol_run_check(
    model: *const NilsolModel,
    opts: *const NilsolOptions,
    out: *mut *mut c_char,
) -> c_int {
    let options = run_options(unsafe { opts.as_ref() });
    unsafe {
        with_model(model, out, |path| {
            Ok(report::to_json(&report::run_check(path, &options)?))
        })
    }
}

/// Curvature samples at a base point as JSON; `at` may be null for the
/// origin, otherwise it must hold `at_len` coordinates.
///
/// # Safety
/// `model` must be a live handle; `out` writable; `at` null or valid for
/// `at_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nilsol_run_curvature(
    model: *const NilsolModel,
    opts: *const NilsolOptions,
    at: *const c_double,
    at_len: usize,
    out: *mut *mut c_char,
) -> c_int {
    let mut options = run_options(unsafe { opts.as_ref() });
    if !at.is_null() && at_len > 0 {
        options.at = Some(unsafe { std::slice::from_raw_parts(at, at_len) }.to_vec());
    }
    unsafe {
        with_model(model, out, |path| {
            Ok(report::to_json(&report::run_curvature(path, &options)?))
        })
    }
}

/// Semialgebraic soliton fit as JSON.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nilsol_run_soliton(
    model: *const NilsolModel,
    opts: *const NilsolOptions,
    out: *mut *mut c_char,
) -> c_int {
    let options = run_options(unsafe { opts.as_ref() });
    unsafe {
        with_model(model, out, |path| {
            Ok(report::to_json(&report::run_soliton(path, &options)?))
        })
    }
}

/// Ricci-flow integration report as JSON.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nilsol_run_flow(
    model: *const NilsolModel,
    opts: *const NilsolOptions,
    out: *mut *mut c_char,
) -> c_int {
    let options = run_options(unsafe { opts.as_ref() });
    unsafe {
        with_model(model, out, |path| {
            Ok(report::to_json(&report::run_flow(path, &options)?))
        })
    }
}

/// Aggregate report (check, curvature, soliton, flow) as JSON.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nilsol_run_report(
    model: *const NilsolModel,
    opts: *const NilsolOptions,
    out: *mut *mut c_char,
) -> c_int {
    let options = run_options(unsafe { opts.as_ref() });
    unsafe {
        with_model(model, out, |path| {
            Ok(report::to_json(&report::run_full(path, &options)?))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn c_path(name: &str) -> CString {
        let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../catalog")
            .join(name);
        CString::new(p.to_str().unwrap()).unwrap()
    }

    fn fixture(name: &str) -> CString {
        let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../core/tests/fixtures")
            .join(name);
        CString::new(p.to_str().unwrap()).unwrap()
    }

    unsafe fn open(path: &CString) -> *mut NilsolModel {
        let mut handle = ptr::null_mut();
        let code = nilsol_model_open(path.as_ptr(), &mut handle);
        assert_eq!(code, NILSOL_OK);
        handle
    }

    unsafe fn take(out: *mut c_char) -> String {
        let s = CStr::from_ptr(out).to_str().unwrap().to_string();
        nilsol_string_free(out);
        s
    }

    #[test]
    fn check_on_catalog_model_succeeds() {
        unsafe {
            let path = c_path("heisenberg3-killing.json");
            let model = open(&path);
            let mut out = ptr::null_mut();
            let code = nilsol_run_check(model, ptr::null(), &mut out);
            assert_eq!(code, NILSOL_OK);
            let text = take(out);
            let json: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(json["check"]["killing"]["pass"], true);
            nilsol_model_free(model);
        }
    }

    #[test]
    fn soliton_reruns_are_byte_identical_and_respect_options() {
        unsafe {
            let path = c_path("heisenberg3-killing.json");
            let model = open(&path);
            let mut opts = NilsolOptions {
                samples: 0,
                seed: 0,
                t_end: 0.0,
                normalized: 0,
                force: 0,
                timing: 0,
            };
            assert_eq!(nilsol_options_default(&mut opts), NILSOL_OK);
            opts.samples = 16;
            let mut first = ptr::null_mut();
            let mut second = ptr::null_mut();
            assert_eq!(nilsol_run_soliton(model, &opts, &mut first), NILSOL_OK);
            assert_eq!(nilsol_run_soliton(model, &opts, &mut second), NILSOL_OK);
            let (a, b) = (take(first), take(second));
            assert_eq!(a, b);
            let json: serde_json::Value = serde_json::from_str(&a).unwrap();
            assert_eq!(json["meta"]["samples"], 16);
            nilsol_model_free(model);
        }
    }

    #[test]
    fn input_errors_carry_code_two_and_a_message() {
        unsafe {
            let path = CString::new("/nonexistent/model.json").unwrap();
            let mut handle = ptr::null_mut();
            let code = nilsol_model_open(path.as_ptr(), &mut handle);
            assert_eq!(code, NILSOL_ERR_INPUT);
            let msg = CStr::from_ptr(nilsol_last_error()).to_str().unwrap();
            assert!(!msg.is_empty());
        }
    }

    #[test]
    fn numerical_errors_carry_code_three() {
        unsafe {
            let path = c_path("abelian3-riemannian.json");
            let model = open(&path);
            let mut opts = NilsolOptions {
                samples: 0,
                seed: 0,
                t_end: 0.0,
                normalized: 0,
                force: 0,
                timing: 0,
            };
            assert_eq!(nilsol_options_default(&mut opts), NILSOL_OK);
            opts.t_end = -1.0;
            let mut out = ptr::null_mut();
            let code = nilsol_run_flow(model, &opts, &mut out);
            assert_eq!(code, NILSOL_ERR_NUMERICAL);
            let msg = CStr::from_ptr(nilsol_last_error()).to_str().unwrap();
            assert!(msg.contains("flow horizon"), "{msg}");
            nilsol_model_free(model);
        }
    }

    #[test]
    fn non_killing_models_need_force() {
        unsafe {
            let path = fixture("non_killing.json");
            let model = open(&path);
            let mut out = ptr::null_mut();
            let refused = nilsol_run_soliton(model, ptr::null(), &mut out);
            assert_eq!(refused, NILSOL_ERR_INPUT);
            let msg = CStr::from_ptr(nilsol_last_error()).to_str().unwrap();
            assert!(msg.contains("not Killing"), "{msg}");
            let opts = NilsolOptions {
                samples: 0,
                seed: 0,
                t_end: 0.0,
                normalized: 0,
                force: 1,
                timing: 0,
            };
            assert_eq!(nilsol_run_soliton(model, &opts, &mut out), NILSOL_OK);
            let text = take(out);
            let json: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(json["soliton"]["killing"]["forced"], true);
            nilsol_model_free(model);
        }
    }

    #[test]
    fn null_arguments_are_rejected_with_code_four() {
        unsafe {
            let mut out = ptr::null_mut();
            assert_eq!(
                nilsol_run_check(ptr::null(), ptr::null(), &mut out),
                NILSOL_ERR_ARGUMENT
            );
            let mut handle = ptr::null_mut();
            assert_eq!(
                nilsol_model_open(ptr::null(), &mut handle),
                NILSOL_ERR_ARGUMENT
            );
            assert_eq!(nilsol_options_default(ptr::null_mut()), NILSOL_ERR_ARGUMENT);
        }
    }
}
