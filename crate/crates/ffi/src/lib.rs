//! C ABI for circlelab.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_parse` function and released by the matching `*_free`.
//! Fallible calls return a [`ClStatus`]; the message of the most recent error
//! on the calling thread is available through [`cl_last_error`].

use circlelab::circle::{Alphabet, CircleMap, Mat2};
use circlelab::experiment::{builtin_config, run_config, Config, LoadedConfig, Report};
use circlelab::near_identity::kappa_m_solve;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input was rejected: bad config, generator, word or argument.
    InvalidInput = 3,
    /// A numerical routine failed on valid input.
    Numerical = 4,
    /// An output buffer was too small.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// A parsed experiment config.
pub struct ClConfig {
    loaded: LoadedConfig,
}

/// The report of one scenario run.
pub struct ClReport {
    report: Report,
    json: CString,
}

/// A set of Möbius generators named `A`, `B`, … in order.
pub struct ClAlphabet {
    alphabet: Alphabet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: ClStatus, msg: impl Into<String>) -> ClStatus {
    set_error(msg);
    status
}

fn from_lib(e: circlelab::Error) -> ClStatus {
    let status = if e.is_config_error() { ClStatus::InvalidInput } else { ClStatus::Numerical };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`ClStatus::Panic`].
fn guard(f: impl FnOnce() -> ClStatus) -> ClStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        fail(ClStatus::Panic, msg)
    })
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, ClStatus> {
    if s.is_null() {
        return Err(fail(ClStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(ClStatus::InvalidUtf8, e.to_string()))
}

fn boxed<T>(out: *mut *mut T, value: T) -> ClStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    ClStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf`.
///
/// Returns the buffer size needed including the terminating NUL, or 0 when
/// there is no error. Nothing is written if `buf` is null or `len` is too small.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len >= bytes.len() {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
            }
            bytes.len()
        }
    })
}

/// Parses TOML config text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_config_parse(text: *const c_char, out: *mut *mut ClConfig) -> ClStatus {
    guard(|| {
        if out.is_null() {
            return fail(ClStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Config::parse(text) {
            Ok(loaded) => boxed(out, ClConfig { loaded }),
            Err(e) => from_lib(e),
        }
    })
}

/// Loads a bundled example config by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_config_builtin(name: *const c_char, out: *mut *mut ClConfig) -> ClStatus {
    guard(|| {
        let name = match read_str(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match builtin_config(name) {
            Some(text) => {
                let c = CString::new(text).expect("bundled configs contain no NUL");
                cl_config_parse(c.as_ptr(), out)
            }
            None => fail(ClStatus::InvalidInput, format!("no bundled example named `{name}`")),
        }
    })
}

/// # Safety
/// `config` must be null or come from `cl_config_parse`/`cl_config_builtin`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_config_free(config: *mut ClConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the config's scenario with the given seed and returns its report.
///
/// # Safety
/// `config` must be a live config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_run(config: *const ClConfig, seed: u64, out: *mut *mut ClReport) -> ClStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return fail(ClStatus::NullPointer, "null config or output pointer");
        }
        let (report, _) = match run_config(&(*config).loaded, Some(seed)) {
            Ok(r) => r,
            Err(e) => return from_lib(e),
        };
        let json = match serde_json::to_string_pretty(&report) {
            Ok(j) => CString::new(j).expect("JSON contains no NUL"),
            Err(e) => return fail(ClStatus::Numerical, e.to_string()),
        };
        boxed(out, ClReport { report, json })
    })
}

/// The report as JSON, owned by the report and valid until `cl_report_free`.
///
/// # Safety
/// `report` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn cl_report_json(report: *const ClReport) -> *const c_char {
    if report.is_null() {
        return ptr::null();
    }
    (*report).json.as_ptr()
}

/// 1 if every invariant of the report holds, 0 if one fails, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn cl_report_all_hold(report: *const ClReport) -> i32 {
    if report.is_null() {
        return -1;
    }
    (*report).report.all_hold() as i32
}

/// # Safety
/// `report` must be null or come from `cl_run`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_report_free(report: *mut ClReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Builds an alphabet from `count` row-major 2×2 matrices stored back to back.
///
/// # Safety
/// `matrices` must point to `4 * count` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_alphabet_new(matrices: *const f64, count: usize, out: *mut *mut ClAlphabet) -> ClStatus {
    guard(|| {
        if matrices.is_null() || out.is_null() {
            return fail(ClStatus::NullPointer, "null matrices or output pointer");
        }
        let raw = std::slice::from_raw_parts(matrices, 4 * count);
        let mats: Vec<Mat2> = raw.chunks_exact(4).map(|m| Mat2::new(m[0], m[1], m[2], m[3])).collect();
        match Alphabet::from_matrices(&mats) {
            Ok(alphabet) => boxed(out, ClAlphabet { alphabet }),
            Err(e) => from_lib(e),
        }
    })
}

/// # Safety
/// `alphabet` must be null or come from `cl_alphabet_new`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cl_alphabet_free(alphabet: *mut ClAlphabet) {
    if !alphabet.is_null() {
        drop(Box::from_raw(alphabet));
    }
}

/// Value and first three derivatives of a word such as `"A B^-1"` at `x`.
///
/// # Safety
/// `alphabet` must be a live handle, `word` a NUL-terminated string and `jet` point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cl_word_jet(alphabet: *const ClAlphabet, word: *const c_char, x: f64, jet: *mut f64) -> ClStatus {
    guard(|| {
        if alphabet.is_null() || jet.is_null() {
            return fail(ClStatus::NullPointer, "null alphabet or output pointer");
        }
        let a = &(*alphabet).alphabet;
        let text = match read_str(word) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let w = match a.parse_word(text) {
            Ok(w) => w,
            Err(e) => return from_lib(e),
        };
        let j = a.word_map(w.letters()).jet(x);
        let out = std::slice::from_raw_parts_mut(jet, 4);
        out.copy_from_slice(&[j.value, j.d1, j.d2, j.d3]);
        ClStatus::Ok
    })
}

/// Smaller positive root of `κ^{1/τ} e^{-κ} = gap`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_kappa_m_solve(gap: f64, tau: f64, out: *mut f64) -> ClStatus {
    guard(|| {
        if out.is_null() {
            return fail(ClStatus::NullPointer, "null output pointer");
        }
        match kappa_m_solve(gap, tau) {
            Ok(k) => {
                *out = k;
                ClStatus::Ok
            }
            Err(e) => from_lib(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let n = unsafe { cl_last_error(ptr::null_mut(), 0) };
        let mut buf = vec![0 as c_char; n];
        unsafe { cl_last_error(buf.as_mut_ptr(), n) };
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn version_matches_the_package() {
        let v = unsafe { CStr::from_ptr(cl_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn bad_config_reports_the_key() {
        let text = CString::new("name = \"x\"\nscenario = \"stationary\"\n").unwrap();
        let mut cfg = ptr::null_mut();
        let status = unsafe { cl_config_parse(text.as_ptr(), &mut cfg) };
        assert_eq!(status, ClStatus::InvalidInput);
        assert!(cfg.is_null());
        assert!(last_error().contains("generators") || last_error().contains("weights"));
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut cfg = ptr::null_mut();
        assert_eq!(unsafe { cl_config_parse(ptr::null(), &mut cfg) }, ClStatus::NullPointer);
        assert_eq!(unsafe { cl_kappa_m_solve(0.1, 1.0, ptr::null_mut()) }, ClStatus::NullPointer);
        assert_eq!(unsafe { cl_report_all_hold(ptr::null()) }, -1);
        unsafe { cl_config_free(ptr::null_mut()) };
    }

    #[test]
    fn run_small_config() {
        let text = CString::new(
            r#"
name = "small"
scenario = "stationary"
weights = "uniform"

[[generators]]
name = "S"
matrix = [0.5, 0.8660254037844386, -0.8660254037844386, 0.5]

[stationary]
grid_size = 256
"#,
        )
        .unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(unsafe { cl_config_parse(text.as_ptr(), &mut cfg) }, ClStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(unsafe { cl_run(cfg, 5, &mut report) }, ClStatus::Ok);
        assert_eq!(unsafe { cl_report_all_hold(report) }, 1);
        let json = unsafe { CStr::from_ptr(cl_report_json(report)) }.to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(json).unwrap();
        assert_eq!(v["seed"], 5);
        unsafe {
            cl_report_free(report);
            cl_config_free(cfg);
        }
    }

    #[test]
    fn builtin_lookup() {
        let mut cfg = ptr::null_mut();
        let name = CString::new("sanov").unwrap();
        assert_eq!(unsafe { cl_config_builtin(name.as_ptr(), &mut cfg) }, ClStatus::Ok);
        unsafe { cl_config_free(cfg) };
        let name = CString::new("nope").unwrap();
        assert_eq!(unsafe { cl_config_builtin(name.as_ptr(), &mut cfg) }, ClStatus::InvalidInput);
    }

    #[test]
    fn word_jets_and_kappa() {
        let mats = [1.0, 2.0, 0.0, 1.0, 1.0, 0.0, 2.0, 1.0];
        let mut a = ptr::null_mut();
        assert_eq!(unsafe { cl_alphabet_new(mats.as_ptr(), 2, &mut a) }, ClStatus::Ok);
        let mut jet = [0.0; 4];
        let w = CString::new("A").unwrap();
        assert_eq!(unsafe { cl_word_jet(a, w.as_ptr(), 0.5, jet.as_mut_ptr()) }, ClStatus::Ok);
        assert!((jet[0] - 0.5).abs() < 1e-14);
        let bad = CString::new("C").unwrap();
        assert_eq!(unsafe { cl_word_jet(a, bad.as_ptr(), 0.5, jet.as_mut_ptr()) }, ClStatus::InvalidInput);
        unsafe { cl_alphabet_free(a) };

        let mut k = 0.0;
        assert_eq!(unsafe { cl_kappa_m_solve(1e-3, 1.0, &mut k) }, ClStatus::Ok);
        assert!((k * (-k).exp() - 1e-3).abs() < 1e-15);
        assert_eq!(unsafe { cl_kappa_m_solve(0.5, 1.0, &mut k) }, ClStatus::Numerical);
        assert!(last_error().contains(">= 1"));
    }
}
