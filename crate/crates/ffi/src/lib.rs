//! C interface to the seqc compiler.
//!
//! Objects are opaque handles created by `seqc_*` constructors and released
//! with the matching `*_free`. Every fallible call returns a [`SeqcStatus`];
//! on failure, [`seqc_last_error`] describes the problem until the next call
//! on the same thread. Strings returned to the caller are freed with
//! [`seqc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seqc_core::bench::{BenchSpec, Family};
use seqc_core::circuit::Circuit;
use seqc_core::compiled::{CompiledCircuit, Pipeline};
use seqc_core::device::{generate_backend, Backend};
use seqc_core::elaborate::elaborate;
use seqc_core::metrics::{EspOptions, MetricsReport};
use seqc_core::pipeline::{compile, CompileConfig};
use seqc_core::stratify::{stratify, StratifiedCircuit, StratifyConfig};
use seqc_core::verify::{statevector_equiv, verify_compiled};
use seqc_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    VerificationFailed = 3,
    Unsupported = 4,
    Capacity = 5,
    Io = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqcPipeline {
    Baseline = 0,
    Seqc = 1,
}

/// Figures of merit; timing fields are negative when not applicable.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeqcMetrics {
    pub esp: f64,
    pub exec_time_ns: f64,
    pub inter_chiplet_gates: u64,
    pub depth: u64,
    pub gate_count: u64,
    pub stratify_time_s: f64,
    pub elaborate_time_s: f64,
    pub solve_time_s: f64,
}

pub struct SeqcBackend(Backend);
pub struct SeqcCircuit(Circuit);
pub struct SeqcStratified(StratifiedCircuit);
pub struct SeqcCompiled {
    inner: CompiledCircuit,
    metrics_times: Option<(Option<f64>, Option<f64>, f64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SeqcStatus {
    match e {
        Error::Verification(_) => SeqcStatus::VerificationFailed,
        Error::Unsupported(_) => SeqcStatus::Unsupported,
        Error::Capacity(_) => SeqcStatus::Capacity,
        Error::Io(_) => SeqcStatus::Io,
        _ => SeqcStatus::InvalidInput,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, converting errors and panics into a status and last-error text.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SeqcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SeqcStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            SeqcStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            SeqcStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail::Core(Error::InvalidInput(format!("{what} is not UTF-8: {e}"))))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("output pointer"));
    }
    *out = CString::new(s)
        .map_err(|e| Fail::Core(Error::InvalidInput(e.to_string())))?
        .into_raw();
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next `seqc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn seqc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn seqc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn seqc_backend_generate(
    chiplets: u32,
    qubits_per_chiplet: u32,
    inter_penalty: f64,
    out: *mut *mut SeqcBackend,
) -> SeqcStatus {
    guard(|| put(out, SeqcBackend(generate_backend(chiplets, qubits_per_chiplet, inter_penalty)?)))
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_backend_from_json(
    json: *const c_char,
    out: *mut *mut SeqcBackend,
) -> SeqcStatus {
    guard(|| put(out, SeqcBackend(Backend::from_json(text(json, "json")?)?)))
}

/// # Safety
/// `b` must be a live backend handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_backend_to_json(
    b: *const SeqcBackend,
    out: *mut *mut c_char,
) -> SeqcStatus {
    guard(|| put_string(out, deref(b, "backend")?.0.to_json()?))
}

/// Returns 0 for a null handle.
///
/// # Safety
/// `b` must be null or a live backend handle.
#[no_mangle]
pub unsafe extern "C" fn seqc_backend_num_qubits(b: *const SeqcBackend) -> u32 {
    b.as_ref().map_or(0, |b| b.0.num_qubits())
}

/// # Safety
/// `b` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seqc_backend_free(b: *mut SeqcBackend) {
    free(b)
}

/// Generates a benchmark circuit. `family` is one of `ghz`, `bitcode`,
/// `phasecode`, `vqe`, `tfim`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_circuit_bench(
    family: *const c_char,
    n: u32,
    seed: u64,
    out: *mut *mut SeqcCircuit,
) -> SeqcStatus {
    guard(|| {
        let family: Family = text(family, "family")?.parse()?;
        put(out, SeqcCircuit(BenchSpec::new(family, n, seed).generate()?))
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_circuit_from_json(
    json: *const c_char,
    out: *mut *mut SeqcCircuit,
) -> SeqcStatus {
    guard(|| put(out, SeqcCircuit(Circuit::from_json(text(json, "json")?)?)))
}

/// # Safety
/// `c` must be a live circuit handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_circuit_to_json(
    c: *const SeqcCircuit,
    out: *mut *mut c_char,
) -> SeqcStatus {
    guard(|| put_string(out, deref(c, "circuit")?.0.to_json()?))
}

/// # Safety
/// `c` must be null or a live circuit handle.
#[no_mangle]
pub unsafe extern "C" fn seqc_circuit_num_qubits(c: *const SeqcCircuit) -> u32 {
    c.as_ref().map_or(0, |c| c.0.num_qubits)
}

/// # Safety
/// `c` must be null or a live circuit handle.
#[no_mangle]
pub unsafe extern "C" fn seqc_circuit_num_gates(c: *const SeqcCircuit) -> u64 {
    c.as_ref().map_or(0, |c| c.0.gates.len() as u64)
}

/// # Safety
/// `c` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seqc_circuit_free(c: *mut SeqcCircuit) {
    free(c)
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_stratify(
    c: *const SeqcCircuit,
    b: *const SeqcBackend,
    seed: u64,
    out: *mut *mut SeqcStratified,
) -> SeqcStatus {
    guard(|| {
        let st = stratify(&deref(c, "circuit")?.0, &deref(b, "backend")?.0, &StratifyConfig::default(), seed)?;
        put(out, SeqcStratified(st))
    })
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn seqc_stratified_num_events(s: *const SeqcStratified) -> u64 {
    s.as_ref().map_or(0, |s| s.0.events().len() as u64)
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_stratified_to_json(
    s: *const SeqcStratified,
    out: *mut *mut c_char,
) -> SeqcStatus {
    guard(|| put_string(out, deref(s, "stratified circuit")?.0.to_json()?))
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_stratified_from_json(
    json: *const c_char,
    out: *mut *mut SeqcStratified,
) -> SeqcStatus {
    guard(|| put(out, SeqcStratified(StratifiedCircuit::from_json(text(json, "json")?)?)))
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seqc_stratified_free(s: *mut SeqcStratified) {
    free(s)
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_elaborate(
    s: *const SeqcStratified,
    b: *const SeqcBackend,
    workers: u32,
    seed: u64,
    out: *mut *mut SeqcCompiled,
) -> SeqcStatus {
    guard(|| {
        let cc = elaborate(&deref(s, "stratified circuit")?.0, &deref(b, "backend")?.0, workers as usize, seed)?;
        put(out, SeqcCompiled { inner: cc, metrics_times: None })
    })
}

/// Compiles with either pipeline using default settings.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_compile(
    c: *const SeqcCircuit,
    b: *const SeqcBackend,
    pipeline: SeqcPipeline,
    workers: u32,
    seed: u64,
    out: *mut *mut SeqcCompiled,
) -> SeqcStatus {
    guard(|| {
        let p = match pipeline {
            SeqcPipeline::Baseline => Pipeline::Baseline,
            SeqcPipeline::Seqc => Pipeline::Seqc,
        };
        let res = compile(
            &deref(c, "circuit")?.0,
            &deref(b, "backend")?.0,
            p,
            &CompileConfig::default(),
            workers as usize,
            seed,
        )?;
        let t = res.times;
        put(out, SeqcCompiled { inner: res.compiled, metrics_times: Some((t.stratify_s, t.elaborate_s, t.solve_s)) })
    })
}

/// # Safety
/// `cc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_compiled_to_json(
    cc: *const SeqcCompiled,
    out: *mut *mut c_char,
) -> SeqcStatus {
    guard(|| put_string(out, deref(cc, "compiled circuit")?.inner.to_json()?))
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_compiled_from_json(
    json: *const c_char,
    out: *mut *mut SeqcCompiled,
) -> SeqcStatus {
    guard(|| {
        let cc = CompiledCircuit::from_json(text(json, "json")?)?;
        put(out, SeqcCompiled { inner: cc, metrics_times: None })
    })
}

/// # Safety
/// Handles must be live; `out` must point to a `SeqcMetrics`.
#[no_mangle]
pub unsafe extern "C" fn seqc_compiled_metrics(
    cc: *const SeqcCompiled,
    b: *const SeqcBackend,
    decoherence: bool,
    out: *mut SeqcMetrics,
) -> SeqcStatus {
    guard(|| {
        let cc = deref(cc, "compiled circuit")?;
        let m = MetricsReport::compute(&cc.inner, &deref(b, "backend")?.0, EspOptions { decoherence })?;
        let out = out.as_mut().ok_or(Fail::Null("output pointer"))?;
        let (st, el, so) = cc.metrics_times.unwrap_or((None, None, -1.0));
        *out = SeqcMetrics {
            esp: m.esp,
            exec_time_ns: m.exec_time_ns,
            inter_chiplet_gates: m.inter_chiplet_gates as u64,
            depth: m.depth as u64,
            gate_count: m.gate_count as u64,
            stratify_time_s: st.unwrap_or(-1.0),
            elaborate_time_s: el.unwrap_or(-1.0),
            solve_time_s: so,
        };
        Ok(())
    })
}

/// Structural validity plus permutation equivalence against `original`.
/// Returns `VerificationFailed` with a reason when they do not hold.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn seqc_verify(
    original: *const SeqcCircuit,
    cc: *const SeqcCompiled,
    b: *const SeqcBackend,
) -> SeqcStatus {
    guard(|| {
        verify_compiled(&deref(original, "circuit")?.0, &deref(cc, "compiled circuit")?.inner, &deref(b, "backend")?.0)?;
        Ok(())
    })
}

/// State fidelity between `original` and the compiled circuit (at most 14
/// active qubits, no measurement or reset).
///
/// # Safety
/// Handles must be live; `fidelity` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seqc_statevector_fidelity(
    original: *const SeqcCircuit,
    cc: *const SeqcCompiled,
    fidelity: *mut f64,
) -> SeqcStatus {
    guard(|| {
        let f = statevector_equiv(&deref(original, "circuit")?.0, &deref(cc, "compiled circuit")?.inner)?;
        *fidelity.as_mut().ok_or(Fail::Null("output pointer"))? = f;
        Ok(())
    })
}

/// # Safety
/// `cc` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seqc_compiled_free(cc: *mut SeqcCompiled) {
    free(cc)
}
