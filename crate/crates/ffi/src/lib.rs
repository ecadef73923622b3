//! C interface to qmind.
//!
//! Every fallible function returns a [`QmStatus`]. On failure the message is kept
//! per thread and can be read with [`qm_last_error`]. Objects are opaque handles
//! released with their `_free` function; strings and byte buffers handed out by the
//! library must go back through [`qm_string_free`] and [`qm_bytes_free`].
//!
//! Array outputs follow one pattern: the caller passes a buffer and its length,
//! the library stores the required length in `*written`, and fills the buffer only
//! when it is large enough (otherwise `QM_STATUS_BUFFER_TOO_SMALL`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qmind::boolexpr::Cnf3Expression;
use qmind::qlc;
use qmind::qsim::{self, Circuit, ShotHistogram};
use qmind::sonify;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Expression = 3,
    Parse = 4,
    Compile = 5,
    Simulation = 6,
    Sonify = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A circuit: gates, register sizes and terminal measurements.
pub struct QmCircuit(Circuit);

/// Measurement counts from a sampled circuit.
pub struct QmHistogram(ShotHistogram);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QmStatus, String);

impl From<qmind::Error> for Failure {
    fn from(e: qmind::Error) -> Self {
        let status = match e.kind() {
            "expression" => QmStatus::Expression,
            "parse" => QmStatus::Parse,
            "simulation" => QmStatus::Simulation,
            "sonify" => QmStatus::Sonify,
            _ => QmStatus::Compile,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! impl_failure {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                qmind::Error::from(e).into()
            }
        }
    )*};
}
impl_failure!(
    qsim::SimError,
    qlc::QlcError,
    qmind::boolexpr::ExprError,
    sonify::SonifyError
);

type Outcome = Result<(), Failure>;

fn null() -> Failure {
    Failure(QmStatus::NullPointer, "null pointer argument".into())
}

/// Runs `f`, recording any error or panic for `qm_last_error`.
fn guard(f: impl FnOnce() -> Outcome) -> QmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QmStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(QmStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Outcome {
    let c = CString::new(s).map_err(|e| Failure(QmStatus::Compile, e.to_string()))?;
    put(out, c.into_raw())
}

unsafe fn put_slice<T: Copy>(
    values: &[T],
    buf: *mut T,
    len: usize,
    written: *mut usize,
) -> Outcome {
    put(written, values.len())?;
    if len < values.len() {
        return Err(Failure(
            QmStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(null());
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

unsafe fn put_circuit(out: *mut *mut QmCircuit, c: Circuit) -> Outcome {
    put(out, Box::into_raw(Box::new(QmCircuit(c))))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn qm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Compiles a three-clause expression such as `(A|B)&(~B|~C)&(A|C)` into a Grover
/// circuit with `k` iterations.
///
/// # Safety
/// `expression` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_compile_expression(
    expression: *const c_char,
    k: usize,
    out: *mut *mut QmCircuit,
) -> QmStatus {
    guard(|| {
        let expr: Cnf3Expression = text(expression)?.parse()?;
        put_circuit(out, qlc::compile_grover(&expr, k)?.circuit)
    })
}

/// Satisfying assignments of a three-clause expression, as integers with A in bit 0.
///
/// # Safety
/// `expression` must be a NUL-terminated string; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qm_satisfying_assignments(
    expression: *const c_char,
    buf: *mut u64,
    len: usize,
    written: *mut usize,
) -> QmStatus {
    guard(|| {
        let expr: Cnf3Expression = text(expression)?.parse()?;
        put_slice(&expr.satisfying_set(), buf, len, written)
    })
}

/// # Safety
/// `program` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_parse_quil(
    program: *const c_char,
    out: *mut *mut QmCircuit,
) -> QmStatus {
    guard(|| put_circuit(out, qlc::parse_quil(text(program)?)?))
}

/// # Safety
/// `program` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_parse_openqasm(
    program: *const c_char,
    out: *mut *mut QmCircuit,
) -> QmStatus {
    guard(|| put_circuit(out, qlc::parse_openqasm(text(program)?)?))
}

/// # Safety
/// `circuit` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn qm_circuit_free(circuit: *mut QmCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_circuit_qubit_count(
    circuit: *const QmCircuit,
    out: *mut usize,
) -> QmStatus {
    guard(|| put(out, handle(circuit)?.0.qubit_count()))
}

/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_circuit_gate_count(
    circuit: *const QmCircuit,
    out: *mut usize,
) -> QmStatus {
    guard(|| put(out, handle(circuit)?.0.ops().len()))
}

/// Quil text; free with `qm_string_free`.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_circuit_emit_quil(
    circuit: *const QmCircuit,
    out: *mut *mut c_char,
) -> QmStatus {
    guard(|| put_string(out, qlc::emit_quil(&handle(circuit)?.0)?))
}

/// OpenQASM 2.0 text; free with `qm_string_free`.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_circuit_emit_openqasm(
    circuit: *const QmCircuit,
    out: *mut *mut c_char,
) -> QmStatus {
    guard(|| {
        let lowered = qlc::lower_for_qasm(&handle(circuit)?.0)?;
        put_string(out, qlc::emit_openqasm(&lowered)?)
    })
}

/// New circuit using only RX, RZ and CZ.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_circuit_transpile(
    circuit: *const QmCircuit,
    out: *mut *mut QmCircuit,
) -> QmStatus {
    guard(|| put_circuit(out, qlc::transpile(&handle(circuit)?.0)?))
}

/// Exact probability of each classical register value.
///
/// # Safety
/// `circuit` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qm_circuit_probabilities(
    circuit: *const QmCircuit,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> QmStatus {
    guard(|| {
        let d = handle(circuit)?.0.outcome_distribution()?;
        put_slice(&d, buf, len, written)
    })
}

/// Samples `shots` measurements; the same seed gives the same histogram.
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_run(
    circuit: *const QmCircuit,
    shots: u64,
    seed: u64,
    out: *mut *mut QmHistogram,
) -> QmStatus {
    guard(|| {
        let h = qsim::run_circuit(&handle(circuit)?.0, shots, seed)?;
        put(out, Box::into_raw(Box::new(QmHistogram(h))))
    })
}

/// # Safety
/// `histogram` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn qm_histogram_free(histogram: *mut QmHistogram) {
    if !histogram.is_null() {
        drop(Box::from_raw(histogram));
    }
}

/// # Safety
/// `histogram` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_histogram_shots(
    histogram: *const QmHistogram,
    out: *mut u64,
) -> QmStatus {
    guard(|| put(out, handle(histogram)?.0.shots))
}

/// Count of every register value, zeros included.
///
/// # Safety
/// `histogram` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qm_histogram_counts(
    histogram: *const QmHistogram,
    buf: *mut u64,
    len: usize,
    written: *mut usize,
) -> QmStatus {
    guard(|| put_slice(&handle(histogram)?.0.dense_counts(), buf, len, written))
}

/// `{"counts": {...}, "shots": n}`; free with `qm_string_free`.
///
/// # Safety
/// `histogram` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_histogram_to_json(
    histogram: *const QmHistogram,
    out: *mut *mut c_char,
) -> QmStatus {
    guard(|| {
        let json = serde_json::to_string(&handle(histogram)?.0)
            .map_err(|e| Failure(QmStatus::Compile, e.to_string()))?;
        put_string(out, json)
    })
}

/// Renders the histogram as a 16-bit mono WAV file image. `freqs` may be NULL for
/// the default eight frequencies. Free the bytes with `qm_bytes_free`.
///
/// # Safety
/// `histogram` must be a live handle; `freqs` must hold `n_freqs` values unless
/// NULL; `out` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qm_histogram_wav(
    histogram: *const QmHistogram,
    freqs: *const f64,
    n_freqs: usize,
    duration_s: f64,
    sample_rate: u32,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> QmStatus {
    guard(|| {
        let h = &handle(histogram)?.0;
        let freqs = if freqs.is_null() {
            sonify::DEFAULT_FREQS.to_vec()
        } else {
            std::slice::from_raw_parts(freqs, n_freqs).to_vec()
        };
        let bank = sonify::histogram_to_bank(h, &freqs)?;
        let spec = sonify::SoundSpec {
            duration_s,
            sample_rate,
        };
        let bytes = sonify::wav_bytes(&sonify::synthesize(&bank, &spec)?).into_boxed_slice();
        if out.is_null() {
            return Err(null());
        }
        put(out_len, bytes.len())?;
        put(out, Box::into_raw(bytes).cast::<u8>())
    })
}

/// # Safety
/// `s` must come from this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn qm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `bytes` and `len` must be exactly what the library returned. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn qm_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}
