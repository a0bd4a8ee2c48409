//! C ABI for `nbcss`.
//!
//! Every fallible function returns an [`NbcssStatus`]; on failure the
//! message is available from [`nbcss_last_error`] on the same thread.
//! Codes and decoders are opaque heap handles released with their `_free`
//! functions. The generated header is `include/nbcss.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::Arc;

use nbcss::channel::{ChannelMode, ErrorVector, ParityMaps};
use nbcss::decoder::{DecodeStatus, Decoder, DecoderConfig};
use nbcss::harness::{limit_point, simulate, verify_matrices, SimConfig};
use nbcss::{CssCodePair, Error, FieldSpec, QcParams, Role};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NbcssStatus {
    Ok = 0,
    /// Null pointer, bad enum value, buffer of the wrong size.
    InvalidArgument = 1,
    /// Field or QC parameters rejected.
    InvalidParams = 2,
    ParseError = 3,
    IoError = 4,
    /// The matrices are not orthogonal.
    NotOrthogonal = 5,
    /// A numeric argument is outside its domain.
    DomainError = 6,
    DimensionMismatch = 7,
    NumericError = 8,
    /// A panic was caught at the boundary.
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NbcssRole {
    C = 0,
    D = 1,
}

impl From<NbcssRole> for Role {
    fn from(r: NbcssRole) -> Role {
        match r {
            NbcssRole::C => Role::C,
            NbcssRole::D => Role::D,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NbcssChannelMode {
    Independent = 0,
    Joint = 1,
}

/// Opaque code pair.
pub struct NbcssCode {
    inner: CssCodePair,
}

/// Opaque decoder bound to one constituent code.
pub struct NbcssDecoder {
    inner: Decoder,
    maps: ParityMaps,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NbcssDims {
    pub p: u32,
    /// Checks per constituent code, M.
    pub n_checks: usize,
    /// Symbols per block, N.
    pub n_symbols: usize,
    /// pN.
    pub n_qubits: usize,
    pub classical_rate: f64,
    pub quantum_rate: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NbcssDecodeResult {
    pub success: bool,
    pub iterations: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NbcssSimRecord {
    pub f_m: f64,
    pub role: u32,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub mean_iterations: f64,
    pub fail_count: u64,
    pub mismatch_count: u64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NbcssLimits {
    pub f_m: f64,
    pub shannon: f64,
    pub s2: f64,
    pub bdd: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NbcssStatus {
    match e {
        Error::DegreeOutOfRange(_) | Error::NonPrimitivePolynomial { .. } | Error::InvalidParams(_) | Error::TrivialOnly => NbcssStatus::InvalidParams,
        Error::ParseError { .. } | Error::FieldMismatch(_) => NbcssStatus::ParseError,
        Error::Io(_) => NbcssStatus::IoError,
        Error::OrthogonalityBroken | Error::ClosureViolation(_) | Error::NotACycle { .. } => NbcssStatus::NotOrthogonal,
        Error::DomainError(_) | Error::DivisionByZero => NbcssStatus::DomainError,
        Error::DimensionMismatch(_) | Error::LengthMismatch { .. } => NbcssStatus::DimensionMismatch,
        Error::NonFiniteMessage(_) | Error::SingularMap => NbcssStatus::NumericError,
    }
}

struct Fail(NbcssStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Fail {
    Fail(NbcssStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NbcssStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            NbcssStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside nbcss");
            NbcssStatus::Internal
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, expected: usize, what: &str) -> Result<&'a [T], Fail> {
    if len != expected {
        return Err(Fail(NbcssStatus::DimensionMismatch, format!("{what} has length {len}, expected {expected}")));
    }
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, expected: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len != expected {
        return Err(Fail(NbcssStatus::DimensionMismatch, format!("{what} has length {len}, expected {expected}")));
    }
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nbcss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nbcss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Constructs a code pair over GF(2^p) with J = 2. `poly` = 0 selects the
/// built-in primitive polynomial.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to free
/// with [`nbcss_code_free`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nbcss_code_construct(
    p: u32,
    poly: u32,
    l: usize,
    circulant: u64,
    sigma: u64,
    tau: u64,
    seed: u64,
    reject_trivial: bool,
    out: *mut *mut NbcssCode,
) -> NbcssStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let field = Arc::new(FieldSpec::new(p, (poly != 0).then_some(poly))?);
        let code = CssCodePair::construct(QcParams::new(2, l, circulant, sigma, tau), field, seed, reject_trivial)?;
        *out = Box::into_raw(Box::new(NbcssCode { inner: code }));
        Ok(())
    })
}

/// Loads a pair from two NBQC files.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nbcss_code_load(gamma_path: *const c_char, delta_path: *const c_char, out: *mut *mut NbcssCode) -> NbcssStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let code = CssCodePair::load(path_arg(gamma_path, "gamma_path")?, path_arg(delta_path, "delta_path")?)?;
        *out = Box::into_raw(Box::new(NbcssCode { inner: code }));
        Ok(())
    })
}

/// Writes `<prefix>.gamma.nbqc` and `<prefix>.delta.nbqc`.
///
/// # Safety
/// `code` must be a live handle and `prefix` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nbcss_code_save(code: *const NbcssCode, prefix: *const c_char) -> NbcssStatus {
    guard(|| {
        let code = code.as_ref().ok_or_else(|| invalid("code is null"))?;
        let prefix = path_arg(prefix, "prefix")?;
        let prefix = prefix.to_str().ok_or_else(|| invalid("prefix is not UTF-8"))?;
        code.inner.write_files(prefix)?;
        Ok(())
    })
}

/// Releases a code handle. Null is ignored.
///
/// # Safety
/// `code` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nbcss_code_free(code: *mut NbcssCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// # Safety
/// `code` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nbcss_code_dims(code: *const NbcssCode, out: *mut NbcssDims) -> NbcssStatus {
    guard(|| {
        let code = &code.as_ref().ok_or_else(|| invalid("code is null"))?.inner;
        *out_ref(out, "out")? = NbcssDims {
            p: code.p(),
            n_checks: code.gamma.n_rows(),
            n_symbols: code.n_symbols(),
            n_qubits: code.n_qubits(),
            classical_rate: code.classical_rate(),
            quantum_rate: code.quantum_rate(),
        };
        Ok(())
    })
}

/// Runs the structural checks; `all_passed` receives the verdict.
///
/// # Safety
/// `code` and `all_passed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nbcss_code_verify(code: *const NbcssCode, all_passed: *mut bool) -> NbcssStatus {
    guard(|| {
        let code = &code.as_ref().ok_or_else(|| invalid("code is null"))?.inner;
        let report = verify_matrices(&code.gamma, &code.delta, &code.params);
        *out_ref(all_passed, "all_passed")? = report.all_passed();
        Ok(())
    })
}

/// Syndrome of an N-symbol error for one role; `syndrome` holds M symbols.
///
/// # Safety
/// Buffers must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn nbcss_code_syndrome(
    code: *const NbcssCode,
    role: NbcssRole,
    error: *const u16,
    n: usize,
    syndrome: *mut u16,
    m: usize,
) -> NbcssStatus {
    guard(|| {
        let code = &code.as_ref().ok_or_else(|| invalid("code is null"))?.inner;
        let e = slice_arg(error, n, code.n_symbols(), "error")?;
        let s = slice_out(syndrome, m, code.gamma.n_rows(), "syndrome")?;
        let ev = ErrorVector {
            p: code.p(),
            symbols: e.to_vec(),
        };
        let syn = ParityMaps::new(code, role.into()).syndrome(&ev)?;
        s.copy_from_slice(&syn.symbols);
        Ok(())
    })
}

/// Creates a decoder for one constituent code. The decoder copies what it
/// needs; the code handle may be freed afterwards.
///
/// # Safety
/// `code` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nbcss_decoder_new(code: *const NbcssCode, role: NbcssRole, max_iter: u32, out: *mut *mut NbcssDecoder) -> NbcssStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let code = &code.as_ref().ok_or_else(|| invalid("code is null"))?.inner;
        let maps = ParityMaps::new(code, role.into());
        let inner = Decoder::from_maps(&maps, DecoderConfig::with_max_iter(max_iter as usize))?;
        *out = Box::into_raw(Box::new(NbcssDecoder { inner, maps }));
        Ok(())
    })
}

/// # Safety
/// `decoder` must come from [`nbcss_decoder_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nbcss_decoder_free(decoder: *mut NbcssDecoder) {
    if !decoder.is_null() {
        drop(Box::from_raw(decoder));
    }
}

/// Decodes an M-symbol syndrome. On success `estimate` receives N symbols;
/// on decoder failure it is zero-filled and `result.success` is false.
///
/// # Safety
/// Buffers must hold the stated number of elements; a decoder must not be
/// used from two threads at once.
#[no_mangle]
pub unsafe extern "C" fn nbcss_decoder_decode(
    decoder: *mut NbcssDecoder,
    syndrome: *const u16,
    m: usize,
    f_m: f64,
    estimate: *mut u16,
    n: usize,
    result: *mut NbcssDecodeResult,
) -> NbcssStatus {
    guard(|| {
        let dec = decoder.as_mut().ok_or_else(|| invalid("decoder is null"))?;
        let s = slice_arg(syndrome, m, dec.maps.n_rows(), "syndrome")?;
        let est = slice_out(estimate, n, dec.maps.n_cols(), "estimate")?;
        let result = out_ref(result, "result")?;
        let out = dec.inner.decode(s, f_m)?;
        match &out.estimate {
            Some(e) => est.copy_from_slice(e),
            None => est.fill(0),
        }
        *result = NbcssDecodeResult {
            success: out.status == DecodeStatus::Success,
            iterations: out.iterations as u32,
        };
        Ok(())
    })
}

/// Monte Carlo estimate at one flip rate. `records` receives two entries,
/// role C (0) then role D (1). `workers` = 0 uses the environment default.
///
/// # Safety
/// `code` must be valid and `records` must point to two elements.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nbcss_simulate(
    code: *const NbcssCode,
    f_m: f64,
    trials: u64,
    max_iter: u32,
    seed: u64,
    mode: NbcssChannelMode,
    count_syndrome_only: bool,
    workers: u32,
    records: *mut NbcssSimRecord,
) -> NbcssStatus {
    guard(|| {
        let code = &code.as_ref().ok_or_else(|| invalid("code is null"))?.inner;
        let out = slice_out(records, 2, 2, "records")?;
        let cfg = SimConfig {
            f_m: vec![f_m],
            trials,
            max_iter: max_iter as usize,
            seed,
            mode: match mode {
                NbcssChannelMode::Independent => ChannelMode::Independent,
                NbcssChannelMode::Joint => ChannelMode::Joint,
            },
            count_syndrome_only,
            workers: (workers > 0).then_some(workers as usize),
        };
        for (slot, r) in out.iter_mut().zip(simulate(code, &cfg)?) {
            *slot = NbcssSimRecord {
                f_m: r.f_m,
                role: match r.role {
                    Role::C => 0,
                    Role::D => 1,
                },
                trials: r.trials,
                block_errors: r.block_errors,
                bler: r.bler,
                mean_iterations: r.mean_iterations,
                fail_count: r.fail_count,
                mismatch_count: r.mismatch_count,
                seed: r.seed,
            };
        }
        Ok(())
    })
}

/// Rate limits at `f_m` in [0, 1/3).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nbcss_limits(f_m: f64, out: *mut NbcssLimits) -> NbcssStatus {
    guard(|| {
        let p = limit_point(f_m)?;
        *out_ref(out, "out")? = NbcssLimits {
            f_m: p.f_m,
            shannon: p.shannon,
            s2: p.s2,
            bdd: p.bdd,
        };
        Ok(())
    })
}
