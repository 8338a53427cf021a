//! C interface to `gamma-models`.
//!
//! Tuples and dilation models are opaque handles created and released by this
//! library. Every fallible call returns a [`GmStatus`]; structured results are
//! handed out as JSON strings that the caller frees with [`gm_string_free`].
//! The message of the last error on the calling thread is available from
//! [`gm_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gamma_models::cli::{self, ModelChoice, RunConfig};
use gamma_models::fundops::Which;
use gamma_models::gammaclass::ClassLabel;
use gamma_models::models::{factorize, verify_model, DilationModel};
use gamma_models::{io, Error, Mat, OperatorTuple, C64};

/// Status codes. Values 1 to 25 mirror the library error codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NonFinite = 1,
    ArityTooSmall = 2,
    ArityMismatch = 3,
    DimensionMismatch = 4,
    InvalidParameter = 5,
    SampleBudgetExceeded = 6,
    NonCommuting = 7,
    TriangularizationFailed = 8,
    NotAContraction = 9,
    NotUnitary = 10,
    SpectrumOutsideDomain = 11,
    ResidualTooLarge = 12,
    CommutativityFailed = 13,
    NotAnIsometry = 14,
    TruncationHorizonTooSmall = 15,
    IterationDivergence = 16,
    IllDefinedQuotient = 17,
    TruncationInsufficient = 18,
    EvaluationSingular = 19,
    NotCnu = 20,
    GridInadequate = 21,
    NotMinimal = 22,
    IllConditionedGram = 23,
    Parse = 24,
    Io = 25,
    NullPointer = 100,
    InvalidUtf8 = 101,
    Panic = 102,
}

impl From<&Error> for GmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonFinite => GmStatus::NonFinite,
            Error::ArityTooSmall(_) => GmStatus::ArityTooSmall,
            Error::ArityMismatch { .. } => GmStatus::ArityMismatch,
            Error::DimensionMismatch(_) => GmStatus::DimensionMismatch,
            Error::InvalidParameter(_) => GmStatus::InvalidParameter,
            Error::SampleBudgetExceeded { .. } => GmStatus::SampleBudgetExceeded,
            Error::NonCommuting { .. } => GmStatus::NonCommuting,
            Error::TriangularizationFailed(_) => GmStatus::TriangularizationFailed,
            Error::NotAContraction(_) => GmStatus::NotAContraction,
            Error::NotUnitary(_) => GmStatus::NotUnitary,
            Error::SpectrumOutsideDomain { .. } => GmStatus::SpectrumOutsideDomain,
            Error::ResidualTooLarge { .. } => GmStatus::ResidualTooLarge,
            Error::CommutativityFailed(_) => GmStatus::CommutativityFailed,
            Error::NotAnIsometry(_) => GmStatus::NotAnIsometry,
            Error::TruncationHorizonTooSmall(_) => GmStatus::TruncationHorizonTooSmall,
            Error::IterationDivergence { .. } => GmStatus::IterationDivergence,
            Error::IllDefinedQuotient(_) => GmStatus::IllDefinedQuotient,
            Error::TruncationInsufficient { .. } => GmStatus::TruncationInsufficient,
            Error::EvaluationSingular { .. } => GmStatus::EvaluationSingular,
            Error::NotCnu(_) => GmStatus::NotCnu,
            Error::GridInadequate { .. } => GmStatus::GridInadequate,
            Error::NotMinimal(_) => GmStatus::NotMinimal,
            Error::IllConditionedGram => GmStatus::IllConditionedGram,
            Error::Parse(_) => GmStatus::Parse,
            Error::Io(_) => GmStatus::Io,
        }
    }
}

/// Class labels returned by [`gm_certify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmClassLabel {
    Contraction = 0,
    Isometry = 1,
    Unitary = 2,
    CoIsometry = 3,
    PureIsometry = 4,
    Refuted = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmWhich {
    Forward = 0,
    Adjoint = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmModelKind {
    Douglas = 0,
    NagyFoias = 1,
    Schaffer = 2,
}

/// Opaque commuting operator tuple.
pub struct GmTuple(OperatorTuple);

/// Opaque dilation model.
pub struct GmModel(DilationModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), GmStatus>>(f: F) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            GmStatus::Panic
        }
    }
}

fn lib<T>(r: gamma_models::Result<T>) -> Result<T, GmStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        GmStatus::from(&e)
    })
}

fn null() -> GmStatus {
    set_error("null pointer argument".into());
    GmStatus::NullPointer
}

unsafe fn tuple_ref<'a>(t: *const GmTuple) -> Result<&'a OperatorTuple, GmStatus> {
    t.as_ref().map(|t| &t.0).ok_or_else(null)
}

unsafe fn model_ref<'a>(m: *const GmModel) -> Result<&'a DilationModel, GmStatus> {
    m.as_ref().map(|m| &m.0).ok_or_else(null)
}

unsafe fn out_string<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), GmStatus> {
    if out.is_null() {
        return Err(null());
    }
    let s = lib(io::to_string(value))?;
    *out = CString::new(s).map_err(|_| GmStatus::InvalidUtf8)?.into_raw();
    Ok(())
}

unsafe fn in_str<'a>(s: *const c_char) -> Result<&'a str, GmStatus> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("input is not valid UTF-8".into());
        GmStatus::InvalidUtf8
    })
}

fn config(tol: f64, seed: u64) -> RunConfig {
    RunConfig {
        tol,
        seed,
        ..RunConfig::default()
    }
}

/// Message of the last failed call on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn gm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Stable snake_case name of a status code. Static storage.
#[no_mangle]
pub extern "C" fn gm_status_name(status: GmStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        GmStatus::Ok => b"ok\0",
        GmStatus::NullPointer => b"null_pointer\0",
        GmStatus::InvalidUtf8 => b"invalid_utf8\0",
        GmStatus::Panic => b"panic\0",
        GmStatus::NonFinite => b"non_finite\0",
        GmStatus::ArityTooSmall => b"arity_too_small\0",
        GmStatus::ArityMismatch => b"arity_mismatch\0",
        GmStatus::DimensionMismatch => b"dimension_mismatch\0",
        GmStatus::InvalidParameter => b"invalid_parameter\0",
        GmStatus::SampleBudgetExceeded => b"sample_budget_exceeded\0",
        GmStatus::NonCommuting => b"non_commuting\0",
        GmStatus::TriangularizationFailed => b"triangularization_failed\0",
        GmStatus::NotAContraction => b"not_a_contraction\0",
        GmStatus::NotUnitary => b"not_unitary\0",
        GmStatus::SpectrumOutsideDomain => b"spectrum_outside_domain\0",
        GmStatus::ResidualTooLarge => b"residual_too_large\0",
        GmStatus::CommutativityFailed => b"commutativity_failed\0",
        GmStatus::NotAnIsometry => b"not_an_isometry\0",
        GmStatus::TruncationHorizonTooSmall => b"truncation_horizon_too_small\0",
        GmStatus::IterationDivergence => b"iteration_divergence\0",
        GmStatus::IllDefinedQuotient => b"ill_defined_quotient\0",
        GmStatus::TruncationInsufficient => b"truncation_insufficient\0",
        GmStatus::EvaluationSingular => b"evaluation_singular\0",
        GmStatus::NotCnu => b"not_cnu\0",
        GmStatus::GridInadequate => b"grid_inadequate\0",
        GmStatus::NotMinimal => b"not_minimal\0",
        GmStatus::IllConditionedGram => b"ill_conditioned_gram\0",
        GmStatus::Parse => b"parse\0",
        GmStatus::Io => b"io\0",
    };
    s.as_ptr() as *const c_char
}

/// Builds a tuple from `n` row-major `dim × dim` matrices stored as interleaved
/// `(re, im)` doubles: `data` holds `n·dim·dim·2` values.
///
/// # Safety
/// `data` must point to that many doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gm_tuple_new(n: usize, dim: usize, data: *const f64, out: *mut *mut GmTuple) -> GmStatus {
    guard(|| {
        if out.is_null() || (data.is_null() && n * dim > 0) {
            return Err(null());
        }
        let len = n * dim * dim * 2;
        let vals = if len == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        let ops = (0..n)
            .map(|k| {
                Mat::from_fn(dim, dim, |i, j| {
                    let o = 2 * (k * dim * dim + i * dim + j);
                    C64::new(vals[o], vals[o + 1])
                })
            })
            .collect();
        let t = lib(OperatorTuple::new(ops))?;
        *out = Box::into_raw(Box::new(GmTuple(t)));
        Ok(())
    })
}

/// Parses a tuple document (or a dilation model, taking its model tuple).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_tuple_from_json(json: *const c_char, out: *mut *mut GmTuple) -> GmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = lib(cli::load_tuple(in_str(json)?))?;
        *out = Box::into_raw(Box::new(GmTuple(t.tuple)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gm_tuple_free(t: *mut GmTuple) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a valid handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn gm_tuple_arity(t: *const GmTuple) -> usize {
    t.as_ref().map_or(0, |t| t.0.arity())
}

/// # Safety
/// `t` must be a valid handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn gm_tuple_dim(t: *const GmTuple) -> usize {
    t.as_ref().map_or(0, |t| t.0.dim())
}

/// Copies the 1-based `index`-th operator into `out` (`dim·dim·2` doubles, row-major, interleaved).
///
/// # Safety
/// `out` must hold `dim·dim·2` doubles.
#[no_mangle]
pub unsafe extern "C" fn gm_tuple_get(t: *const GmTuple, index: usize, out: *mut f64) -> GmStatus {
    guard(|| {
        let t = tuple_ref(t)?;
        if out.is_null() {
            return Err(null());
        }
        if index == 0 || index > t.arity() {
            set_error(format!("operator index {index} outside 1..={}", t.arity()));
            return Err(GmStatus::InvalidParameter);
        }
        let d = t.dim();
        let m = t.op(index);
        let dst = std::slice::from_raw_parts_mut(out, d * d * 2);
        for i in 0..d {
            for j in 0..d {
                dst[2 * (i * d + j)] = m[(i, j)].re;
                dst[2 * (i * d + j) + 1] = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// Tuple document JSON.
///
/// # Safety
/// `t` valid, `out` writable; free the string with [`gm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gm_tuple_to_json(t: *const GmTuple, out: *mut *mut c_char) -> GmStatus {
    guard(|| out_string(&io::TupleDocument::from_tuple(tuple_ref(t)?), out))
}

/// Certifies the finest Γₙ-class; `json_out` may be NULL.
///
/// # Safety
/// `t` valid, `label` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_certify(
    t: *const GmTuple,
    tol: f64,
    seed: u64,
    label: *mut GmClassLabel,
    json_out: *mut *mut c_char,
) -> GmStatus {
    guard(|| {
        let t = tuple_ref(t)?;
        if label.is_null() {
            return Err(null());
        }
        let input = cli::LoadedTuple {
            tuple: t.clone(),
            interior: None,
        };
        let cert = lib(cli::cmd_certify(&input, &config(tol, seed)))?;
        *label = match cert.label {
            ClassLabel::Contraction => GmClassLabel::Contraction,
            ClassLabel::Isometry => GmClassLabel::Isometry,
            ClassLabel::Unitary => GmClassLabel::Unitary,
            ClassLabel::CoIsometry => GmClassLabel::CoIsometry,
            ClassLabel::PureIsometry => GmClassLabel::PureIsometry,
            ClassLabel::Refuted => GmClassLabel::Refuted,
        };
        if !json_out.is_null() {
            out_string(&cert, json_out)?;
        }
        Ok(())
    })
}

/// Fundamental operators with both solver paths compared.
///
/// # Safety
/// `t` valid, `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_fundamental(
    t: *const GmTuple,
    which: GmWhich,
    tol: f64,
    json_out: *mut *mut c_char,
) -> GmStatus {
    guard(|| {
        let t = tuple_ref(t)?;
        let which = match which {
            GmWhich::Forward => Which::Forward,
            GmWhich::Adjoint => Which::Adjoint,
        };
        out_string(&lib(cli::cmd_fundamental(t, which, &config(tol, 0)))?, json_out)
    })
}

/// # Safety
/// `t` valid, `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_wold(t: *const GmTuple, tol: f64, json_out: *mut *mut c_char) -> GmStatus {
    guard(|| out_string(&lib(gamma_models::hardy::wold(tuple_ref(t)?, tol))?, json_out))
}

/// Canonical Γₙ-unitary; `max_iter = 0` selects the default cap.
///
/// # Safety
/// `t` valid, `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_canonical(t: *const GmTuple, max_iter: usize, json_out: *mut *mut c_char) -> GmStatus {
    guard(|| {
        let cap = (max_iter > 0).then_some(max_iter);
        out_string(
            &lib(gamma_models::hardy::canonical_gamma_unitary(tuple_ref(t)?, 1e-12, cap))?,
            json_out,
        )
    })
}

/// Builds a dilation model of the given kind with truncation degree `degree` and grid `grid`.
///
/// # Safety
/// `t` valid, `out` writable; release with [`gm_model_free`].
#[no_mangle]
pub unsafe extern "C" fn gm_dilate(
    t: *const GmTuple,
    kind: GmModelKind,
    degree: usize,
    grid: usize,
    tol: f64,
    out: *mut *mut GmModel,
) -> GmStatus {
    guard(|| {
        let t = tuple_ref(t)?;
        if out.is_null() {
            return Err(null());
        }
        let cfg = RunConfig {
            degree,
            grid,
            words: degree.min(6),
            ..config(tol, 0)
        };
        let choice = match kind {
            GmModelKind::Douglas => ModelChoice::Douglas,
            GmModelKind::NagyFoias => ModelChoice::Nf,
            GmModelKind::Schaffer => ModelChoice::Schaffer,
        };
        let m = lib(cli::cmd_dilate(t, choice, &cfg))?;
        *out = Box::into_raw(Box::new(GmModel(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn gm_model_free(m: *mut GmModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the model space.
///
/// # Safety
/// `m` valid or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn gm_model_dim(m: *const GmModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.model_dim())
}

/// 1 when every construction residual is within budget, 0 otherwise (or for NULL).
///
/// # Safety
/// `m` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn gm_model_passed(m: *const GmModel) -> i32 {
    m.as_ref().map_or(0, |m| m.0.report.passed() as i32)
}

/// # Safety
/// `m` valid, `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_model_to_json(m: *const GmModel, json_out: *mut *mut c_char) -> GmStatus {
    guard(|| out_string(model_ref(m)?, json_out))
}

/// # Safety
/// `json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_model_from_json(json: *const c_char, out: *mut *mut GmModel) -> GmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let m: DilationModel = lib(io::from_str(in_str(json)?))?;
        *out = Box::into_raw(Box::new(GmModel(m)));
        Ok(())
    })
}

/// Word-compression and intertwining report for words up to length `word_len`.
///
/// # Safety
/// Handles valid, `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_verify_model(
    m: *const GmModel,
    t: *const GmTuple,
    word_len: usize,
    tol: f64,
    json_out: *mut *mut c_char,
) -> GmStatus {
    guard(|| out_string(&lib(verify_model(model_ref(m)?, tuple_ref(t)?, word_len, tol))?, json_out))
}

/// Factorization map from `minimal` into `general`.
///
/// # Safety
/// Handles valid, `json_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_factorize(
    general: *const GmModel,
    minimal: *const GmModel,
    tol: f64,
    json_out: *mut *mut c_char,
) -> GmStatus {
    guard(|| out_string(&lib(factorize(model_ref(general)?, model_ref(minimal)?, tol))?, json_out))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
