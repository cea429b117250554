//! C interface to `oeq`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`OeqStatus`]; on failure a message is available from [`oeq_last_error`]
//! on the same thread. Strings handed out are NUL-terminated UTF-8 and must
//! be released with [`oeq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use oeq::archive::DefectFile;
use oeq::error::Error;
use oeq::grading::Potential;
use oeq::groebner::{ResourceBudget, Status};
use oeq::mf::{constraint_basis, Defect};
use oeq::poly::{fmt_rational, Polynomial};
use oeq::residue::{qdim_unreduced, JacobiRing};
use oeq::search::{search, SearchConfig};
use oeq::verify::verify_defect;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OeqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidInput = 4,
    Obstructed = 5,
    BudgetExhausted = 6,
    Internal = 7,
}

/// Sparse polynomial with rational coefficients.
pub struct OeqPolynomial(Polynomial);

/// Quasi-homogeneous potential with an isolated singularity.
pub struct OeqPotential(Potential);

/// Matrix factorisation read from the JSON archive format.
pub struct OeqDefect {
    file: DefectFile,
    defect: Defect,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(OeqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let status = match e {
            Error::Parse { .. } | Error::InvalidName(_) | Error::TierMismatch(_) | Error::Json(_) => OeqStatus::ParseError,
            Error::ObstructionCentralCharge(..) | Error::ObstructionParity => OeqStatus::Obstructed,
            _ => OeqStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OeqStatus::NullArgument, format!("{what} is null"))
}

/// Runs `f`, converting failures and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OeqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            OeqStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            OeqStatus::Internal
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail(OeqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| Fail(OeqStatus::Internal, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn budget(secs: f64) -> ResourceBudget {
    if secs > 0.0 && secs.is_finite() {
        ResourceBudget { time_limit: Some(Duration::from_secs_f64(secs)), ..Default::default() }
    } else {
        ResourceBudget::unlimited()
    }
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn oeq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oeq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a polynomial such as `-3/8*x1^2*a1 + y1^3`.
///
/// # Safety
/// `src` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_polynomial_parse(src: *const c_char, out: *mut *mut OeqPolynomial) -> OeqStatus {
    guard(|| {
        let p = Polynomial::parse(text(src, "src")?)?;
        put(out, OeqPolynomial(p))
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oeq_polynomial_free(p: *mut OeqPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_polynomial_to_string(p: *const OeqPolynomial, out: *mut *mut c_char) -> OeqStatus {
    guard(|| put_string(out, borrow(p, "polynomial")?.0.to_string()))
}

/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_polynomial_add(
    a: *const OeqPolynomial,
    b: *const OeqPolynomial,
    out: *mut *mut OeqPolynomial,
) -> OeqStatus {
    guard(|| {
        let s = &borrow(a, "a")?.0 + &borrow(b, "b")?.0;
        put(out, OeqPolynomial(s))
    })
}

/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_polynomial_mul(
    a: *const OeqPolynomial,
    b: *const OeqPolynomial,
    out: *mut *mut OeqPolynomial,
) -> OeqStatus {
    guard(|| {
        let s = &borrow(a, "a")?.0 * &borrow(b, "b")?.0;
        put(out, OeqPolynomial(s))
    })
}

/// Writes 1 to `out` when the polynomials are equal, 0 otherwise.
///
/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_polynomial_equal(a: *const OeqPolynomial, b: *const OeqPolynomial, out: *mut i32) -> OeqStatus {
    guard(|| {
        let eq = borrow(a, "a")?.0 == borrow(b, "b")?.0;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = eq as i32;
        Ok(())
    })
}

/// Checks quasi-homogeneity and isolatedness of `p`.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_potential_new(p: *const OeqPolynomial, out: *mut *mut OeqPotential) -> OeqStatus {
    guard(|| {
        let v = Potential::new(borrow(p, "polynomial")?.0.clone())?;
        JacobiRing::new(&v)?;
        put(out, OeqPotential(v))
    })
}

/// Catalogue name (`E13`, `A2xA2`, …) or a polynomial, with variables renamed
/// to `prefix1, prefix2, …`.
///
/// # Safety
/// `spec` and `prefix` must be valid C strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_potential_resolve(
    spec: *const c_char,
    prefix: *const c_char,
    out: *mut *mut OeqPotential,
) -> OeqStatus {
    guard(|| {
        let v = oeq::catalogue::resolve(text(spec, "spec")?, text(prefix, "prefix")?)?;
        put(out, OeqPotential(v))
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oeq_potential_free(p: *mut OeqPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Central charge as an exact rational string such as `16/15`.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_potential_central_charge(p: *const OeqPotential, out: *mut *mut c_char) -> OeqStatus {
    guard(|| put_string(out, fmt_rational(&borrow(p, "potential")?.0.central_charge())))
}

/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_potential_milnor(p: *const OeqPotential, out: *mut usize) -> OeqStatus {
    guard(|| {
        let mu = JacobiRing::new(&borrow(p, "potential")?.0)?.milnor();
        *out.as_mut().ok_or_else(|| null("output pointer"))? = mu;
        Ok(())
    })
}

/// Reads a defect from its JSON archive text.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_defect_from_json(json: *const c_char, out: *mut *mut OeqDefect) -> OeqStatus {
    guard(|| {
        let file = DefectFile::from_json(text(json, "json")?)?;
        let defect = file.to_defect()?;
        put(out, OeqDefect { file, defect })
    })
}

/// # Safety
/// `d` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oeq_defect_free(d: *mut OeqDefect) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Full verification. `ok` receives 1 when every check passes and the
/// stored quantum dimensions match; `report_json` may be null. A
/// non-positive budget means no time limit.
///
/// # Safety
/// `d` must be a live handle, `ok` a valid pointer and `report_json` null or
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_defect_verify(
    d: *const OeqDefect,
    budget_secs: f64,
    ok: *mut i32,
    report_json: *mut *mut c_char,
) -> OeqStatus {
    guard(|| {
        let d = borrow(d, "defect")?;
        let expected = d.file.expected()?;
        let r = verify_defect(&d.defect, expected.as_ref().map(|(l, r)| (l, r)), &budget(budget_secs));
        if r.ideal == Status::Unknown {
            return Err(Fail(OeqStatus::BudgetExhausted, r.error.unwrap_or_else(|| "time limit exceeded".into())));
        }
        *ok.as_mut().ok_or_else(|| null("ok"))? = r.ok() as i32;
        if !report_json.is_null() {
            put_string(report_json, r.to_json())?;
        }
        Ok(())
    })
}

/// Quantum dimensions reduced modulo the constraint ideal.
///
/// # Safety
/// `d` must be a live handle and `ql`, `qr` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn oeq_defect_qdim(
    d: *const OeqDefect,
    budget_secs: f64,
    ql: *mut *mut c_char,
    qr: *mut *mut c_char,
) -> OeqStatus {
    guard(|| {
        let d = &borrow(d, "defect")?.defect;
        let raw = qdim_unreduced(d)?;
        let gb = constraint_basis(&d.mf.constraints, &budget(budget_secs))
            .map_err(|e| Fail(OeqStatus::BudgetExhausted, e.to_string()))?;
        let q = raw.reduced(gb.as_ref());
        if ql.is_null() || qr.is_null() {
            return Err(null("output pointer"));
        }
        put_string(ql, q.ql.to_string())?;
        put_string(qr, q.qr.to_string())
    })
}

/// Searches for a graded rank-`rank` defect between `v1` (x-variables) and
/// `v2` (y-variables). `verdict` receives 0 for Solvable, 1 for a negative
/// answer and 2 when the budget ran out. Obstructed pairs return
/// `OEQ_STATUS_OBSTRUCTED` and still fill the report.
///
/// # Safety
/// `v1`, `v2` must be live handles, `verdict` a valid pointer and
/// `report_json` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oeq_search(
    v1: *const OeqPotential,
    v2: *const OeqPotential,
    rank: usize,
    budget_secs: f64,
    verdict: *mut i32,
    report_json: *mut *mut c_char,
) -> OeqStatus {
    guard(|| {
        let (a, b) = (&borrow(v1, "v1")?.0, &borrow(v2, "v2")?.0);
        let cfg = SearchConfig { budget: budget(budget_secs).time_limit, ..Default::default() };
        let r = search(a, b, rank, &cfg)?;
        *verdict.as_mut().ok_or_else(|| null("verdict"))? = r.verdict.exit_code();
        if !report_json.is_null() {
            put_string(report_json, r.to_json())?;
        }
        if !r.obstructions.is_empty() {
            return Err(Fail(OeqStatus::Obstructed, format!("obstructed: {:?}", r.obstructions)));
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use std::ptr;

    use super::*;

    #[test]
    fn errors_are_reported() {
        let src = CString::new("x1^").unwrap();
        let mut p = ptr::null_mut();
        let s = unsafe { oeq_polynomial_parse(src.as_ptr(), &mut p) };
        assert_eq!(s, OeqStatus::ParseError);
        assert!(p.is_null());
        let msg = unsafe { CStr::from_ptr(oeq_last_error()) }.to_str().unwrap();
        assert!(msg.contains("parse"), "{msg}");
        assert_eq!(unsafe { oeq_polynomial_parse(ptr::null(), &mut p) }, OeqStatus::NullArgument);
    }
}
