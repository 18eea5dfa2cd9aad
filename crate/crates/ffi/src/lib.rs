//! C interface. Complexes are returned as opaque handles that the caller
//! releases with `of_complex_free`; strings returned to the caller are
//! released with `of_string_free`. Every entry point returns an `OfStatus`
//! and records a message retrievable with `of_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use operadforge::bar::lie;
use operadforge::chain::EqComplex;
use operadforge::sset::{PointedSSet, Smash, SphereModel};
use operadforge::verify::{self, Params};
use operadforge::{Error, Field, F2, F3, F5, Q};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownCheck = 3,
    InvariantViolated = 4,
    NotStable = 5,
    Io = 6,
    Panic = 7,
    CheckFailed = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OfField {
    Q = 0,
    F2 = 2,
    F3 = 3,
    F5 = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OfSphereModel {
    Min = 0,
    Cube = 1,
}

impl From<OfSphereModel> for SphereModel {
    fn from(m: OfSphereModel) -> Self {
        match m {
            OfSphereModel::Min => SphereModel::Min,
            OfSphereModel::Cube => SphereModel::Cube,
        }
    }
}

enum AnyComplex {
    Q(EqComplex<Q>),
    F2(EqComplex<F2>),
    F3(EqComplex<F3>),
    F5(EqComplex<F5>),
}

/// Opaque `Σ_n`-equivariant chain complex.
pub struct OfComplex {
    inner: AnyComplex,
}

macro_rules! on_complex {
    ($c:expr, $x:ident => $body:expr) => {
        match &$c.inner {
            AnyComplex::Q($x) => $body,
            AnyComplex::F2($x) => $body,
            AnyComplex::F3($x) => $body,
            AnyComplex::F5($x) => $body,
        }
    };
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OfStatus {
    match e {
        Error::Usage(_) => OfStatus::UnknownCheck,
        Error::Invariant(_) => OfStatus::InvariantViolated,
        Error::NotStable(_) => OfStatus::NotStable,
        Error::Io(_) | Error::Cache(_) => OfStatus::Io,
        _ => OfStatus::InvalidArgument,
    }
}

/// Run `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<OfStatus, Error>) -> OfStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            OfStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Error> {
    if s.is_null() {
        return Err(Error::Invalid("null string".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Error::Invalid("string is not UTF-8".into()))
}

fn into_raw_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn of_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn of_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `Lie(n)` with its `Σ_n`-action.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn of_lie(n: usize, field: OfField, out: *mut *mut OfComplex) -> OfStatus {
    if out.is_null() {
        return OfStatus::NullPointer;
    }
    guard(|| {
        if n == 0 {
            return Err(Error::Invalid("arity must be positive".into()));
        }
        let inner = match field {
            OfField::Q => AnyComplex::Q(lie(n)),
            OfField::F2 => AnyComplex::F2(lie(n)),
            OfField::F3 => AnyComplex::F3(lie(n)),
            OfField::F5 => AnyComplex::F5(lie(n)),
        };
        *out = Box::into_raw(Box::new(OfComplex { inner }));
        Ok(OfStatus::Ok)
    })
}

/// Reduced chains on the smash power `K^{∧n}` for `space` = `s<k>` or `set:<m>`.
///
/// # Safety
/// `space` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_smash_power(
    space: *const c_char,
    n: usize,
    model: OfSphereModel,
    field: OfField,
    out: *mut *mut OfComplex,
) -> OfStatus {
    if out.is_null() || space.is_null() {
        return OfStatus::NullPointer;
    }
    guard(|| {
        let k = PointedSSet::from_spec(read_str(space)?, model.into())?;
        let p = Smash::power(&k, n);
        let inner = match field {
            OfField::Q => AnyComplex::Q(p.power_chains()),
            OfField::F2 => AnyComplex::F2(p.power_chains()),
            OfField::F3 => AnyComplex::F3(p.power_chains()),
            OfField::F5 => AnyComplex::F5(p.power_chains()),
        };
        *out = Box::into_raw(Box::new(OfComplex { inner }));
        Ok(OfStatus::Ok)
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `c` must be null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn of_complex_free(c: *mut OfComplex) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of basis cells.
///
/// # Safety
/// `c` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_complex_dim(c: *const OfComplex, out: *mut usize) -> OfStatus {
    if c.is_null() || out.is_null() {
        return OfStatus::NullPointer;
    }
    *out = on_complex!(&*c, x => x.dim());
    OfStatus::Ok
}

/// Arity `n` of the symmetric group acting.
///
/// # Safety
/// `c` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_complex_arity(c: *const OfComplex, out: *mut usize) -> OfStatus {
    if c.is_null() || out.is_null() {
        return OfStatus::NullPointer;
    }
    *out = on_complex!(&*c, x => x.arity());
    OfStatus::Ok
}

/// Dimension of homology in degree `q`.
///
/// # Safety
/// `c` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_complex_homology(c: *const OfComplex, q: i32, out: *mut usize) -> OfStatus {
    if c.is_null() || out.is_null() {
        return OfStatus::NullPointer;
    }
    guard(|| {
        *out = on_complex!(&*c, x => x.complex.homology_in(q));
        Ok(OfStatus::Ok)
    })
}

/// Homology as a JSON object `{"degree": dim}`. Free with `of_string_free`.
///
/// # Safety
/// `c` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_complex_homology_json(c: *const OfComplex, out: *mut *mut c_char) -> OfStatus {
    if c.is_null() || out.is_null() {
        return OfStatus::NullPointer;
    }
    guard(|| {
        let h = on_complex!(&*c, x => x.complex.homology());
        *out = into_raw_string(serde_json::to_string(&h)?);
        Ok(OfStatus::Ok)
    })
}

fn run_check<F: Field>(id: &str, p: &Params) -> Result<verify::Report, Error> {
    verify::run::<F>(id, p)
}

/// Run a named check with default parameters. Writes the JSON report to
/// `report` (may be null) and returns `OF_STATUS_CHECK_FAILED` when the check
/// ran and failed.
///
/// # Safety
/// `id` must be a nul-terminated string; `report` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn of_verify(id: *const c_char, field: OfField, seed: u64, report: *mut *mut c_char) -> OfStatus {
    if id.is_null() {
        return OfStatus::NullPointer;
    }
    guard(|| {
        let id = read_str(id)?;
        let p = Params { seed, ..Params::default() };
        let r = match field {
            OfField::Q => run_check::<Q>(id, &p)?,
            OfField::F2 => run_check::<F2>(id, &p)?,
            OfField::F3 => run_check::<F3>(id, &p)?,
            OfField::F5 => run_check::<F5>(id, &p)?,
        };
        if !report.is_null() {
            *report = into_raw_string(serde_json::to_string(&r)?);
        }
        if r.pass {
            Ok(OfStatus::Ok)
        } else {
            set_error(&format!("check {} failed", r.id));
            Ok(OfStatus::CheckFailed)
        }
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn of_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
