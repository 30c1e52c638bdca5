//! C interface. Every function returns an `AltprojStatus`; on failure a
//! message is kept per thread and read back with `altproj_last_error`.
//! Arrays are passed as pointer plus length; matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use altproj::analysis::friedrichs_cosine;
use altproj::divergence::k_of_eps;
use altproj::iteration::{run, RunConfig};
use altproj::kaczmarz::{solve, thirds_demo, LinearSystem};
use altproj::linalg::{intersect, orthonormalize, DEFAULT_TOL};
use altproj::schedule::Schedule;
use altproj::{Matrix, Subspace, Vector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AltprojStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotConverged = 4,
    Panic = 5,
}

/// Opaque subspace handle.
pub struct AltprojSubspace {
    inner: Subspace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Fail(AltprojStatus, String);

type Res<T> = Result<T, Fail>;

fn fail<E: std::fmt::Display>(status: AltprojStatus) -> impl Fn(E) -> Fail {
    move |e| Fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> Res<AltprojStatus>) -> AltprojStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            AltprojStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Res<()> {
    if p.is_null() {
        Err(Fail(AltprojStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Res<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Res<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    non_null(p, what)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handles<'a>(spaces: *const *const AltprojSubspace, count: usize) -> Res<Vec<&'a Subspace>> {
    let ptrs = slice(spaces, count, "spaces")?;
    ptrs.iter()
        .map(|&p| {
            non_null(p, "subspace handle")?;
            Ok(&(*p).inner)
        })
        .collect()
}

fn boxed(s: Subspace) -> *mut AltprojSubspace {
    Box::into_raw(Box::new(AltprojSubspace { inner: s }))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn altproj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Span of `count` vectors of length `n`, stored row after row in `data`.
///
/// # Safety
/// `data` must hold `count * n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn altproj_subspace_from_vectors(
    data: *const f64,
    count: usize,
    n: usize,
    out: *mut *mut AltprojSubspace,
) -> AltprojStatus {
    guard(|| {
        non_null(out, "out")?;
        if n == 0 {
            return Err(Fail(AltprojStatus::InvalidArgument, "ambient dimension must be positive".into()));
        }
        let total = count.checked_mul(n).ok_or_else(|| Fail(AltprojStatus::InvalidArgument, "size overflow".into()))?;
        let raw = slice(data, total, "data")?;
        let vs: Vec<Vector> = raw.chunks(n).map(Vector::from_column_slice).collect();
        let s = orthonormalize(&vs, n, DEFAULT_TOL).map_err(fail(AltprojStatus::InvalidArgument))?;
        *out = boxed(s);
        Ok(AltprojStatus::Ok)
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn altproj_subspace_free(s: *mut AltprojSubspace) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle and `dim`, `ambient_dim` writable or null.
#[no_mangle]
pub unsafe extern "C" fn altproj_subspace_dims(s: *const AltprojSubspace, dim: *mut usize, ambient_dim: *mut usize) -> AltprojStatus {
    guard(|| {
        non_null(s, "subspace")?;
        if !dim.is_null() {
            *dim = (*s).inner.dim();
        }
        if !ambient_dim.is_null() {
            *ambient_dim = (*s).inner.ambient_dim();
        }
        Ok(AltprojStatus::Ok)
    })
}

/// Writes the projection of `x` (length `n`) into `out` (length `n`).
///
/// # Safety
/// `s` must be a live handle; `x` and `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn altproj_subspace_project(s: *const AltprojSubspace, x: *const f64, n: usize, out: *mut f64) -> AltprojStatus {
    guard(|| {
        non_null(s, "subspace")?;
        let x = Vector::from_column_slice(slice(x, n, "x")?);
        let p = (*s).inner.project(&x).map_err(fail(AltprojStatus::DimensionMismatch))?;
        slice_mut(out, n, "out")?.copy_from_slice(p.as_slice());
        Ok(AltprojStatus::Ok)
    })
}

/// # Safety
/// `spaces` must hold `count` live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn altproj_intersect(
    spaces: *const *const AltprojSubspace,
    count: usize,
    out: *mut *mut AltprojSubspace,
) -> AltprojStatus {
    guard(|| {
        non_null(out, "out")?;
        let list: Vec<Subspace> = handles(spaces, count)?.into_iter().cloned().collect();
        let m = intersect(&list, DEFAULT_TOL).map_err(fail(AltprojStatus::InvalidArgument))?;
        *out = boxed(m);
        Ok(AltprojStatus::Ok)
    })
}

/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn altproj_friedrichs_cosine(a: *const AltprojSubspace, b: *const AltprojSubspace, out: *mut f64) -> AltprojStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        *out = friedrichs_cosine(&(*a).inner, &(*b).inner).map_err(fail(AltprojStatus::DimensionMismatch))?;
        Ok(AltprojStatus::Ok)
    })
}

/// Iterates the periodic schedule `pattern` (1-based indices into `spaces`)
/// from `x0` until `tol` or `max_steps`. The last iterate goes to `x_out`.
/// Returns `NotConverged` when the step limit is hit; `x_out` is still set.
///
/// # Safety
/// Pointers must be valid for the given lengths; `x0` and `x_out` hold `n`.
#[no_mangle]
pub unsafe extern "C" fn altproj_run_periodic(
    spaces: *const *const AltprojSubspace,
    count: usize,
    pattern: *const usize,
    pattern_len: usize,
    x0: *const f64,
    n: usize,
    max_steps: usize,
    tol: f64,
    x_out: *mut f64,
    steps_out: *mut usize,
) -> AltprojStatus {
    guard(|| {
        let list: Vec<Subspace> = handles(spaces, count)?.into_iter().cloned().collect();
        let pat = slice(pattern, pattern_len, "pattern")?.to_vec();
        let schedule = Schedule::periodic(pat, count).map_err(fail(AltprojStatus::InvalidArgument))?;
        let x0 = Vector::from_column_slice(slice(x0, n, "x0")?);
        let cfg = RunConfig {
            max_steps,
            stop_tol: tol,
            store_iterates: false,
            ..RunConfig::default()
        };
        let trace = run(&list, &schedule, &x0, &cfg).map_err(fail(AltprojStatus::InvalidArgument))?;
        slice_mut(x_out, n, "x_out")?.copy_from_slice(trace.final_iterate.as_slice());
        if !steps_out.is_null() {
            *steps_out = trace.steps();
        }
        Ok(if trace.converged() { AltprojStatus::Ok } else { AltprojStatus::NotConverged })
    })
}

/// Cyclic projections onto the rows of `A x = c` (`A` is `m x n`, row-major).
/// A null `x0` starts from zero, which gives the minimal-norm solution.
/// Returns `NotConverged` when `tol` is not reached; `x_out` is still set.
///
/// # Safety
/// `a` holds `m * n`, `c` holds `m`, `x0` (if not null) and `x_out` hold `n`.
#[no_mangle]
pub unsafe extern "C" fn altproj_kaczmarz_dense(
    a: *const f64,
    m: usize,
    n: usize,
    c: *const f64,
    x0: *const f64,
    max_sweeps: usize,
    tol: f64,
    x_out: *mut f64,
    sweeps_out: *mut usize,
) -> AltprojStatus {
    guard(|| {
        let total = m.checked_mul(n).ok_or_else(|| Fail(AltprojStatus::InvalidArgument, "size overflow".into()))?;
        let a = Matrix::from_row_slice(m, n, slice(a, total, "a")?);
        let c = Vector::from_column_slice(slice(c, m, "c")?);
        let start = if x0.is_null() { Vector::zeros(n) } else { Vector::from_column_slice(slice(x0, n, "x0")?) };
        let sys = LinearSystem::from_dense(&a, &c).map_err(fail(AltprojStatus::InvalidArgument))?;
        let res = solve(&sys, &start, max_sweeps, tol).map_err(fail(AltprojStatus::InvalidArgument))?;
        slice_mut(x_out, n, "x_out")?.copy_from_slice(res.solution.as_slice());
        if !sweeps_out.is_null() {
            *sweeps_out = res.residual_history.len();
        }
        if res.converged {
            Ok(AltprojStatus::Ok)
        } else {
            let why = if res.suspected_inconsistent { "residual stalled; system may be inconsistent" } else { "sweep limit reached" };
            Err(Fail(AltprojStatus::NotConverged, why.into()))
        }
    })
}

/// Clip positions after `n_iters` steps of the string-thirds walk, plus
/// whether the geometric deviation bound held at every step.
///
/// # Safety
/// `left`, `right` and `bound_ok` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn altproj_thirds(
    x: f64,
    y: f64,
    z: f64,
    n_iters: usize,
    left: *mut f64,
    right: *mut f64,
    bound_ok: *mut c_int,
) -> AltprojStatus {
    guard(|| {
        let r = thirds_demo(x, y, z, n_iters).map_err(fail(AltprojStatus::InvalidArgument))?;
        let (l, rt) = *r.positions.last().expect("at least the start");
        if !left.is_null() {
            *left = l;
        }
        if !right.is_null() {
            *right = rt;
        }
        if !bound_ok.is_null() {
            *bound_ok = c_int::from(r.bound_ok);
        }
        Ok(AltprojStatus::Ok)
    })
}

/// Number of quarter-circle steps needed for tolerance `eps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn altproj_k_of_eps(eps: f64, out: *mut usize) -> AltprojStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = k_of_eps(eps).map_err(fail(AltprojStatus::InvalidArgument))?;
        Ok(AltprojStatus::Ok)
    })
}
