//! C ABI over `bvs-core`.
//!
//! Datasets and posterior tables cross the boundary as opaque handles that
//! the caller releases with the matching `*_free` function. Every entry point
//! returns a [`BvsStatus`]; on failure a description is kept per thread and
//! can be read back with [`bvs_last_error_message`]. Panics never unwind
//! into C: they are caught and reported as [`BvsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bvs_core::{
    compute_bj0, critical_threshold, enumerate_posterior_with_cap, error_point, load_dataset, log_bayes_factor,
    BfMethod, Dataset, Error, ErrorKind, ModelPrior, ModelSubset, PosteriorTable, QuadratureSpec,
};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvsStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Argument outside the domain of the operation.
    InvalidArgument = 2,
    /// Malformed input data, rank deficiency, too few observations.
    DataError = 3,
    /// Quadrature or series failed to converge, or no threshold exists.
    NumericalError = 4,
    /// Model space larger than the enumeration cap.
    CapacityExceeded = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvsMethod {
    Gn = 0,
    Mix = 1,
    Ip = 2,
    Schwarz = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvsPriorKind {
    /// Independent inclusion with probability `theta`.
    Bernoulli = 0,
    HierarchicalUniform = 1,
    Uniform = 2,
}

/// Opaque dataset handle.
pub struct BvsDataset(Dataset);

/// Opaque posterior table handle.
pub struct BvsPosterior(PosteriorTable);

impl From<BvsMethod> for BfMethod {
    fn from(m: BvsMethod) -> Self {
        match m {
            BvsMethod::Gn => BfMethod::Gn,
            BvsMethod::Mix => BfMethod::Mix,
            BvsMethod::Ip => BfMethod::Ip,
            BvsMethod::Schwarz => BfMethod::Schwarz,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> BvsStatus {
    match e.kind() {
        ErrorKind::Data => BvsStatus::DataError,
        ErrorKind::Numerical => BvsStatus::NumericalError,
        ErrorKind::Domain => BvsStatus::InvalidArgument,
        ErrorKind::Capacity => BvsStatus::CapacityExceeded,
    }
}

/// Failure inside a call: a status plus its message.
struct Fail(BvsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BvsStatus::NullPointer, format!("`{what}` is NULL"))
}

/// Runs `f`, recording any failure or panic for [`bvs_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BvsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BvsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            BvsStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn prior_of(kind: BvsPriorKind, theta: f64) -> Result<ModelPrior, Fail> {
    Ok(match kind {
        BvsPriorKind::Bernoulli => ModelPrior::bernoulli(theta)?,
        BvsPriorKind::HierarchicalUniform => ModelPrior::HierarchicalUniform,
        BvsPriorKind::Uniform => ModelPrior::Uniform,
    })
}

/// Copies the message of the last failed call on this thread into `buf`
/// (NUL-terminated, truncated to `len` bytes) and returns the full message
/// length excluding the terminator. Passing `buf = NULL` only queries the length.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bvs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bvs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a CSV file with a `y` column.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_dataset_load_csv(path: *const c_char, out: *mut *mut BvsDataset) -> BvsStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(BvsStatus::InvalidUtf8, "path is not valid UTF-8".into()))?;
        let data = load_dataset(path)?;
        write(out, Box::into_raw(Box::new(BvsDataset(data))), "out")
    })
}

/// Builds a dataset from `n` responses and an `n x k` column-major regressor
/// matrix. Columns are named `x1 .. xk`.
///
/// # Safety
/// `y` must hold `n` values, `x` must hold `n * k` values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_dataset_from_arrays(
    n: usize,
    k: usize,
    y: *const f64,
    x: *const f64,
    out: *mut *mut BvsDataset,
) -> BvsStatus {
    guard(|| {
        let cells = n.checked_mul(k).ok_or_else(|| Fail(BvsStatus::InvalidArgument, "n * k overflows".into()))?;
        let y = slice(y, n, "y")?.to_vec();
        let x = slice(x, cells, "x")?;
        let columns = if n == 0 { vec![Vec::new(); k] } else { x.chunks(n).map(<[f64]>::to_vec).collect() };
        let data = Dataset::from_columns(y, columns)?;
        write(out, Box::into_raw(Box::new(BvsDataset(data))), "out")
    })
}

/// Releases a dataset; NULL is ignored.
///
/// # Safety
/// `data` must be NULL or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn bvs_dataset_free(data: *mut BvsDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of observations and candidate regressors.
///
/// # Safety
/// `data` must be a live handle; `n` and `k` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_dataset_shape(data: *const BvsDataset, n: *mut usize, k: *mut usize) -> BvsStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        write(n, d.n(), "n")?;
        write(k, d.k(), "k")
    })
}

/// Residual-sum-of-squares ratio of the subset (1-based indices, any order)
/// to the intercept-only model.
///
/// # Safety
/// `data` must be a live handle; `indices` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_bj0(
    data: *const BvsDataset,
    indices: *const usize,
    len: usize,
    out: *mut f64,
) -> BvsStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        let subset = ModelSubset::from_unsorted(slice(indices, len, "indices")?.to_vec())?;
        subset.check_within(d.k())?;
        write(out, compute_bj0(d, &subset)?.b_j0, "out")
    })
}

/// `ln B_j0` with the default quadrature settings.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_log_bayes_factor(
    method: BvsMethod,
    n: usize,
    j: usize,
    b_j0: f64,
    out: *mut f64,
) -> BvsStatus {
    guard(|| {
        let v = log_bayes_factor(method.into(), n, j, b_j0, &QuadratureSpec::default())?;
        write(out, v.log_value, "out")
    })
}

/// Critical value `b*`: the rule accepts `M_j` over `M_0` iff `b_j0 <= b*`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_critical_threshold(method: BvsMethod, n: usize, j: usize, out: *mut f64) -> BvsStatus {
    guard(|| {
        let r = critical_threshold(method.into(), n, j, &QuadratureSpec::default())?;
        write(out, r.b_star, "out")
    })
}

/// Threshold, Type I error and power at pseudo-distance `delta`.
///
/// # Safety
/// The three output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_error_point(
    method: BvsMethod,
    n: usize,
    j: usize,
    delta: f64,
    b_star: *mut f64,
    type1: *mut f64,
    power: *mut f64,
) -> BvsStatus {
    guard(|| {
        let p = error_point(method.into(), n, j, delta, &QuadratureSpec::default())?;
        write(b_star, p.b_star, "b_star")?;
        write(type1, p.type1, "type1")?;
        write(power, p.power, "power")
    })
}

/// Posterior over all `2^k` subsets. `theta` is read only for the Bernoulli
/// prior; `cap` bounds `k`.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_posterior_enumerate(
    data: *const BvsDataset,
    method: BvsMethod,
    prior: BvsPriorKind,
    theta: f64,
    cap: usize,
    out: *mut *mut BvsPosterior,
) -> BvsStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        let table = enumerate_posterior_with_cap(d, method.into(), prior_of(prior, theta)?, &QuadratureSpec::default(), cap)?;
        write(out, Box::into_raw(Box::new(BvsPosterior(table))), "out")
    })
}

/// Releases a posterior table; NULL is ignored.
///
/// # Safety
/// `post` must be NULL or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn bvs_posterior_free(post: *mut BvsPosterior) {
    if !post.is_null() {
        drop(Box::from_raw(post));
    }
}

/// Number of models in the table (`2^k`).
///
/// # Safety
/// `post` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_posterior_len(post: *const BvsPosterior, out: *mut usize) -> BvsStatus {
    guard(|| write(out, deref(post, "post")?.0.len(), "out"))
}

/// Posterior probability of the model whose bit `i` selects regressor `i + 1`.
///
/// # Safety
/// `post` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_posterior_probability(post: *const BvsPosterior, mask: u64, out: *mut f64) -> BvsStatus {
    guard(|| {
        let t = &deref(post, "post")?.0;
        let e = t
            .entries()
            .get(usize::try_from(mask).unwrap_or(usize::MAX))
            .ok_or_else(|| Fail(BvsStatus::InvalidArgument, format!("mask {mask} is outside a table of k = {}", t.k())))?;
        write(out, e.posterior, "out")
    })
}

/// The highest-posterior model as a bit mask, with its probability.
///
/// # Safety
/// `post` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvs_posterior_modal(post: *const BvsPosterior, mask: *mut u64, prob: *mut f64) -> BvsStatus {
    guard(|| {
        let (s, p) = deref(post, "post")?.0.modal();
        write(mask, s.mask(), "mask")?;
        write(prob, p, "prob")
    })
}

/// Marginal inclusion probabilities of regressors `1 .. k` into `out[0 .. k]`.
///
/// # Safety
/// `post` must be a live handle; `out` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn bvs_posterior_inclusion(post: *const BvsPosterior, out: *mut f64, len: usize) -> BvsStatus {
    guard(|| {
        let incl = deref(post, "post")?.0.inclusion_probabilities();
        if len < incl.len() {
            return Err(Fail(BvsStatus::InvalidArgument, format!("buffer holds {len} values, need {}", incl.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(incl.as_ptr(), out, incl.len());
        Ok(())
    })
}
