//! C ABI over the `catcma` crate.
//!
//! Objects are handed out as opaque pointers and released with the matching
//! `*_free` function. Every fallible call returns a status code: `CATCMA_OK`
//! (zero) on success, a negative `CATCMA_ERR_*` value otherwise. The message
//! for the most recent failure on the calling thread is available through
//! [`catcma_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use catcma::{Candidate, Error, FreezePolicy, InteractionOptimizer, ProblemInstance, ProblemKind, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CATCMA_OK: i32 = 0;
/// A required pointer argument was null.
pub const CATCMA_ERR_NULL_POINTER: i32 = -1;
/// An argument is out of range.
pub const CATCMA_ERR_INVALID_ARGUMENT: i32 = -2;
/// A buffer length does not match the expected size.
pub const CATCMA_ERR_DIMENSION: i32 = -3;
/// An objective value passed to tell is NaN or infinite.
pub const CATCMA_ERR_NON_FINITE: i32 = -4;
/// The covariance matrix lost positive-definiteness; the optimizer cannot continue.
pub const CATCMA_ERR_NUMERICAL: i32 = -5;
/// Call order violated, e.g. tell without a preceding ask.
pub const CATCMA_ERR_STATE: i32 = -6;
/// No solution has been evaluated yet.
pub const CATCMA_ERR_NO_SOLUTION: i32 = -7;
/// A Rust panic was caught at the boundary.
pub const CATCMA_ERR_PANIC: i32 = -99;

/// Problem kinds accepted by [`catcma_problem_new`].
pub const CATCMA_PROBLEM_F1: i32 = 0;
pub const CATCMA_PROBLEM_F2: i32 = 1;
pub const CATCMA_PROBLEM_F2_TANH: i32 = 2;
pub const CATCMA_PROBLEM_F3: i32 = 3;

/// Freeze policies accepted by [`catcma_optimizer_new`].
pub const CATCMA_FREEZE_ADAPTIVE: i32 = 0;
pub const CATCMA_FREEZE_FIXED: i32 = 1;

/// Opaque benchmark problem instance.
pub struct CatcmaProblem {
    inner: ProblemInstance,
}

/// Opaque optimizer with its own random stream.
pub struct CatcmaOptimizer {
    inner: InteractionOptimizer,
    rng: ChaCha8Rng,
    pending: Option<Vec<Candidate>>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::WrongProblemKind(_) | Error::Config(_) => CATCMA_ERR_INVALID_ARGUMENT,
            Error::DimensionMismatch { .. } | Error::PopulationSize { .. } => CATCMA_ERR_DIMENSION,
            Error::NonFiniteValue { .. } => CATCMA_ERR_NON_FINITE,
            Error::NotPositiveDefinite { .. } | Error::NonFiniteCovariance => CATCMA_ERR_NUMERICAL,
            _ => CATCMA_ERR_INVALID_ARGUMENT,
        };
        Failure(code, e.to_string())
    }
}

fn fail<T>(code: i32, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(code, msg.into()))
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CATCMA_OK,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(&msg);
            code
        }
        Err(_) => {
            set_last_error("internal panic");
            CATCMA_ERR_PANIC
        }
    }
}

unsafe fn slice_in<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return fail(CATCMA_ERR_NULL_POINTER, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn slice_out<'a, T>(data: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if data.is_null() {
        return fail(CATCMA_ERR_NULL_POINTER, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts_mut(data, len))
}

unsafe fn handle<'a, T>(ptr: *const T) -> Result<&'a T, Failure> {
    ptr.as_ref().map_or_else(|| fail(CATCMA_ERR_NULL_POINTER, "handle is null"), Ok)
}

unsafe fn handle_mut<'a, T>(ptr: *mut T) -> Result<&'a mut T, Failure> {
    ptr.as_mut().map_or_else(|| fail(CATCMA_ERR_NULL_POINTER, "handle is null"), Ok)
}

fn check_len(what: &str, expected: usize, actual: usize) -> Result<(), Failure> {
    if expected != actual {
        return fail(
            CATCMA_ERR_DIMENSION,
            format!("{what}: expected length {expected}, got {actual}"),
        );
    }
    Ok(())
}

/// Message describing the last failed call on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn catcma_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn catcma_status_string(code: i32) -> *const c_char {
    let text: &'static [u8] = match code {
        CATCMA_OK => b"ok\0",
        CATCMA_ERR_NULL_POINTER => b"null pointer\0",
        CATCMA_ERR_INVALID_ARGUMENT => b"invalid argument\0",
        CATCMA_ERR_DIMENSION => b"dimension mismatch\0",
        CATCMA_ERR_NON_FINITE => b"non-finite value\0",
        CATCMA_ERR_NUMERICAL => b"numerical failure\0",
        CATCMA_ERR_STATE => b"invalid call order\0",
        CATCMA_ERR_NO_SOLUTION => b"no solution evaluated yet\0",
        CATCMA_ERR_PANIC => b"internal panic\0",
        _ => b"unknown status\0",
    };
    text.as_ptr().cast()
}

/// Generates a seeded problem instance. `kind` is one of `CATCMA_PROBLEM_*`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn catcma_problem_new(
    kind: i32,
    n: usize,
    m: usize,
    alpha: f64,
    seed: u64,
    out: *mut *mut CatcmaProblem,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return fail(CATCMA_ERR_NULL_POINTER, "out is null");
        }
        let kind = match kind {
            CATCMA_PROBLEM_F1 => ProblemKind::F1,
            CATCMA_PROBLEM_F2 => ProblemKind::F2,
            CATCMA_PROBLEM_F2_TANH => ProblemKind::F2Tanh,
            CATCMA_PROBLEM_F3 => ProblemKind::F3,
            other => return fail(CATCMA_ERR_INVALID_ARGUMENT, format!("unknown problem kind {other}")),
        };
        let inner = ProblemInstance::generate(kind, n, m, alpha, seed)?;
        *out = Box::into_raw(Box::new(CatcmaProblem { inner }));
        Ok(())
    })
}

/// Evaluates `f(c, x)`; `c` holds `m` bytes (zero means 0, anything else 1).
///
/// # Safety
/// `problem` must come from [`catcma_problem_new`]; `c`, `x` and `out` must
/// point to at least `m`, `n` and one elements.
#[no_mangle]
pub unsafe extern "C" fn catcma_problem_evaluate(
    problem: *const CatcmaProblem,
    c: *const u8,
    m: usize,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let problem = &handle(problem)?.inner;
        check_len("c", problem.m, m)?;
        check_len("x", problem.n, n)?;
        let c: Vec<bool> = slice_in(c, m, "c")?.iter().map(|&b| b != 0).collect();
        let x = slice_in(x, n, "x")?;
        let out = out.as_mut().map_or_else(|| fail(CATCMA_ERR_NULL_POINTER, "out is null"), Ok)?;
        *out = problem.evaluate(&c, x)?;
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or come from [`catcma_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn catcma_problem_free(problem: *mut CatcmaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Creates an optimizer for `n` continuous and `m` binary variables.
///
/// `freeze_mode` is `CATCMA_FREEZE_ADAPTIVE` (then `freeze_value` is the
/// factor `A`) or `CATCMA_FREEZE_FIXED` (then it is the iteration count). It
/// only matters when `use_ws` is set.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_new(
    n: usize,
    m: usize,
    use_ws: bool,
    use_hr: bool,
    freeze_mode: i32,
    freeze_value: f64,
    seed: u64,
    out: *mut *mut CatcmaOptimizer,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return fail(CATCMA_ERR_NULL_POINTER, "out is null");
        }
        let policy = match freeze_mode {
            CATCMA_FREEZE_ADAPTIVE if freeze_value.is_finite() && freeze_value >= 0.0 => {
                FreezePolicy::Adaptive(freeze_value)
            }
            CATCMA_FREEZE_FIXED if freeze_value >= 0.0 && freeze_value.fract() == 0.0 && freeze_value < 2f64.powi(53) => {
                FreezePolicy::Fixed(freeze_value as u64)
            }
            _ => {
                return fail(
                    CATCMA_ERR_INVALID_ARGUMENT,
                    format!("bad freeze policy ({freeze_mode}, {freeze_value})"),
                )
            }
        };
        let inner = InteractionOptimizer::new(n, m, Variant::from_flags(use_ws, use_hr), policy)?;
        *out = Box::into_raw(Box::new(CatcmaOptimizer {
            inner,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending: None,
        }));
        Ok(())
    })
}

/// # Safety
/// `opt` must be null or come from [`catcma_optimizer_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_free(opt: *mut CatcmaOptimizer) {
    if !opt.is_null() {
        drop(Box::from_raw(opt));
    }
}

/// Number of candidates per ask; 0 for a null handle.
///
/// # Safety
/// `opt` must be null or a live optimizer handle.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_population_size(opt: *const CatcmaOptimizer) -> usize {
    opt.as_ref().map_or(0, |o| o.inner.population_size())
}

/// Iterations the Bernoulli model stays frozen; 0 without warm-starting.
///
/// # Safety
/// `opt` must be null or a live optimizer handle.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_t_freeze(opt: *const CatcmaOptimizer) -> u64 {
    opt.as_ref().map_or(0, |o| o.inner.t_freeze())
}

/// Objective evaluations consumed by completed tells.
///
/// # Safety
/// `opt` must be null or a live optimizer handle.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_evals_used(opt: *const CatcmaOptimizer) -> u64 {
    opt.as_ref().map_or(0, |o| o.inner.evals_used())
}

/// Best value told so far; +infinity before the first tell or for a null handle.
///
/// # Safety
/// `opt` must be null or a live optimizer handle.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_best_value(opt: *const CatcmaOptimizer) -> f64 {
    opt.as_ref().map_or(f64::INFINITY, |o| o.inner.best_value())
}

/// Samples a population. Writes `lambda * m` bytes of binary vectors to `c`
/// and `lambda * n` decoded continuous vectors to `x`, candidate by
/// candidate. A new ask discards an untold population.
///
/// # Safety
/// `opt` must be a live handle; `c` and `x` must hold `c_len` and `x_len` elements.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_ask(
    opt: *mut CatcmaOptimizer,
    c: *mut u8,
    c_len: usize,
    x: *mut f64,
    x_len: usize,
) -> i32 {
    guard(|| {
        let opt = handle_mut(opt)?;
        let lambda = opt.inner.population_size();
        let (n, m) = (opt.inner.output_dim(), opt.inner.binary_dim());
        check_len("c buffer", lambda * m, c_len)?;
        check_len("x buffer", lambda * n, x_len)?;
        let c_out = slice_out(c, c_len, "c")?;
        let x_out = slice_out(x, x_len, "x")?;
        let population = opt.inner.ask(&mut opt.rng);
        for (k, cand) in population.iter().enumerate() {
            for (dst, &bit) in c_out[k * m..(k + 1) * m].iter_mut().zip(&cand.c) {
                *dst = u8::from(bit);
            }
            x_out[k * n..(k + 1) * n].copy_from_slice(opt.inner.decode(cand).as_slice());
        }
        opt.pending = Some(population);
        Ok(())
    })
}

/// Reports the objective values of the last asked population, in the same
/// order, and updates the distribution.
///
/// After `CATCMA_ERR_NUMERICAL` the optimizer must not be stepped again.
///
/// # Safety
/// `opt` must be a live handle; `values` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_tell(opt: *mut CatcmaOptimizer, values: *const f64, len: usize) -> i32 {
    guard(|| {
        let opt = handle_mut(opt)?;
        let Some(population) = opt.pending.as_mut() else {
            return fail(CATCMA_ERR_STATE, "tell called without a pending ask");
        };
        check_len("values", population.len(), len)?;
        let values = slice_in(values, len, "values")?;
        for (cand, &v) in population.iter_mut().zip(values) {
            cand.value = v;
        }
        let result = opt.inner.tell(population);
        match result {
            Ok(()) => {
                opt.pending = None;
                Ok(())
            }
            // Keep the population so a corrected tell can follow.
            Err(e @ Error::NonFiniteValue { .. }) => Err(e.into()),
            Err(e) => {
                opt.pending = None;
                Err(e.into())
            }
        }
    })
}

/// Copies the best `(c, x)` evaluated so far.
///
/// # Safety
/// `opt` must be a live handle; `c` and `x` must hold `m` and `n` elements.
#[no_mangle]
pub unsafe extern "C" fn catcma_optimizer_best_solution(
    opt: *const CatcmaOptimizer,
    c: *mut u8,
    m: usize,
    x: *mut f64,
    n: usize,
) -> i32 {
    guard(|| {
        let opt = handle(opt)?;
        check_len("c buffer", opt.inner.binary_dim(), m)?;
        check_len("x buffer", opt.inner.output_dim(), n)?;
        let Some((best_c, best_x)) = opt.inner.best_solution() else {
            return fail(CATCMA_ERR_NO_SOLUTION, "no population has been told yet");
        };
        for (dst, bit) in slice_out(c, m, "c")?.iter_mut().zip(best_c) {
            *dst = u8::from(bit);
        }
        slice_out(x, n, "x")?.copy_from_slice(best_x.as_slice());
        Ok(())
    })
}
