//! C ABI over `pilot-core`.
//!
//! Scenarios and solve results are opaque handles owned by the caller and
//! released with their `_free` function. Every call returns a
//! [`PilotStatus`]; on failure [`pilot_last_error`] describes the cause.
//! Assignments cross the boundary as row-major `L * K` arrays where entry
//! `j * K + u` is the pilot of user `u` in cell `j`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pilot_core::encoding::search_space_size;
use pilot_core::{Error, FadingTensor, FitnessMode, GaConfig, PilotAssignment, Scenario, SeModel, SolveResult, SolverKind, SolverSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Exhaustive search space above its limit.
    Infeasible = 3,
    BufferTooSmall = 4,
    Internal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotSolver {
    Rpa = 0,
    Expa = 1,
    Ga = 2,
    SkGa = 3,
    PkGa = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotFitness {
    SumSe = 0,
    Interference = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotGaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elite_count: usize,
    pub cluster_count: usize,
    pub recluster_period: usize,
    pub fitness: PilotFitness,
    /// Exhaustive-search limit on the number of assignments.
    pub expa_limit: u64,
}

/// Opaque scenario handle: a large-scale fading tensor.
pub struct PilotScenario {
    beta: FadingTensor,
}

/// Opaque solve result handle.
pub struct PilotResult {
    inner: SolveResult,
}

struct Failure {
    status: PilotStatus,
    message: String,
}

impl Failure {
    fn null(what: &str) -> Self {
        Self { status: PilotStatus::NullPointer, message: format!("{what} is null") }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self { status: PilotStatus::InvalidArgument, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Infeasible { .. } => PilotStatus::Infeasible,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => PilotStatus::Internal,
            _ => PilotStatus::InvalidArgument,
        };
        Self { status, message: e.to_string() }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PilotStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PilotStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            PilotStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    if len < src.len() {
        return Err(Failure {
            status: PilotStatus::BufferTooSmall,
            message: format!("buffer holds {len} values, {} needed", src.len()),
        });
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pilot_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Generates a scenario (hexagonal cells, uniform user drop, path loss and
/// shadowing) with the library's default physical parameters.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pilot_scenario_generate(
    cells: usize,
    users: usize,
    antennas: usize,
    seed: u64,
    out: *mut *mut PilotScenario,
) -> PilotStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let beta = Scenario::new(cells, users, antennas, seed).realize()?.beta;
        out.write(Box::into_raw(Box::new(PilotScenario { beta })));
        Ok(())
    })
}

/// Wraps a caller-supplied tensor laid out `[bs][cell][user]`, `L * L * K`
/// finite positive values.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_scenario_from_beta(
    cells: usize,
    users: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut PilotScenario,
) -> PilotStatus {
    guard(|| {
        if data.is_null() {
            return Err(Failure::null("data"));
        }
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let beta = FadingTensor::from_vec(cells, users, values)?;
        out.write(Box::into_raw(Box::new(PilotScenario { beta })));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn pilot_scenario_free(scenario: *mut PilotScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `scenario` must be a live handle; `cells` and `users` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_scenario_dims(
    scenario: *const PilotScenario,
    cells: *mut usize,
    users: *mut usize,
) -> PilotStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        write_out(cells, s.beta.cells(), "cells")?;
        write_out(users, s.beta.users(), "users")
    })
}

/// Copies the `L * L * K` tensor into `out`.
///
/// # Safety
/// `scenario` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pilot_scenario_beta(scenario: *const PilotScenario, out: *mut f64, len: usize) -> PilotStatus {
    guard(|| copy_out(deref(scenario, "scenario")?.beta.as_slice(), out, len))
}

unsafe fn read_assignment(beta: &FadingTensor, pilots: *const usize, len: usize) -> Result<PilotAssignment, Failure> {
    if pilots.is_null() {
        return Err(Failure::null("pilots"));
    }
    let (l, k) = (beta.cells(), beta.users());
    if len != l * k {
        return Err(Failure::invalid(format!("assignment has {len} entries, expected {}", l * k)));
    }
    let flat = std::slice::from_raw_parts(pilots, len);
    let a = PilotAssignment::from_rows(flat.chunks(k).map(<[usize]>::to_vec).collect())?;
    a.check_shape(l, k)?;
    Ok(a)
}

/// Sum spectral efficiency of an assignment.
///
/// # Safety
/// `scenario` must be a live handle; `pilots` must hold `len` values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_objective(
    scenario: *const PilotScenario,
    pilots: *const usize,
    len: usize,
    out: *mut f64,
) -> PilotStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let a = read_assignment(&s.beta, pilots, len)?;
        write_out(out, SeModel::default().objective(&s.beta, &a)?, "out")
    })
}

/// Library defaults for the genetic solvers.
#[no_mangle]
pub extern "C" fn pilot_ga_config_default() -> PilotGaConfig {
    let c = GaConfig::default();
    PilotGaConfig {
        population_size: c.population_size,
        generations: c.generations,
        crossover_prob: c.crossover_prob,
        mutation_prob: c.mutation_prob,
        elite_count: c.elite_count,
        cluster_count: c.cluster_count,
        recluster_period: c.recluster_period,
        fitness: PilotFitness::SumSe,
        expa_limit: pilot_core::solvers::DEFAULT_EXPA_LIMIT,
    }
}

fn solver_kind(s: PilotSolver) -> SolverKind {
    match s {
        PilotSolver::Rpa => SolverKind::Rpa,
        PilotSolver::Expa => SolverKind::Expa,
        PilotSolver::Ga => SolverKind::Ga,
        PilotSolver::SkGa => SolverKind::SkGa,
        PilotSolver::PkGa => SolverKind::PkGa,
    }
}

/// Runs one solver. `config` may be null for defaults; `parallelism` only
/// matters for `PILOT_SOLVER_PK_GA`.
///
/// # Safety
/// `scenario` must be a live handle, `config` null or readable, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_solve(
    scenario: *const PilotScenario,
    solver: PilotSolver,
    config: *const PilotGaConfig,
    parallelism: usize,
    seed: u64,
    out: *mut *mut PilotResult,
) -> PilotStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let c = config.as_ref().copied().unwrap_or_else(|| pilot_ga_config_default());
        let kind = solver_kind(solver);
        let spec = SolverSpec {
            solver: kind,
            config: GaConfig {
                population_size: c.population_size,
                generations: c.generations,
                crossover_prob: c.crossover_prob,
                mutation_prob: c.mutation_prob,
                elite_count: c.elite_count,
                cluster_count: c.cluster_count,
                recluster_period: c.recluster_period,
                fitness_mode: match c.fitness {
                    PilotFitness::SumSe => FitnessMode::SumSe,
                    PilotFitness::Interference => FitnessMode::Interference,
                },
                seed,
            },
            parallelism,
            expa_limit: c.expa_limit,
        };
        if kind.is_genetic() {
            spec.config.validate()?;
        }
        let inner = spec.solve(&s.beta, seed)?;
        out.write(Box::into_raw(Box::new(PilotResult { inner })));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn pilot_result_free(result: *mut PilotResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Best fitness found (sum SE, or negated interference in interference mode).
///
/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_result_objective(result: *const PilotResult, out: *mut f64) -> PilotStatus {
    guard(|| write_out(out, deref(result, "result")?.inner.best_objective, "out"))
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_result_evaluations(result: *const PilotResult, out: *mut u64) -> PilotStatus {
    guard(|| write_out(out, deref(result, "result")?.inner.evaluations, "out"))
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_result_wall_time(result: *const PilotResult, out: *mut f64) -> PilotStatus {
    guard(|| write_out(out, deref(result, "result")?.inner.wall_time, "out"))
}

/// Copies the best assignment, `L * K` entries.
///
/// # Safety
/// `result` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pilot_result_assignment(result: *const PilotResult, out: *mut usize, len: usize) -> PilotStatus {
    guard(|| {
        let flat: Vec<usize> = deref(result, "result")?.inner.best.rows().flatten().copied().collect();
        copy_out(&flat, out, len)
    })
}

/// Number of history entries (`T + 1` for the genetic solvers).
///
/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_result_history_len(result: *const PilotResult, out: *mut usize) -> PilotStatus {
    guard(|| write_out(out, deref(result, "result")?.inner.history.len(), "out"))
}

/// Copies the per-generation best fitness.
///
/// # Safety
/// `result` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pilot_result_history(result: *const PilotResult, out: *mut f64, len: usize) -> PilotStatus {
    guard(|| copy_out(&deref(result, "result")?.inner.history, out, len))
}

/// `(K!)^(L-1)` as a decimal string. Release with [`pilot_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pilot_search_space(cells: usize, users: usize, out: *mut *mut c_char) -> PilotStatus {
    guard(|| {
        if cells == 0 || users == 0 {
            return Err(Failure::invalid("cells and users must be positive"));
        }
        let text = CString::new(search_space_size(cells, users).to_string()).expect("digits only");
        write_out(out, text.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn pilot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn pilot_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
