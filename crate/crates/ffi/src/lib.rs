//! C ABI over `memsquench`.
//!
//! Conventions: every fallible call returns an `MsqStatus`; results go
//! through out-pointers. Handles are opaque and owned by the caller, who
//! releases them with the matching `*_free`. After a failure,
//! `msq_last_error_message` returns a description for the calling thread.
//! Array outputs take `(buf, cap, len)`: `len` always receives the full
//! length and `MSQ_STATUS_BUFFER_TOO_SMALL` is returned if `cap` is short.
//! No call unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use memsquench::meshfield::{BoundarySpec, Condition, Geometry};
use memsquench::mmpde::{integrate, Outcome, SimConfig, SimResult};
use memsquench::selfsim::{
    solve_similarity, stability_spectrum, SimilarityCase, SimilarityProfile,
};
use memsquench::smalltime::{
    predict_touchdown, solve_layer_hierarchy, touchdown_constants, DEFAULT_LAYER_GRID,
    DEFAULT_LAYER_LENGTH,
};
use memsquench::spectral::{epsilon_bar, principal_eigenpair, touchdown_time_bound};
use memsquench::Error;

pub const MSQ_GEOMETRY_STRIP: u32 = 0;
pub const MSQ_GEOMETRY_DISC: u32 = 1;
pub const MSQ_BC_CLAMPED: u32 = 0;
pub const MSQ_BC_NAVIER: u32 = 1;
pub const MSQ_OUTCOME_TOUCHDOWN: u32 = 0;
pub const MSQ_OUTCOME_STEADY_STATE: u32 = 1;
pub const MSQ_OUTCOME_INCONCLUSIVE: u32 = 2;
pub const MSQ_CASE_LINE: u32 = 0;
pub const MSQ_CASE_RADIAL_ORIGIN: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    /// The requested value does not exist for this result (e.g. `t_c` without touchdown).
    NotAvailable = 4,
    NoConvergence = 5,
    StiffnessFailure = 6,
    Singular = 7,
    OutOfRange = 8,
    Io = 9,
    Panic = 10,
    Internal = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> MsqStatus {
    match err {
        Error::NoConvergence { .. } | Error::QuadFailure { .. } | Error::IterateInvalid(_) => {
            MsqStatus::NoConvergence
        }
        Error::StiffnessFailure { .. }
        | Error::MeshTangled { .. }
        | Error::TouchdownReached { .. } => MsqStatus::StiffnessFailure,
        Error::SingularMatrix { .. } => MsqStatus::Singular,
        Error::OutOfRange(_)
        | Error::OutOfDomain(_)
        | Error::PredictionOutOfRange(_)
        | Error::BoundInapplicable { .. }
        | Error::InvalidTime { .. } => MsqStatus::OutOfRange,
        Error::InvalidConfig(_) | Error::InvalidBracket { .. } | Error::Unsupported(_) => {
            MsqStatus::InvalidArgument
        }
        Error::Io(_) | Error::Json(_) => MsqStatus::Io,
        _ => MsqStatus::Internal,
    }
}

fn fail(status: MsqStatus, msg: impl Into<String>) -> MsqStatus {
    set_error(msg.into());
    status
}

/// Runs `f` with panics converted to `MSQ_STATUS_PANIC`.
fn guard<F: FnOnce() -> MsqStatus>(f: F) -> MsqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(MsqStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lib<T>(r: memsquench::Result<T>) -> Result<T, MsqStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn spec_of(geometry: u32, condition: u32) -> Result<BoundarySpec, MsqStatus> {
    let g = match geometry {
        MSQ_GEOMETRY_STRIP => Geometry::Strip,
        MSQ_GEOMETRY_DISC => Geometry::Disc,
        _ => {
            return Err(fail(
                MsqStatus::InvalidArgument,
                format!("unknown geometry {geometry}"),
            ))
        }
    };
    let c = match condition {
        MSQ_BC_CLAMPED => Condition::Clamped,
        MSQ_BC_NAVIER => Condition::Navier,
        _ => {
            return Err(fail(
                MsqStatus::InvalidArgument,
                format!("unknown condition {condition}"),
            ))
        }
    };
    Ok(BoundarySpec::new(g, c))
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn write_out<T>(out: *mut T, v: T) -> MsqStatus {
    if out.is_null() {
        return fail(MsqStatus::NullPointer, "null output pointer");
    }
    out.write(v);
    MsqStatus::Ok
}

/// # Safety
/// `buf` must be valid for `cap` writes when `cap > 0`; `len` valid or null.
unsafe fn write_slice(data: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> MsqStatus {
    if len.is_null() {
        return fail(MsqStatus::NullPointer, "null length pointer");
    }
    len.write(data.len());
    if cap < data.len() {
        return fail(
            MsqStatus::BufferTooSmall,
            format!("need {} elements, have {cap}", data.len()),
        );
    }
    if !data.is_empty() {
        if buf.is_null() {
            return fail(MsqStatus::NullPointer, "null buffer");
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    MsqStatus::Ok
}

/// Copies the calling thread's last error message (NUL-terminated, truncated
/// to `cap`) and returns its full length in bytes without the terminator;
/// 0 when there is none.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn msq_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && cap > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn msq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `mu0` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_principal_eigenvalue(
    geometry: u32,
    condition: u32,
    mu0: *mut f64,
) -> MsqStatus {
    guard(|| {
        let spec = match spec_of(geometry, condition) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match lib(principal_eigenpair(spec)) {
            Ok(p) => write_out(mu0, p.mu0),
            Err(s) => s,
        }
    })
}

#[no_mangle]
pub extern "C" fn msq_epsilon_bar(mu0: f64) -> f64 {
    epsilon_bar(mu0)
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_touchdown_time_bound(
    epsilon: f64,
    mu0: f64,
    out: *mut f64,
) -> MsqStatus {
    guard(|| match lib(touchdown_time_bound(epsilon, mu0)) {
        Ok(t) => write_out(out, t),
        Err(s) => s,
    })
}

/// Asymptotic touchdown locations at `t_c`: two points on the strip, one
/// radius on the disc.
///
/// # Safety
/// See the module conventions for `(buf, cap, len)`.
#[no_mangle]
pub unsafe extern "C" fn msq_predict_touchdown(
    geometry: u32,
    condition: u32,
    epsilon: f64,
    t_c: f64,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> MsqStatus {
    guard(|| {
        let spec = match spec_of(geometry, condition) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let pts = lib(
            solve_layer_hierarchy(spec, DEFAULT_LAYER_LENGTH, DEFAULT_LAYER_GRID)
                .and_then(|p| touchdown_constants(&p))
                .and_then(|k| predict_touchdown(&k, epsilon, t_c)),
        );
        match pts {
            Ok(p) => write_slice(&p, buf, cap, len),
            Err(s) => s,
        }
    })
}

/// Opaque simulation configuration.
pub struct MsqSimConfig(SimConfig);

/// Opaque simulation result.
pub struct MsqSimResult(SimResult);

/// Opaque similarity profile.
pub struct MsqProfile(SimilarityProfile);

/// New configuration with default tolerances.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_config_new(
    geometry: u32,
    condition: u32,
    epsilon: f64,
    n_intervals: usize,
    out: *mut *mut MsqSimConfig,
) -> MsqStatus {
    guard(|| {
        let spec = match spec_of(geometry, condition) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let cfg = SimConfig::new(epsilon, spec, n_intervals);
        if let Err(s) = lib(cfg.validate()) {
            return s;
        }
        write_out(out, Box::into_raw(Box::new(MsqSimConfig(cfg))))
    })
}

/// # Safety
/// `cfg` must come from `msq_config_new` and not be freed yet (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn msq_config_free(cfg: *mut MsqSimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live handle.
unsafe fn config_mut<'a>(cfg: *mut MsqSimConfig) -> Result<&'a mut SimConfig, MsqStatus> {
    cfg.as_mut()
        .map(|c| &mut c.0)
        .ok_or_else(|| fail(MsqStatus::NullPointer, "null config"))
}

/// Applies `edit`, rolling back if the result fails validation.
unsafe fn edit_config(cfg: *mut MsqSimConfig, edit: impl FnOnce(&mut SimConfig)) -> MsqStatus {
    guard(|| {
        let c = match config_mut(cfg) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let before = c.clone();
        edit(c);
        match lib(c.validate()) {
            Ok(()) => MsqStatus::Ok,
            Err(s) => {
                *c = before;
                s
            }
        }
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msq_config_set_threshold(
    cfg: *mut MsqSimConfig,
    threshold: f64,
) -> MsqStatus {
    edit_config(cfg, |c| c.touchdown_threshold = threshold)
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msq_config_set_gamma(cfg: *mut MsqSimConfig, gamma: f64) -> MsqStatus {
    edit_config(cfg, |c| c.gamma = gamma)
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn msq_config_set_tolerances(
    cfg: *mut MsqSimConfig,
    rtol: f64,
    atol: f64,
) -> MsqStatus {
    edit_config(cfg, |c| {
        c.rtol = rtol;
        c.atol = atol;
    })
}

/// Replaces the snapshot times with `times[0..len]`.
///
/// # Safety
/// `cfg` must be a live handle; `times` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn msq_config_set_snapshot_times(
    cfg: *mut MsqSimConfig,
    times: *const f64,
    len: usize,
) -> MsqStatus {
    if len > 0 && times.is_null() {
        return fail(MsqStatus::NullPointer, "null times");
    }
    let v = if len == 0 {
        Vec::new()
    } else {
        std::slice::from_raw_parts(times, len).to_vec()
    };
    edit_config(cfg, |c| c.snapshot_times = v)
}

/// Runs the simulation until it stops; query the outcome for the reason.
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_simulate(
    cfg: *const MsqSimConfig,
    out: *mut *mut MsqSimResult,
) -> MsqStatus {
    guard(|| {
        let Some(c) = cfg.as_ref() else {
            return fail(MsqStatus::NullPointer, "null config");
        };
        if out.is_null() {
            return fail(MsqStatus::NullPointer, "null output pointer");
        }
        match lib(integrate(&c.0)) {
            Ok(r) => write_out(out, Box::into_raw(Box::new(MsqSimResult(r)))),
            Err(s) => s,
        }
    })
}

/// # Safety
/// `res` must come from `msq_simulate` and not be freed yet (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn msq_result_free(res: *mut MsqSimResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

unsafe fn result_ref<'a>(res: *const MsqSimResult) -> Result<&'a SimResult, MsqStatus> {
    res.as_ref()
        .map(|r| &r.0)
        .ok_or_else(|| fail(MsqStatus::NullPointer, "null result"))
}

/// # Safety
/// `res` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_result_outcome(res: *const MsqSimResult, out: *mut u32) -> MsqStatus {
    guard(|| match result_ref(res) {
        Ok(r) => write_out(
            out,
            match r.outcome {
                Outcome::Touchdown => MSQ_OUTCOME_TOUCHDOWN,
                Outcome::SteadyState => MSQ_OUTCOME_STEADY_STATE,
                Outcome::Inconclusive => MSQ_OUTCOME_INCONCLUSIVE,
            },
        ),
        Err(s) => s,
    })
}

/// Extrapolated touchdown time; `MSQ_STATUS_NOT_AVAILABLE` without touchdown.
///
/// # Safety
/// `res` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_result_t_c(res: *const MsqSimResult, out: *mut f64) -> MsqStatus {
    guard(|| match result_ref(res) {
        Ok(r) => match r.t_c {
            Some(t) => write_out(out, t),
            None => fail(
                MsqStatus::NotAvailable,
                format!("no touchdown time: outcome {:?}", r.outcome),
            ),
        },
        Err(s) => s,
    })
}

/// # Safety
/// `res` must be a live handle; see the module conventions for `(buf, cap, len)`.
#[no_mangle]
pub unsafe extern "C" fn msq_result_touchdown_points(
    res: *const MsqSimResult,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> MsqStatus {
    guard(|| match result_ref(res) {
        Ok(r) => write_slice(&r.touchdown_points, buf, cap, len),
        Err(s) => s,
    })
}

/// Number of snapshots: requested times first, then the final state.
///
/// # Safety
/// `res` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_result_snapshot_count(
    res: *const MsqSimResult,
    out: *mut usize,
) -> MsqStatus {
    guard(|| match result_ref(res) {
        Ok(r) => write_out(out, r.snapshots.len()),
        Err(s) => s,
    })
}

/// Time of snapshot `index` with its mesh nodes and nodal `u`. `nodes` and `u` are
/// both `(buf, cap)` pairs sharing the length written to `len`.
///
/// # Safety
/// `res` must be a live handle; buffers valid for `cap` writes; `t`, `len` valid.
#[no_mangle]
pub unsafe extern "C" fn msq_result_snapshot(
    res: *const MsqSimResult,
    index: usize,
    t: *mut f64,
    nodes: *mut f64,
    u: *mut f64,
    cap: usize,
    len: *mut usize,
) -> MsqStatus {
    guard(|| {
        let r = match result_ref(res) {
            Ok(r) => r,
            Err(s) => return s,
        };
        let Some(s) = r.snapshots.get(index) else {
            return fail(
                MsqStatus::OutOfRange,
                format!("snapshot {index} of {}", r.snapshots.len()),
            );
        };
        let st = write_out(t, s.t);
        if st != MsqStatus::Ok {
            return st;
        }
        let values: Vec<f64> = s.field.nodal().iter().map(|d| d[0]).collect();
        let st = write_slice(s.field.mesh().nodes(), nodes, cap, len);
        if st != MsqStatus::Ok {
            return st;
        }
        write_slice(&values, u, cap, len)
    })
}

/// Similarity profile by Newton from the amplitude `c0_init` on `n` intervals.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_profile_solve(
    case_: u32,
    c0_init: f64,
    length: f64,
    n: usize,
    out: *mut *mut MsqProfile,
) -> MsqStatus {
    guard(|| {
        let case = match case_ {
            MSQ_CASE_LINE => SimilarityCase::Line,
            MSQ_CASE_RADIAL_ORIGIN => SimilarityCase::RadialOrigin,
            _ => return fail(MsqStatus::InvalidArgument, format!("unknown case {case_}")),
        };
        if out.is_null() {
            return fail(MsqStatus::NullPointer, "null output pointer");
        }
        match lib(solve_similarity(case, c0_init, length, n)) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(MsqProfile(p)))),
            Err(s) => s,
        }
    })
}

/// # Safety
/// `p` must come from `msq_profile_solve` and not be freed yet (null is ignored).
#[no_mangle]
pub unsafe extern "C" fn msq_profile_free(p: *mut MsqProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn profile_ref<'a>(p: *const MsqProfile) -> Result<&'a SimilarityProfile, MsqStatus> {
    p.as_ref()
        .map(|p| &p.0)
        .ok_or_else(|| fail(MsqStatus::NullPointer, "null profile"))
}

/// Far-field amplitude `c0`.
///
/// # Safety
/// `p` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_profile_c0(p: *const MsqProfile, out: *mut f64) -> MsqStatus {
    guard(|| match profile_ref(p) {
        Ok(p) => write_out(out, p.c0),
        Err(s) => s,
    })
}

/// Profile value at `eta`; `MSQ_STATUS_OUT_OF_RANGE` outside the grid.
///
/// # Safety
/// `p` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn msq_profile_eval(
    p: *const MsqProfile,
    eta: f64,
    out: *mut f64,
) -> MsqStatus {
    guard(|| match profile_ref(p) {
        Ok(p) => match p.eval(eta) {
            Some(v) => write_out(out, v),
            None => fail(MsqStatus::OutOfRange, format!("eta {eta} outside the grid")),
        },
        Err(s) => s,
    })
}

/// Leading `n_eigs` eigenvalues of the linearisation, largest first.
///
/// # Safety
/// `p` must be a live handle; see the module conventions for `(buf, cap, len)`.
#[no_mangle]
pub unsafe extern "C" fn msq_profile_eigenvalues(
    p: *const MsqProfile,
    n_eigs: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> MsqStatus {
    guard(|| {
        let p = match profile_ref(p) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match lib(stability_spectrum(p, n_eigs)) {
            Ok(s) => write_slice(&s.eigenvalues(), buf, cap, len),
            Err(s) => s,
        }
    })
}
