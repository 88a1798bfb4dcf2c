//! C ABI over `kbf-core`.
//!
//! Grids and states are opaque heap handles created by `kbf_*_new`/solver
//! calls and released with the matching `*_free`. Every fallible call
//! returns a [`KbfStatus`]; on failure a description is available from
//! [`kbf_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kbf_core::harness::{error_norm, observed_order};
use kbf_core::reference::integrating_factor_rk4_solve;
use kbf_core::{
    evolve, linear_symbol, make_grid, to_physical, to_spectral, DealiasRule, Grid, KbfError,
    ModelParams, NonlinearFlowConfig, NormSpec, Scheme, SolveConfig, SpectralState,
    SymbolConvention,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    DimensionMismatch = 4,
    GridMismatch = 5,
    NotRealRepresentable = 6,
    Validation = 7,
    BlowUp = 8,
    NonFinite = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbfScheme {
    Strang = 0,
    LieTrotter = 1,
}

/// Sign convention of the fifth-order term; `Spectral` is the default.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbfSymbol {
    Spectral = 0,
    Operator = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KbfParams {
    pub nu: f64,
    pub mu: f64,
    pub gamma: f64,
    pub eps_conv: f64,
    pub eps_react: f64,
    pub symbol: KbfSymbol,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KbfSolveOptions {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: KbfScheme,
    /// RK4 steps per nonlinear flow; 0 is rejected.
    pub substeps: u32,
    /// Non-zero applies the 2/3 dealiasing rule to the nonlinear products.
    pub dealias: u8,
    /// Non-zero merges adjacent linear half steps.
    pub fuse_half_steps: u8,
}

/// Opaque periodic grid.
pub struct KbfGrid {
    inner: Grid,
}

/// Opaque Fourier-coefficient state.
pub struct KbfState {
    inner: SpectralState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(err: &KbfError) -> KbfStatus {
    match err {
        KbfError::InvalidGrid(_) => KbfStatus::InvalidGrid,
        KbfError::DimensionMismatch { .. } => KbfStatus::DimensionMismatch,
        KbfError::GridMismatch => KbfStatus::GridMismatch,
        KbfError::NotRealRepresentable { .. } => KbfStatus::NotRealRepresentable,
        KbfError::Validation { .. } => KbfStatus::Validation,
        KbfError::BlowUp { .. } => KbfStatus::BlowUp,
        KbfError::NonFiniteInput | KbfError::NonFiniteState | KbfError::SingularSolution(_) => {
            KbfStatus::NonFinite
        }
        KbfError::StudyPoint { source, .. } => status_of(source),
        _ => KbfStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic in the thread-local slot.
fn guarded<F>(f: F) -> KbfStatus
where
    F: FnOnce() -> Result<(), (KbfStatus, String)>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KbfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside kbf");
            KbfStatus::Panic
        }
    }
}

fn core<T>(r: kbf_core::Result<T>) -> Result<T, (KbfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (KbfStatus, String) {
    (KbfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (KbfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (KbfStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    what: &str,
) -> Result<&'a mut [T], (KbfStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (KbfStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn model(p: &KbfParams) -> Result<ModelParams, (KbfStatus, String)> {
    let convention = match p.symbol {
        KbfSymbol::Spectral => SymbolConvention::Spectral,
        KbfSymbol::Operator => SymbolConvention::Operator,
    };
    Ok(core(ModelParams::new(p.nu, p.mu, p.gamma, p.eps_conv, p.eps_react))?.with_convention(convention))
}

fn state_handle(inner: SpectralState) -> *mut KbfState {
    Box::into_raw(Box::new(KbfState { inner }))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next kbf call on the same thread.
#[no_mangle]
pub extern "C" fn kbf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn kbf_status_string(status: KbfStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        KbfStatus::Ok => b"ok\0",
        KbfStatus::NullPointer => b"null pointer\0",
        KbfStatus::InvalidArgument => b"invalid argument\0",
        KbfStatus::InvalidGrid => b"invalid grid\0",
        KbfStatus::DimensionMismatch => b"dimension mismatch\0",
        KbfStatus::GridMismatch => b"grid mismatch\0",
        KbfStatus::NotRealRepresentable => b"state not real-representable\0",
        KbfStatus::Validation => b"validation error\0",
        KbfStatus::BlowUp => b"blow-up\0",
        KbfStatus::NonFinite => b"non-finite value\0",
        KbfStatus::BufferTooSmall => b"buffer too small\0",
        KbfStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn kbf_default_params() -> KbfParams {
    KbfParams {
        nu: 1.0,
        mu: 1.0,
        gamma: 1.0,
        eps_conv: 1.0,
        eps_react: 1.0,
        symbol: KbfSymbol::Spectral,
    }
}

#[no_mangle]
pub extern "C" fn kbf_default_solve_options(dt: f64, t_final: f64) -> KbfSolveOptions {
    KbfSolveOptions {
        dt,
        t_final,
        scheme: KbfScheme::Strang,
        substeps: 1,
        dealias: 0,
        fuse_half_steps: 0,
    }
}

/// Creates a grid of `n_modes` points on `[domain_start, domain_start + domain_length)`.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn kbf_grid_new(
    n_modes: usize,
    domain_start: f64,
    domain_length: f64,
    out: *mut *mut KbfGrid,
) -> KbfStatus {
    guarded(|| {
        let g = core(make_grid(n_modes, domain_start, domain_length))?;
        write_out(out, Box::into_raw(Box::new(KbfGrid { inner: g })), "out")
    })
}

/// # Safety
/// `grid` must come from [`kbf_grid_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kbf_grid_free(grid: *mut KbfGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of collocation points, or 0 for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn kbf_grid_n_modes(grid: *const KbfGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.n_modes())
}

/// Copies the collocation points into `out[0..len]`; `len` must be at least N.
///
/// # Safety
/// `grid` must be live and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn kbf_grid_points(grid: *const KbfGrid, out: *mut f64, len: usize) -> KbfStatus {
    guarded(|| {
        let g = &deref(grid, "grid")?.inner;
        let dst = slice_mut(out, len, "out")?;
        if len < g.n_modes() {
            return Err((KbfStatus::BufferTooSmall, format!("need {} values", g.n_modes())));
        }
        dst[..g.n_modes()].copy_from_slice(g.points());
        Ok(())
    })
}

/// Transforms `len` physical samples into a new state on `grid`.
///
/// # Safety
/// `grid` must be live, `values` valid for `len` reads, `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn kbf_state_from_values(
    grid: *const KbfGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut KbfState,
) -> KbfStatus {
    guarded(|| {
        let g = &deref(grid, "grid")?.inner;
        let v = slice(values, len, "values")?;
        let s = core(to_spectral(v, g))?;
        write_out(out, state_handle(s), "out")
    })
}

/// # Safety
/// `state` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kbf_state_free(state: *mut KbfState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of collocation points of the state's grid, or 0 for null.
///
/// # Safety
/// `state` must be null or a live state handle.
#[no_mangle]
pub unsafe extern "C" fn kbf_state_len(state: *const KbfState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.grid().n_modes())
}

/// Writes the physical values of `state` into `out[0..len]`.
///
/// # Safety
/// `state` must be live and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn kbf_state_values(state: *const KbfState, out: *mut f64, len: usize) -> KbfStatus {
    guarded(|| {
        let s = &deref(state, "state")?.inner;
        let n = s.grid().n_modes();
        let dst = slice_mut(out, len, "out")?;
        if len < n {
            return Err((KbfStatus::BufferTooSmall, format!("need {n} values")));
        }
        dst[..n].copy_from_slice(&core(to_physical(s))?);
        Ok(())
    })
}

/// Sobolev norm of order `s` (0 is the grid-weighted L2 norm).
///
/// # Safety
/// `state` must be live and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kbf_state_norm(state: *const KbfState, s: u32, out: *mut f64) -> KbfStatus {
    guarded(|| {
        let st = &deref(state, "state")?.inner;
        write_out(out, st.norm(NormSpec::hs(s)), "out")
    })
}

/// `||a - b||` in the order-`s` Sobolev norm; a coarser state is
/// interpolated onto the finer grid first.
///
/// # Safety
/// `a`, `b` must be live and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kbf_error_norm(
    a: *const KbfState,
    b: *const KbfState,
    s: u32,
    out: *mut f64,
) -> KbfStatus {
    guarded(|| {
        let a = &deref(a, "a")?.inner;
        let b = &deref(b, "b")?.inner;
        write_out(out, core(error_norm(a, b, NormSpec::hs(s)))?, "out")
    })
}

/// Integrates `initial` to `options.t_final` with the splitting scheme and
/// returns the final state.
///
/// # Safety
/// Pointers must be live/valid; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kbf_solve(
    initial: *const KbfState,
    params: *const KbfParams,
    options: *const KbfSolveOptions,
    out: *mut *mut KbfState,
) -> KbfStatus {
    guarded(|| {
        let init = &deref(initial, "initial")?.inner;
        let p = model(deref(params, "params")?)?;
        let o = deref(options, "options")?;
        let mut cfg = SolveConfig::new(o.dt, o.t_final).with_scheme(match o.scheme {
            KbfScheme::Strang => Scheme::Strang,
            KbfScheme::LieTrotter => Scheme::LieTrotter,
        });
        cfg.nonlinear = NonlinearFlowConfig {
            substeps: o.substeps as usize,
            dealias: if o.dealias != 0 { DealiasRule::TwoThirds } else { DealiasRule::None },
        };
        cfg.fuse_half_steps = o.fuse_half_steps != 0;
        let traj = core(evolve(init, &p, &cfg, None))?;
        write_out(out, state_handle(traj.final_state), "out")
    })
}

/// Integrating-factor RK4 reference with step `dt`.
///
/// # Safety
/// Pointers must be live/valid; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn kbf_reference(
    initial: *const KbfState,
    params: *const KbfParams,
    dt: f64,
    t_final: f64,
    out: *mut *mut KbfState,
) -> KbfStatus {
    guarded(|| {
        let init = &deref(initial, "initial")?.inner;
        let p = model(deref(params, "params")?)?;
        let sym = linear_symbol(&p, init.grid());
        let s = core(integrating_factor_rk4_solve(init, &p, &sym, dt, t_final))?;
        write_out(out, state_handle(s), "out")
    })
}

/// Pairwise orders `log(e[i]/e[i+1]) / log(factor)` written to
/// `orders[0..len-1]`.
///
/// # Safety
/// `errors` valid for `len` reads, `orders` for `orders_len` writes.
#[no_mangle]
pub unsafe extern "C" fn kbf_observed_order(
    errors: *const f64,
    len: usize,
    factor: f64,
    orders: *mut f64,
    orders_len: usize,
) -> KbfStatus {
    guarded(|| {
        let e = slice(errors, len, "errors")?;
        let o = core(observed_order(e, factor))?;
        let dst = slice_mut(orders, orders_len, "orders")?;
        if orders_len < o.len() {
            return Err((KbfStatus::BufferTooSmall, format!("need {} values", o.len())));
        }
        dst[..o.len()].copy_from_slice(&o);
        Ok(())
    })
}
