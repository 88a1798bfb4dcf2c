//! Periodic pseudo-spectral solver for
//! `y_t = nu y_xx - mu y_xxx + gamma y_xxxxx - eps y^2 y_x + eps_r y (1 - y)`.
//!
//! Each step splits the equation: the linear part is propagated exactly in
//! Fourier space and the cubic convection plus logistic reaction by RK4.
//! An integrating-factor RK4 solver provides reference solutions, and the
//! [`harness`] module measures temporal and spatial convergence orders.

pub mod cli;
pub mod error;
pub mod flows;
pub mod harness;
pub mod initial;
pub mod model;
pub mod reference;
pub mod spectral;
pub mod splitting;

pub use error::{KbfError, Result};
pub use flows::{apply_linear, build_propagator, nonlinear_flow, rk4_step, LinearPropagator, NonlinearFlowConfig};
pub use model::{full_rhs, linear_symbol, nonlinear_rhs_physical, nonlinear_rhs_spectral, LinearSymbol, ModelParams, SymbolConvention};
pub use spectral::{
    dealias_mask, derivative, eval_interpolant, interpolation_error_decay, make_grid, norm_values,
    to_physical, to_spectral, DealiasRule, Grid, GridSpec, NormKind, NormSpec, SpectralState,
    TestFunction,
};
pub use initial::{build_initial, IcKind, InitialConditionSpec};
pub use splitting::{evolve, lie_trotter_step, strang_step, Scheme, SolveConfig, Trajectory};
