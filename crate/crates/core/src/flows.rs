//! The two subflows of the splitting: the exact Fourier-space exponential
//! for the linear part and classical RK4 for the nonlinear part.

use num_complex::Complex64;

use crate::error::{KbfError, Result};
use crate::model::{nonlinear_rhs_spectral, LinearSymbol, ModelParams};
use crate::spectral::{dealias_mask, DealiasRule, Grid, SpectralState};

/// Diagonal propagator `exp(lambda_k t)` of the linear part.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    factors: Vec<Complex64>,
    duration: f64,
    grid: Grid,
}

impl LinearPropagator {
    pub fn factors(&self) -> &[Complex64] {
        &self.factors
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn apply_in_place(&self, state: &mut SpectralState) -> Result<()> {
        if *state.grid().as_ref() != *self.grid {
            return Err(KbfError::GridMismatch);
        }
        for (c, f) in state.coeffs_mut().iter_mut().zip(&self.factors) {
            *c *= f;
        }
        Ok(())
    }
}

/// Rejects `t < 0`: the backward flow amplifies high modes without bound.
pub fn build_propagator(symbol: &LinearSymbol, t: f64) -> Result<LinearPropagator> {
    if !t.is_finite() || t < 0.0 {
        return Err(KbfError::NegativeDuration(t));
    }
    let factors = symbol.values().iter().map(|l| (l * t).exp()).collect();
    Ok(LinearPropagator {
        factors,
        duration: t,
        grid: symbol.grid().clone(),
    })
}

pub fn apply_linear(prop: &LinearPropagator, state: &SpectralState) -> Result<SpectralState> {
    let mut out = state.clone();
    prop.apply_in_place(&mut out)?;
    Ok(out)
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<F>(state: &SpectralState, dt: f64, mut rhs: F) -> Result<SpectralState>
where
    F: FnMut(&SpectralState) -> Result<SpectralState>,
{
    if !dt.is_finite() {
        return Err(KbfError::Config(format!("time step must be finite, got {dt}")));
    }
    let mut stage = |s: &SpectralState| -> Result<SpectralState> {
        let k = rhs(s)?;
        if k.is_finite() {
            Ok(k)
        } else {
            Err(KbfError::NonFiniteState)
        }
    };
    let a = stage(state)?;
    let b = stage(&state.add_scaled(0.5 * dt, &a)?)?;
    let c = stage(&state.add_scaled(0.5 * dt, &b)?)?;
    let d = stage(&state.add_scaled(dt, &c)?)?;

    let mut next = state.clone();
    let w = dt / 6.0;
    for (((y, a), (b, c)), d) in next
        .coeffs_mut()
        .iter_mut()
        .zip(a.coeffs())
        .zip(b.coeffs().iter().zip(c.coeffs()))
        .zip(d.coeffs())
    {
        *y += (a + (b + c) * 2.0 + d) * w;
    }
    if !next.is_finite() {
        return Err(KbfError::NonFiniteState);
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonlinearFlowConfig {
    /// RK4 steps taken per nonlinear substep, at least one.
    pub substeps: usize,
    pub dealias: DealiasRule,
}

impl Default for NonlinearFlowConfig {
    fn default() -> Self {
        NonlinearFlowConfig {
            substeps: 1,
            dealias: DealiasRule::None,
        }
    }
}

impl NonlinearFlowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.substeps == 0 {
            return Err(KbfError::Validation {
                key: "substeps".into(),
                message: "substeps must be ≥ 1".into(),
            });
        }
        Ok(())
    }
}

/// Approximates the nonlinear flow over `dt` with `cfg.substeps` RK4 steps.
pub fn nonlinear_flow(
    state: &SpectralState,
    dt: f64,
    params: &ModelParams,
    cfg: &NonlinearFlowConfig,
) -> Result<SpectralState> {
    cfg.validate()?;
    if params.is_linear() {
        return Ok(state.clone());
    }
    let mask = match cfg.dealias {
        DealiasRule::None => None,
        rule => Some(dealias_mask(state.grid(), rule)),
    };
    let h = dt / cfg.substeps as f64;
    let mut y = state.clone();
    for _ in 0..cfg.substeps {
        y = rk4_step(&y, h, |s| nonlinear_rhs_spectral(s, params, mask.as_deref()))?;
    }
    Ok(y)
}
