//! PDE coefficients, the Fourier symbol of the linear operator and the
//! nonlinear right-hand side.
//!
//! The equation is
//!
//! ```text
//! y_t = nu y_xx - mu y_xxx + gamma y_xxxxx - eps_conv y^2 y_x + eps_react y (1 - y)
//! ```
//!
//! split into the linear part `A = nu d^2 - mu d^3 + gamma d^5` and the
//! nonlinear part `B(y) = -eps_conv y^2 y_x + eps_react y (1 - y)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{KbfError, Result};
use crate::spectral::{derivative, to_physical, to_spectral, Grid, SpectralState};

/// Sign convention for the fifth-order dispersion term of the linear symbol.
///
/// `Spectral` (the default) uses `-nu k^2 + i mu k^3 - i gamma k^5`.
/// `Operator` substitutes `d/dx -> i k` into `A`, which gives
/// `+ i gamma k^5`. The two coincide after flipping the sign of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolConvention {
    #[default]
    Spectral,
    Operator,
}

impl fmt::Display for SymbolConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolConvention::Spectral => "spectral",
            SymbolConvention::Operator => "operator",
        })
    }
}

impl FromStr for SymbolConvention {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "spectral" => Ok(SymbolConvention::Spectral),
            "operator" => Ok(SymbolConvention::Operator),
            other => Err(KbfError::Config(format!("unknown symbol convention `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Diffusion coefficient, must be non-negative.
    pub nu: f64,
    /// Third-order dispersion.
    pub mu: f64,
    /// Fifth-order dispersion.
    pub gamma: f64,
    /// Cubic convection coefficient.
    pub eps_conv: f64,
    /// Logistic reaction rate.
    pub eps_react: f64,
    pub convention: SymbolConvention,
}

impl Default for ModelParams {
    /// All five coefficients equal to one.
    fn default() -> Self {
        ModelParams {
            nu: 1.0,
            mu: 1.0,
            gamma: 1.0,
            eps_conv: 1.0,
            eps_react: 1.0,
            convention: SymbolConvention::Spectral,
        }
    }
}

impl ModelParams {
    pub fn new(nu: f64, mu: f64, gamma: f64, eps_conv: f64, eps_react: f64) -> Result<Self> {
        let p = ModelParams {
            nu,
            mu,
            gamma,
            eps_conv,
            eps_react,
            convention: SymbolConvention::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_convention(mut self, convention: SymbolConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("nu", self.nu),
            ("mu", self.mu),
            ("gamma", self.gamma),
            ("eps_conv", self.eps_conv),
            ("eps_react", self.eps_react),
        ] {
            if !v.is_finite() {
                return Err(KbfError::Validation {
                    key: key.into(),
                    message: format!("{key} must be finite"),
                });
            }
        }
        if self.nu < 0.0 {
            return Err(KbfError::Validation {
                key: "nu".into(),
                message: "nu must be ≥ 0".into(),
            });
        }
        Ok(())
    }

    /// Eigenvalue of the linear operator on the mode with physical wavenumber `kappa`.
    pub fn symbol_at(&self, kappa: f64) -> Complex64 {
        let k2 = kappa * kappa;
        let k3 = k2 * kappa;
        let k5 = k3 * k2;
        let fifth = match self.convention {
            SymbolConvention::Spectral => -self.gamma * k5,
            SymbolConvention::Operator => self.gamma * k5,
        };
        Complex64::new(-self.nu * k2, self.mu * k3 + fifth)
    }

    pub fn is_linear(&self) -> bool {
        self.eps_conv == 0.0 && self.eps_react == 0.0
    }
}

/// Eigenvalues `lambda_k` of the linear operator on one grid.
#[derive(Debug, Clone)]
pub struct LinearSymbol {
    values: Vec<Complex64>,
    grid: Grid,
    params: ModelParams,
}

impl LinearSymbol {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn at(&self, k: i64) -> Option<Complex64> {
        self.grid.index_of(k).map(|j| self.values[j])
    }
}

pub fn linear_symbol(params: &ModelParams, grid: &Grid) -> LinearSymbol {
    let nyquist = grid.nyquist_index();
    let values = (0..grid.n_modes())
        .map(|j| {
            let lambda = params.symbol_at(grid.physical_wavenumber(j));
            if j == nyquist {
                Complex64::new(lambda.re, 0.0)
            } else {
                lambda
            }
        })
        .collect();
    LinearSymbol {
        values,
        grid: grid.clone(),
        params: *params,
    }
}

/// Non-conservative form `-eps_conv y^2 y_x + eps_react y (1 - y)` on grid values.
pub fn nonlinear_rhs_physical(values: &[f64], params: &ModelParams, grid: &Grid) -> Result<Vec<f64>> {
    let state = to_spectral(values, grid)?;
    let y_x = to_physical(&derivative(&state, 1)?)?;
    Ok(values
        .iter()
        .zip(y_x)
        .map(|(&y, dy)| -params.eps_conv * y * y * dy + params.eps_react * y * (1.0 - y))
        .collect())
}

/// Conservative spectral form
/// `-(eps_conv / 3) i kappa T(y^3) + eps_react y_hat - eps_react T(y^2)`.
///
/// Powers are formed pointwise in physical space. When a mask is given it is
/// applied to the transformed products.
pub fn nonlinear_rhs_spectral(
    state: &SpectralState,
    params: &ModelParams,
    dealias: Option<&[bool]>,
) -> Result<SpectralState> {
    let grid = state.grid().clone();
    let n = grid.n_modes();
    let y = to_physical(state)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n];

    if params.eps_conv != 0.0 {
        let mut cube: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v * v * v, 0.0)).collect();
        grid.fft_forward(&mut cube);
        let nyquist = grid.nyquist_index();
        let factor = -params.eps_conv / 3.0;
        for (j, (o, c)) in out.iter_mut().zip(&cube).enumerate() {
            if j == nyquist || dealias.is_some_and(|m| !m[j]) {
                continue;
            }
            *o += Complex64::new(0.0, grid.physical_wavenumber(j)) * c * factor;
        }
    }

    if params.eps_react != 0.0 {
        let mut square: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v * v, 0.0)).collect();
        grid.fft_forward(&mut square);
        for (j, ((o, s), yh)) in out.iter_mut().zip(&square).zip(state.coeffs()).enumerate() {
            let product = if dealias.is_some_and(|m| !m[j]) {
                Complex64::new(0.0, 0.0)
            } else {
                *s
            };
            *o += (yh - product) * params.eps_react;
        }
    }

    SpectralState::new(grid, out)
}

/// Semi-discrete right-hand side `lambda_k y_hat_k + N(y_hat)_k`.
pub fn full_rhs(
    state: &SpectralState,
    params: &ModelParams,
    symbol: &LinearSymbol,
    dealias: Option<&[bool]>,
) -> Result<SpectralState> {
    if !(state.grid().as_ref() == symbol.grid().as_ref()) {
        return Err(KbfError::GridMismatch);
    }
    let mut out = nonlinear_rhs_spectral(state, params, dealias)?;
    for ((o, c), l) in out.coeffs_mut().iter_mut().zip(state.coeffs()).zip(symbol.values()) {
        *o += l * c;
    }
    Ok(out)
}
