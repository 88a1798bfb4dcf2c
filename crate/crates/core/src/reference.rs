//! Independent solution sources: an integrating-factor RK4 solver for the
//! full equation and closed forms for degenerate parameter limits.
//!
//! Nothing here goes through [`crate::flows`] or [`crate::splitting`], so
//! these solutions can cross-check the production time stepping.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::RwLock;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{KbfError, Result};
use crate::model::{nonlinear_rhs_spectral, LinearSymbol, ModelParams, SymbolConvention};
use crate::spectral::{Grid, SpectralState};
use crate::splitting::step_count;

/// Solves `y_hat' = lambda y_hat + N(y_hat)` with classical RK4 applied to
/// `w = exp(-lambda t) y_hat`, using exact exponentials at the stage times.
pub fn integrating_factor_rk4_solve(
    initial: &SpectralState,
    params: &ModelParams,
    symbol: &LinearSymbol,
    dt: f64,
    t_final: f64,
) -> Result<SpectralState> {
    if *initial.grid().as_ref() != *symbol.grid().as_ref() {
        return Err(KbfError::GridMismatch);
    }
    let steps = step_count(dt, t_final)?;
    let half: Vec<Complex64> = symbol.values().iter().map(|l| (l * (0.5 * dt)).exp()).collect();
    let full: Vec<Complex64> = half.iter().map(|e| e * e).collect();
    let rhs = |s: &SpectralState| -> Result<SpectralState> {
        let r = nonlinear_rhs_spectral(s, params, None)?;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(KbfError::NonFiniteState)
        }
    };
    let combine = |f: &dyn Fn(usize) -> Complex64, grid: &Grid| -> Result<SpectralState> {
        SpectralState::new(grid.clone(), (0..grid.n_modes()).map(f).collect())
    };
    let grid = initial.grid().clone();

    let mut y = initial.clone();
    for _ in 0..steps {
        let u = y.coeffs();
        let a = rhs(&y)?;
        let b_in = combine(&|j| half[j] * (u[j] + a.coeffs()[j] * (0.5 * dt)), &grid)?;
        let b = rhs(&b_in)?;
        let c_in = combine(&|j| half[j] * u[j] + b.coeffs()[j] * (0.5 * dt), &grid)?;
        let c = rhs(&c_in)?;
        let d_in = combine(&|j| full[j] * u[j] + half[j] * c.coeffs()[j] * dt, &grid)?;
        let d = rhs(&d_in)?;
        y = combine(
            &|j| {
                full[j] * u[j]
                    + (full[j] * a.coeffs()[j]
                        + half[j] * (b.coeffs()[j] + c.coeffs()[j]) * 2.0
                        + d.coeffs()[j])
                        * (dt / 6.0)
            },
            &grid,
        )?;
        if !y.is_finite() {
            return Err(KbfError::NonFiniteState);
        }
    }
    Ok(y)
}

/// Closed form of `v' = eps_react v (1 - v)`, `v(0) = c0`.
pub fn logistic_exact(c0: f64, eps_react: f64, t: f64) -> Result<f64> {
    let growth = (eps_react * t).exp();
    let denom = 1.0 - c0 + c0 * growth;
    // The denominator is monotone in t and equals 1 at t = 0, so a
    // non-positive value means the solution left through infinity.
    if !denom.is_finite() || denom <= 0.0 {
        return Err(KbfError::SingularSolution(t));
    }
    Ok(c0 * growth / denom)
}

/// Exact linear evolution `exp(lambda_k t) y_hat_k`, evaluated mode by mode.
pub fn linear_exact_solution(
    initial: &SpectralState,
    symbol: &LinearSymbol,
    t: f64,
) -> Result<SpectralState> {
    if t.is_nan() || t < 0.0 {
        return Err(KbfError::NegativeDuration(t));
    }
    if *initial.grid().as_ref() != *symbol.grid().as_ref() {
        return Err(KbfError::GridMismatch);
    }
    let coeffs = initial
        .coeffs()
        .iter()
        .zip(symbol.values())
        .map(|(c, l)| {
            let amplitude = (l.re * t).exp();
            let phase = l.im * t;
            c * Complex64::new(amplitude * phase.cos(), amplitude * phase.sin())
        })
        .collect();
    SpectralState::new(initial.grid().clone(), coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReferenceQuality {
    /// `dt = t_final / 4096`.
    Standard,
    /// `dt = t_final / 16384`.
    #[default]
    High,
}

impl ReferenceQuality {
    pub fn steps(self) -> usize {
        match self {
            ReferenceQuality::Standard => 4096,
            ReferenceQuality::High => 16384,
        }
    }
}

impl fmt::Display for ReferenceQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceQuality::Standard => "standard",
            ReferenceQuality::High => "high",
        })
    }
}

impl FromStr for ReferenceQuality {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "standard" => Ok(ReferenceQuality::Standard),
            "high" => Ok(ReferenceQuality::High),
            other => Err(KbfError::Config(format!("unknown reference quality `{other}`"))),
        }
    }
}

/// Integrating-factor reference at `t_final` with the step set by `quality`.
pub fn make_reference(
    initial: &SpectralState,
    params: &ModelParams,
    symbol: &LinearSymbol,
    t_final: f64,
    quality: ReferenceQuality,
) -> Result<SpectralState> {
    let dt = t_final / quality.steps() as f64;
    integrating_factor_rk4_solve(initial, params, symbol, dt, t_final)
}

/// Hex SHA-256 over everything that determines a reference solution.
pub fn reference_key(
    initial: &SpectralState,
    params: &ModelParams,
    t_final: f64,
    quality: ReferenceQuality,
) -> String {
    let g = initial.grid();
    let mut h = Sha256::new();
    h.update(b"kbf-reference-v1");
    h.update((g.n_modes() as u64).to_le_bytes());
    h.update(g.domain_start().to_le_bytes());
    h.update(g.domain_length().to_le_bytes());
    for v in [params.nu, params.mu, params.gamma, params.eps_conv, params.eps_react, t_final] {
        h.update(v.to_le_bytes());
    }
    h.update([match params.convention {
        SymbolConvention::Spectral => 0u8,
        SymbolConvention::Operator => 1u8,
    }]);
    h.update([match quality {
        ReferenceQuality::Standard => 0u8,
        ReferenceQuality::High => 1u8,
    }]);
    for c in initial.coeffs() {
        h.update(c.re.to_le_bytes());
        h.update(c.im.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Memoizes reference solutions in memory and, optionally, on disk.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    entries: RwLock<HashMap<String, SpectralState>>,
    dir: Option<PathBuf>,
}

impl ReferenceCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Also persists entries as `<dir>/<key>.kbfr`.
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        ReferenceCache {
            entries: RwLock::default(),
            dir: Some(dir.into()),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compute(
        &self,
        initial: &SpectralState,
        params: &ModelParams,
        symbol: &LinearSymbol,
        t_final: f64,
        quality: ReferenceQuality,
    ) -> Result<SpectralState> {
        let key = reference_key(initial, params, t_final, quality);
        if let Some(hit) = self.entries.read().ok().and_then(|m| m.get(&key).cloned()) {
            return Ok(hit);
        }
        let path = self.dir.as_ref().map(|d| d.join(format!("{key}.kbfr")));
        if let Some(p) = path.as_ref().filter(|p| p.exists()) {
            let state = read_reference_file(p, initial.grid())?;
            self.insert(key, state.clone());
            return Ok(state);
        }
        let state = make_reference(initial, params, symbol, t_final, quality)?;
        if let Some(p) = path {
            if let Some(parent) = p.parent() {
                fs::create_dir_all(parent)?;
            }
            write_reference_file(&p, &state)?;
        }
        self.insert(key, state.clone());
        Ok(state)
    }

    fn insert(&self, key: String, state: SpectralState) {
        if let Ok(mut m) = self.entries.write() {
            m.entry(key).or_insert(state);
        }
    }
}

pub const REFERENCE_MAGIC: &[u8; 4] = b"KBFR";
pub const REFERENCE_VERSION: u32 = 1;

/// Little-endian layout: magic `KBFR`, version `u32`, `N` as `u32`, then
/// `N` pairs of `f64` (real, imaginary) in storage order.
pub fn encode_reference(state: &SpectralState) -> Vec<u8> {
    let n = state.coeffs().len();
    let mut out = Vec::with_capacity(12 + 16 * n);
    out.extend_from_slice(REFERENCE_MAGIC);
    out.extend_from_slice(&REFERENCE_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for c in state.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn decode_reference(bytes: &[u8], grid: &Grid) -> Result<SpectralState> {
    let bad = |m: &str| KbfError::FileFormat(format!("reference file: {m}"));
    if bytes.len() < 12 || &bytes[0..4] != REFERENCE_MAGIC {
        return Err(bad("missing KBFR magic"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != REFERENCE_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let n = word(8) as usize;
    if n != grid.n_modes() {
        return Err(KbfError::DimensionMismatch {
            expected: grid.n_modes(),
            found: n,
        });
    }
    if bytes.len() != 12 + 16 * n {
        return Err(bad("truncated coefficient block"));
    }
    let f = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let coeffs = (0..n)
        .map(|j| Complex64::new(f(12 + 16 * j), f(20 + 16 * j)))
        .collect();
    SpectralState::new(grid.clone(), coeffs)
}

pub fn write_reference_file(path: &Path, state: &SpectralState) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_reference(state))?;
    Ok(())
}

pub fn read_reference_file(path: &Path, grid: &Grid) -> Result<SpectralState> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_reference(&bytes, grid)
}
