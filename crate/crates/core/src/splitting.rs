//! Strang and Lie-Trotter compositions of the linear and nonlinear flows,
//! and the fixed-step time loop.

use std::fmt;
use std::str::FromStr;

use crate::error::{KbfError, Result};
use crate::flows::{build_propagator, nonlinear_flow, LinearPropagator, NonlinearFlowConfig};
use crate::model::{linear_symbol, LinearSymbol, ModelParams};
use crate::spectral::{NormSpec, SpectralState};

/// Norm growth factor over the initial state treated as blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// Relative slack allowed when checking that `t_final / dt` is an integer.
pub const STEP_DIVISION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// `A(dt/2) B(dt) A(dt/2)`, second order.
    #[default]
    Strang,
    /// `B(dt)` then `A(dt)`, first order.
    LieTrotter,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Strang => "strang",
            Scheme::LieTrotter => "lie_trotter",
        })
    }
}

impl FromStr for Scheme {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "strang" => Ok(Scheme::Strang),
            "lie_trotter" | "lie" => Ok(Scheme::LieTrotter),
            other => Err(KbfError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub nonlinear: NonlinearFlowConfig,
    /// Merge the adjacent half linear steps of consecutive Strang steps.
    pub fuse_half_steps: bool,
    /// Record a snapshot every this many steps; 0 keeps only the final state.
    pub snapshot_stride: usize,
}

impl SolveConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        SolveConfig {
            dt,
            t_final,
            scheme: Scheme::Strang,
            nonlinear: NonlinearFlowConfig::default(),
            fuse_half_steps: false,
            snapshot_stride: 0,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Number of whole steps `t_final / dt`, rejecting a fractional remainder.
    pub fn steps(&self) -> Result<usize> {
        step_count(self.dt, self.t_final)
    }

    pub fn validate(&self) -> Result<()> {
        self.nonlinear.validate()?;
        self.steps().map(|_| ())
    }
}

pub(crate) fn step_count(dt: f64, t_final: f64) -> Result<usize> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(KbfError::Config(format!("dt must be positive, got {dt}")));
    }
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(KbfError::Config(format!("t_final must be positive, got {t_final}")));
    }
    if dt > t_final * (1.0 + STEP_DIVISION_TOL) {
        return Err(KbfError::Config(format!("dt = {dt} exceeds t_final = {t_final}")));
    }
    let ratio = t_final / dt;
    let n = ratio.round();
    if (ratio - n).abs() > STEP_DIVISION_TOL * n.max(1.0) {
        return Err(KbfError::Config(format!(
            "t_final / dt = {ratio} is not a whole number of steps"
        )));
    }
    Ok(n as usize)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
    pub final_state: SpectralState,
    pub steps_taken: usize,
}

/// Precomputed propagators for a fixed step size.
struct Stepper<'a> {
    params: &'a ModelParams,
    nonlinear: &'a NonlinearFlowConfig,
    dt: f64,
    half: LinearPropagator,
    full: LinearPropagator,
}

impl<'a> Stepper<'a> {
    fn new(
        params: &'a ModelParams,
        symbol: &LinearSymbol,
        nonlinear: &'a NonlinearFlowConfig,
        dt: f64,
    ) -> Result<Self> {
        Ok(Stepper {
            params,
            nonlinear,
            dt,
            half: build_propagator(symbol, 0.5 * dt)?,
            full: build_propagator(symbol, dt)?,
        })
    }

    fn nonlinear(&self, state: &SpectralState) -> Result<SpectralState> {
        nonlinear_flow(state, self.dt, self.params, self.nonlinear)
    }

    fn strang(&self, state: &SpectralState) -> Result<SpectralState> {
        let mut y = state.clone();
        self.half.apply_in_place(&mut y)?;
        let mut y = self.nonlinear(&y)?;
        self.half.apply_in_place(&mut y)?;
        Ok(y)
    }

    fn lie_trotter(&self, state: &SpectralState) -> Result<SpectralState> {
        let mut y = self.nonlinear(state)?;
        self.full.apply_in_place(&mut y)?;
        Ok(y)
    }
}

fn check_positive_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(KbfError::Config(format!("dt must be positive, got {dt}")))
    }
}

/// One Strang step: half linear, full nonlinear, half linear.
pub fn strang_step(
    state: &SpectralState,
    dt: f64,
    params: &ModelParams,
    symbol: &LinearSymbol,
    cfg: &NonlinearFlowConfig,
) -> Result<SpectralState> {
    check_positive_dt(dt)?;
    Stepper::new(params, symbol, cfg, dt)?.strang(state)
}

/// One Lie-Trotter step: full nonlinear, then full linear.
pub fn lie_trotter_step(
    state: &SpectralState,
    dt: f64,
    params: &ModelParams,
    symbol: &LinearSymbol,
    cfg: &NonlinearFlowConfig,
) -> Result<SpectralState> {
    check_positive_dt(dt)?;
    Stepper::new(params, symbol, cfg, dt)?.lie_trotter(state)
}

/// Callback receiving `(step index, time, state)` at each snapshot.
pub type Observer<'o> = &'o mut dyn FnMut(usize, f64, &SpectralState);

/// Advances `initial` to `config.t_final` in `t_final / dt` fixed steps.
///
/// Snapshots (and observer calls) happen at step 0 and every
/// `snapshot_stride` steps when the stride is positive, and always at the
/// final step. A non-finite state or an L2 norm above
/// [`BLOW_UP_FACTOR`] times the initial norm aborts with [`KbfError::BlowUp`].
pub fn evolve(
    initial: &SpectralState,
    params: &ModelParams,
    config: &SolveConfig,
    mut observer: Option<Observer<'_>>,
) -> Result<Trajectory> {
    params.validate()?;
    config.validate()?;
    let residue = initial.reality_residue();
    if residue > crate::spectral::REALITY_TOL {
        return Err(KbfError::NotRealRepresentable { residue });
    }
    let n = config.steps()?;
    let dt = config.dt;
    let symbol = linear_symbol(params, initial.grid());
    let stepper = Stepper::new(params, &symbol, &config.nonlinear, dt)?;
    let limit = BLOW_UP_FACTOR * initial.norm(NormSpec::l2());

    let mut times = Vec::new();
    let mut states = Vec::new();
    let stride = config.snapshot_stride;
    let is_snapshot = |step: usize| step == n || (stride > 0 && step.is_multiple_of(stride));
    let mut record = |step: usize, state: &SpectralState| {
        let t = step as f64 * dt;
        if let Some(obs) = observer.as_mut() {
            obs(step, t, state);
        }
        times.push(t);
        states.push(state.clone());
    };
    let guard = |step: usize, state: &SpectralState| -> Result<()> {
        if !state.is_finite() || state.norm(NormSpec::l2()) > limit && limit > 0.0 {
            return Err(KbfError::BlowUp {
                step,
                time: step as f64 * dt,
            });
        }
        Ok(())
    };
    let blow_up = |step: usize, err: KbfError| match err {
        KbfError::NonFiniteState => KbfError::BlowUp {
            step,
            time: step as f64 * dt,
        },
        other => other,
    };

    let mut y = initial.clone();
    if stride > 0 {
        record(0, &y);
    }

    let fused = config.fuse_half_steps && config.scheme == Scheme::Strang;
    if fused {
        // `y` sits half a linear step ahead of the true state between steps
        // that are not observed.
        stepper.half.apply_in_place(&mut y)?;
        for step in 1..=n {
            y = stepper.nonlinear(&y).map_err(|e| blow_up(step, e))?;
            if is_snapshot(step) {
                stepper.half.apply_in_place(&mut y)?;
                guard(step, &y)?;
                record(step, &y);
                if step < n {
                    stepper.half.apply_in_place(&mut y)?;
                }
            } else {
                stepper.full.apply_in_place(&mut y)?;
                guard(step, &y)?;
            }
        }
    } else {
        for step in 1..=n {
            y = match config.scheme {
                Scheme::Strang => stepper.strang(&y),
                Scheme::LieTrotter => stepper.lie_trotter(&y),
            }
            .map_err(|e| blow_up(step, e))?;
            guard(step, &y)?;
            if is_snapshot(step) {
                record(step, &y);
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        final_state: y,
        steps_taken: n,
    })
}
