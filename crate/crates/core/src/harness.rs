//! Temporal and spatial convergence studies.
//!
//! A temporal study runs the splitting scheme at several step counts on a
//! fixed grid and compares each final state against an integrating-factor
//! reference. A spatial study runs at several mode counts with a fixed
//! step and compares against the finest grid.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{KbfError, Result};
use crate::flows::NonlinearFlowConfig;
use crate::initial::{build_initial, InitialConditionSpec};
use crate::model::{linear_symbol, ModelParams};
use crate::reference::{ReferenceCache, ReferenceQuality};
use crate::spectral::{eval_interpolant, make_grid, to_spectral, Grid, NormSpec, SpectralState};
use crate::splitting::{evolve, step_count, Scheme, SolveConfig};

/// Errors below this are treated as exact; no order is reported for them.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Environment variable bounding the harness thread pool.
pub const THREADS_ENV: &str = "KBF_THREADS";

/// `||approx - reference||`, interpolating the coarser state onto the finer grid
/// when the two differ in resolution.
pub fn error_norm(approx: &SpectralState, reference: &SpectralState, spec: NormSpec) -> Result<f64> {
    error_norm_with(approx, reference, spec, true)
}

pub fn error_norm_with(
    approx: &SpectralState,
    reference: &SpectralState,
    spec: NormSpec,
    interpolate: bool,
) -> Result<f64> {
    if approx.same_grid(reference) {
        return Ok(approx.sub(reference)?.norm(spec));
    }
    let (ga, gr) = (approx.grid(), reference.grid());
    let same_domain = ga.domain_start().to_bits() == gr.domain_start().to_bits()
        && ga.domain_length().to_bits() == gr.domain_length().to_bits();
    if !interpolate || !same_domain {
        return Err(KbfError::GridMismatch);
    }
    let (coarse, fine) = if ga.n_modes() < gr.n_modes() {
        (approx, reference)
    } else {
        (reference, approx)
    };
    let lifted = to_spectral(&eval_interpolant(coarse, fine.grid().points())?, fine.grid())?;
    Ok(lifted.sub(fine)?.norm(spec))
}

/// `log(e_i / e_{i+1}) / log(factor)` for consecutive pairs.
pub fn observed_order(errors: &[f64], refinement_factor: f64) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(KbfError::Config("need at least two errors".into()));
    }
    if let Some((index, &value)) = errors.iter().enumerate().find(|(_, e)| e.is_nan() || **e <= 0.0) {
        return Err(KbfError::NonPositiveError { index, value });
    }
    let ln_f = refinement_factor.ln();
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).ln() / ln_f).collect())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Temporal,
    Spatial,
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Temporal => "temporal",
            StudyKind::Spatial => "spatial",
        })
    }
}

impl FromStr for StudyKind {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "temporal" => Ok(StudyKind::Temporal),
            "spatial" => Ok(StudyKind::Spatial),
            other => Err(KbfError::Config(format!("unknown study kind `{other}`"))),
        }
    }
}

/// Everything a convergence study needs.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub params: ModelParams,
    /// Study grid (temporal) or reference grid (spatial).
    pub grid: Grid,
    pub initial: InitialConditionSpec,
    pub t_final: f64,
    pub scheme: Scheme,
    pub nonlinear: NonlinearFlowConfig,
    pub fuse_half_steps: bool,
    pub norm: NormSpec,
    /// Step counts (temporal) or mode counts (spatial), ascending.
    pub axis: Vec<usize>,
    /// Reference resolution for temporal studies.
    pub reference_quality: ReferenceQuality,
    /// Fixed step for spatial studies; `t_final / 2048` when unset.
    pub spatial_dt: Option<f64>,
}

impl ExperimentSpec {
    /// Strang splitting with all coefficients one, `N = 256` on `[0, 2 pi)`,
    /// the `1/2 + sin(x)/4` profile, `T = 1` and step counts 12 through 384.
    pub fn benchmark() -> Self {
        ExperimentSpec {
            params: ModelParams::default(),
            grid: make_grid(256, 0.0, 2.0 * std::f64::consts::PI).expect("static grid"),
            initial: InitialConditionSpec::benchmark(),
            t_final: 1.0,
            scheme: Scheme::Strang,
            nonlinear: NonlinearFlowConfig::default(),
            fuse_half_steps: false,
            norm: NormSpec::l2(),
            axis: vec![12, 24, 48, 96, 192, 384],
            reference_quality: ReferenceQuality::High,
            spatial_dt: None,
        }
    }

    fn solve_config(&self, dt: f64) -> SolveConfig {
        SolveConfig {
            dt,
            t_final: self.t_final,
            scheme: self.scheme,
            nonlinear: self.nonlinear,
            fuse_half_steps: self.fuse_half_steps,
            snapshot_stride: 0,
        }
    }

    fn spatial_step(&self) -> f64 {
        self.spatial_dt.unwrap_or(self.t_final / 2048.0)
    }

    fn check_axis(&self) -> Result<()> {
        if self.axis.is_empty() {
            return Err(KbfError::Config("study axis is empty".into()));
        }
        if self.axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(KbfError::Config("study axis must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Key-value record of the study setup.
    pub fn echo(&self, kind: StudyKind) -> Vec<(String, String)> {
        let p = &self.params;
        let g = &self.grid;
        let mut out = vec![
            ("nu", p.nu.to_string()),
            ("mu", p.mu.to_string()),
            ("gamma", p.gamma.to_string()),
            ("eps_conv", p.eps_conv.to_string()),
            ("eps_react", p.eps_react.to_string()),
            ("symbol", p.convention.to_string()),
            ("n_modes", g.n_modes().to_string()),
            ("domain_start", g.domain_start().to_string()),
            ("domain_length", g.domain_length().to_string()),
            ("t_final", self.t_final.to_string()),
            ("scheme", self.scheme.to_string()),
            ("substeps", self.nonlinear.substeps.to_string()),
            ("dealias", self.nonlinear.dealias.to_string()),
            ("fuse_half_steps", self.fuse_half_steps.to_string()),
            ("ic", self.initial.describe()),
            ("error", "absolute, final time".to_string()),
        ];
        match kind {
            StudyKind::Temporal => out.push((
                "reference",
                format!(
                    "integrating-factor RK4, dt = t_final/{}",
                    self.reference_quality.steps()
                ),
            )),
            StudyKind::Spatial => out.push((
                "reference",
                format!("same scheme on n_modes = {}, dt = {}", g.n_modes(), self.spatial_step()),
            )),
        }
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Errors and pairwise observed orders along one refinement axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub kind: StudyKind,
    pub axis: Vec<usize>,
    /// `dt` for temporal studies, `N` for spatial ones.
    pub dt_or_n: Vec<f64>,
    pub errors: Vec<f64>,
    /// `orders[i]` compares `errors[i]` and `errors[i + 1]`; `None` below [`ERROR_FLOOR`].
    pub orders: Vec<Option<f64>>,
    pub norm: NormSpec,
    pub config_echo: Vec<(String, String)>,
}

impl ConvergenceReport {
    pub fn new(
        kind: StudyKind,
        axis: Vec<usize>,
        dt_or_n: Vec<f64>,
        errors: Vec<f64>,
        norm: NormSpec,
        config_echo: Vec<(String, String)>,
    ) -> Self {
        let orders = (0..errors.len().saturating_sub(1))
            .map(|i| {
                let (e0, e1) = (errors[i], errors[i + 1]);
                if e0 < ERROR_FLOOR || e1 < ERROR_FLOOR {
                    return None;
                }
                let factor = axis[i + 1] as f64 / axis[i] as f64;
                Some((e0 / e1).ln() / factor.ln())
            })
            .collect();
        ConvergenceReport {
            kind,
            axis,
            dt_or_n,
            errors,
            orders,
            norm,
            config_echo,
        }
    }

    /// Order attached to row `i`, i.e. the pair ending at the finer axis value.
    pub fn row_order(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).and_then(|j| self.orders[j])
    }

    /// `axis,dt_or_n,error,order` with 17 significant digits; `NA` marks a missing order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,dt_or_n,error,order\n");
        for i in 0..self.axis.len() {
            let order = self
                .row_order(i)
                .map(|o| format!("{o:.16e}"))
                .unwrap_or_else(|| "NA".into());
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{}",
                self.axis[i], self.dt_or_n[i], self.errors[i], order
            );
        }
        out
    }

    /// Key-value header, a `---` separator, then the CSV table.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# kbf convergence report\n");
        let _ = writeln!(out, "study = {}", self.kind);
        let _ = writeln!(out, "norm = {}", self.norm);
        for (k, v) in &self.config_echo {
            let _ = writeln!(out, "{k} = {v}");
        }
        out.push_str("---\n");
        out.push_str(&self.to_csv());
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, message: &str| KbfError::Parse {
            line,
            message: message.to_string(),
        };
        let mut kind = None;
        let mut norm = None;
        let mut echo = Vec::new();
        let mut lines = text.lines().enumerate();
        for (i, line) in lines.by_ref() {
            let line = line.trim_end();
            if line == "---" {
                break;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| perr(i + 1, "expected `key = value`"))?;
            match k {
                "study" => kind = Some(v.parse::<StudyKind>().map_err(|e| perr(i + 1, &e.to_string()))?),
                "norm" => norm = Some(v.parse::<NormSpec>().map_err(|e| perr(i + 1, &e.to_string()))?),
                _ => echo.push((k.to_string(), v.to_string())),
            }
        }
        let kind = kind.ok_or_else(|| perr(0, "missing `study`"))?;
        let norm = norm.ok_or_else(|| perr(0, "missing `norm`"))?;

        let (mut axis, mut dt_or_n, mut errors, mut row_orders) = (vec![], vec![], vec![], vec![]);
        for (i, line) in lines {
            if line.trim().is_empty() || line.starts_with("axis,") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(perr(i + 1, "expected four columns"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| perr(i + 1, "bad number"));
            axis.push(f[0].parse::<usize>().map_err(|_| perr(i + 1, "bad axis value"))?);
            dt_or_n.push(num(f[1])?);
            errors.push(num(f[2])?);
            row_orders.push(if f[3] == "NA" { None } else { Some(num(f[3])?) });
        }
        let orders = row_orders.into_iter().skip(1).collect();
        Ok(ConvergenceReport {
            kind,
            axis,
            dt_or_n,
            errors,
            orders,
            norm,
            config_echo: echo,
        })
    }
}

/// Runs `f` over `items` on a pool bounded by `KBF_THREADS`, keeping input order.
fn fan_out<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let run = || items.par_iter().map(&f).collect::<Vec<R>>();
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(run),
        None => run(),
    }
}

fn annotate(axis_value: usize) -> impl Fn(KbfError) -> KbfError {
    move |e| KbfError::StudyPoint {
        axis_value,
        source: Box::new(e),
    }
}

/// Errors at each step count `n` (with `dt = t_final / n`) against the
/// integrating-factor reference.
pub fn temporal_convergence_study(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    temporal_convergence_study_cached(spec, &ReferenceCache::new())
}

pub fn temporal_convergence_study_cached(
    spec: &ExperimentSpec,
    cache: &ReferenceCache,
) -> Result<ConvergenceReport> {
    spec.check_axis()?;
    spec.params.validate()?;
    for &n in &spec.axis {
        if n == 0 {
            return Err(KbfError::Config("step counts must be positive".into()));
        }
        step_count(spec.t_final / n as f64, spec.t_final)?;
    }
    let initial = build_initial(&spec.initial, &spec.grid)?;
    let symbol = linear_symbol(&spec.params, &spec.grid);
    let reference =
        cache.get_or_compute(&initial, &spec.params, &symbol, spec.t_final, spec.reference_quality)?;

    let results = fan_out(&spec.axis, |&n| -> Result<f64> {
        let dt = spec.t_final / n as f64;
        let traj = evolve(&initial, &spec.params, &spec.solve_config(dt), None).map_err(annotate(n))?;
        error_norm(&traj.final_state, &reference, spec.norm)
    });
    let errors = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let dts = spec.axis.iter().map(|&n| spec.t_final / n as f64).collect();
    Ok(ConvergenceReport::new(
        StudyKind::Temporal,
        spec.axis.clone(),
        dts,
        errors,
        spec.norm,
        spec.echo(StudyKind::Temporal),
    ))
}

/// Errors at each mode count against the same scheme on `spec.grid`, the
/// finest grid. Axis entries equal to the reference mode count are dropped.
pub fn spatial_convergence_study(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    spec.check_axis()?;
    spec.params.validate()?;
    let n_ref = spec.grid.n_modes();
    let axis: Vec<usize> = spec.axis.iter().copied().filter(|&n| n != n_ref).collect();
    if axis.is_empty() {
        return Err(KbfError::Config("spatial axis only contains the reference grid".into()));
    }
    if let Some(&n) = axis.iter().find(|&&n| n > n_ref) {
        return Err(KbfError::Config(format!(
            "mode count {n} exceeds the reference grid ({n_ref})"
        )));
    }
    let dt = spec.spatial_step();
    let cfg = spec.solve_config(dt);
    cfg.validate()?;
    let grids = axis
        .iter()
        .map(|&n| make_grid(n, spec.grid.domain_start(), spec.grid.domain_length()))
        .collect::<Result<Vec<Grid>>>()?;

    let reference = {
        let init = build_initial(&spec.initial, &spec.grid)?;
        evolve(&init, &spec.params, &cfg, None).map_err(annotate(n_ref))?.final_state
    };
    let results = fan_out(&grids, |g| -> Result<f64> {
        let init = build_initial(&spec.initial, g)?;
        let traj = evolve(&init, &spec.params, &cfg, None).map_err(annotate(g.n_modes()))?;
        error_norm(&traj.final_state, &reference, spec.norm)
    });
    let errors = results.into_iter().collect::<Result<Vec<f64>>>()?;
    let ns = axis.iter().map(|&n| n as f64).collect();
    Ok(ConvergenceReport::new(
        StudyKind::Spatial,
        axis,
        ns,
        errors,
        spec.norm,
        spec.echo(StudyKind::Spatial),
    ))
}
