//! `kbf` command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input or usage, 2 when the
//! computation itself fails (blow-up, failed oracle). Failures print one
//! `error kind=<Kind> message="..."` line on stderr.

pub mod config;
pub mod output;

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use crate::initial::{build_initial, IcKind, InitialConditionSpec};
pub use config::{parse_config, RunConfig};

use crate::error::{KbfError, Result};
use crate::harness::{spatial_convergence_study, temporal_convergence_study, ExperimentSpec};
use crate::model::{linear_symbol, ModelParams};
use crate::reference::{
    integrating_factor_rk4_solve, linear_exact_solution, logistic_exact, ReferenceQuality,
};
use crate::spectral::{
    interpolation_error_decay, make_grid, to_physical, to_spectral, NormSpec, TestFunction,
};
use crate::splitting::{evolve, SolveConfig};
use crate::flows::{apply_linear, build_propagator};

#[derive(Debug, Parser)]
#[command(name = "kbf", version, about = "Periodic pseudo-spectral KdV-Burgers-Fisher solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one configuration and write x,y snapshot CSVs.
    Solve(RunArgs),
    /// Temporal convergence study against the integrating-factor reference.
    ConvergeTime(TimeArgs),
    /// Spatial convergence study against the finest grid.
    ConvergeSpace(SpaceArgs),
    /// Run the closed-form oracle suite and print pass/fail per check.
    OracleCheck,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long = "eps-conv", allow_hyphen_values = true)]
    eps_conv: Option<String>,
    #[arg(long = "eps-react", allow_hyphen_values = true)]
    eps_react: Option<String>,
    #[arg(long = "n-modes")]
    n_modes: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    #[arg(long)]
    scheme: Option<String>,
    /// Initial condition kind: benchmark, constant, mode or file.
    #[arg(long)]
    ic: Option<String>,
    /// Output directory.
    #[arg(long)]
    output: Option<String>,
    /// Any other configuration key, e.g. `--set ic.c=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct TimeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Step counts t_final/dt, ascending.
    #[arg(long, value_delimiter = ',', default_value = "12,24,48,96,192,384")]
    steps: Vec<usize>,
    /// Reference resolution: standard (t_final/4096) or high (t_final/16384).
    #[arg(long, default_value = "high")]
    reference: String,
}

#[derive(Debug, Args)]
struct SpaceArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Mode counts, ascending; the configured n_modes is the reference grid.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    modes: Vec<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        let flags = [
            ("nu", &self.nu),
            ("mu", &self.mu),
            ("gamma", &self.gamma),
            ("eps_conv", &self.eps_conv),
            ("eps_react", &self.eps_react),
            ("n_modes", &self.n_modes),
            ("dt", &self.dt),
            ("t_final", &self.t_final),
            ("scheme", &self.scheme),
            ("ic.kind", &self.ic),
            ("output", &self.output),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| KbfError::Validation {
                key: kv.clone(),
                message: "--set expects KEY=VALUE".into(),
            })?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    /// Parses the file and flags. `fallback` supplies values for keys that
    /// neither sets, computed from the merged key set.
    fn load(&self, fallback: impl Fn(&[(String, String)]) -> Vec<(String, String)>) -> Result<RunConfig> {
        let text = match &self.config {
            Some(p) => fs::read_to_string(p).map_err(|e| KbfError::Validation {
                key: "config".into(),
                message: format!("{}: {e}", p.display()),
            })?,
            None => String::new(),
        };
        let mut merged: Vec<(String, String)> = config::parse_kv(&text)?
            .into_iter()
            .map(|(_, k, v)| (k, v))
            .collect();
        let overrides = self.overrides()?;
        merged.extend(overrides.iter().cloned());
        let mut all = fallback(&merged)
            .into_iter()
            .filter(|(k, _)| !merged.iter().any(|(m, _)| m == k))
            .collect::<Vec<_>>();
        all.extend(overrides);
        parse_config(&text, &all)
    }
}

fn lookup<'a>(kv: &'a [(String, String)], key: &str) -> Option<&'a str> {
    kv.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

/// Entry point used by the `kbf` binary; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let _ = e.print();
                    eprintln!("error kind=UsageError message={:?}", first_line(&e.to_string()));
                    1
                }
            };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args, &mut out),
        Command::ConvergeTime(args) => cmd_converge_time(&args, &mut out),
        Command::ConvergeSpace(args) => cmd_converge_space(&args, &mut out),
        Command::OracleCheck => cmd_oracle_check(&mut out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            if e.is_runtime() {
                2
            } else {
                1
            }
        }
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").trim_start_matches("error: ").to_string()
}

fn io_err(e: std::io::Error) -> KbfError {
    KbfError::Io(e.to_string())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| KbfError::Io(format!("{}: {e}", dir.display())))
}

fn cmd_solve(args: &RunArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = args.load(|_| Vec::new())?;
    let grid = cfg.grid()?;
    let initial = build_initial(&cfg.ic, &grid)?;
    let traj = evolve(&initial, &cfg.model, &cfg.solve, None)?;
    ensure_dir(&cfg.output)?;
    let echo = cfg.entries();
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let step = (t / cfg.solve.dt).round() as usize;
        let mut meta = vec![("step", step.to_string()), ("time", format!("{t:.16e}"))];
        meta.extend(echo.iter().cloned());
        let path = cfg.output.join(format!("snapshot_{step:06}.csv"));
        output::write_snapshot(&path, state, &meta)?;
    }
    writeln!(
        out,
        "solve: steps={} t_final={} snapshots={} final_norm_{}={:.16e} output={}",
        traj.steps_taken,
        cfg.solve.t_final,
        traj.times.len(),
        cfg.norm,
        traj.final_state.norm(cfg.norm),
        cfg.output.display()
    )
    .map_err(io_err)
}

fn experiment(cfg: &RunConfig, axis: Vec<usize>) -> Result<ExperimentSpec> {
    Ok(ExperimentSpec {
        params: cfg.model,
        grid: cfg.grid()?,
        initial: cfg.ic.clone(),
        t_final: cfg.solve.t_final,
        scheme: cfg.solve.scheme,
        nonlinear: cfg.solve.nonlinear,
        fuse_half_steps: cfg.solve.fuse_half_steps,
        norm: cfg.norm,
        axis,
        reference_quality: ReferenceQuality::High,
        spatial_dt: Some(cfg.solve.dt),
    })
}

fn write_report(
    dir: &Path,
    stem: &str,
    report: &crate::harness::ConvergenceReport,
    out: &mut dyn Write,
) -> Result<()> {
    ensure_dir(dir)?;
    fs::write(dir.join(format!("{stem}.csv")), report.to_csv())?;
    fs::write(dir.join(format!("{stem}.txt")), report.to_text())?;
    out.write_all(report.to_text().as_bytes()).map_err(io_err)
}

fn cmd_converge_time(args: &TimeArgs, out: &mut dyn Write) -> Result<()> {
    // dt is irrelevant here; default it to t_final so configs may omit it.
    let cfg = args
        .run
        .load(|kv| match lookup(kv, "t_final") {
            Some(t) => vec![("dt".to_string(), t.to_string())],
            None => Vec::new(),
        })?;
    let mut spec = experiment(&cfg, args.steps.clone())?;
    spec.reference_quality = args.reference.parse().map_err(|e: KbfError| KbfError::Validation {
        key: "reference".into(),
        message: e.to_string(),
    })?;
    let report = temporal_convergence_study(&spec)?;
    write_report(&cfg.output, "converge_time", &report, out)
}

fn cmd_converge_space(args: &SpaceArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = args.run.load(|kv| {
        match lookup(kv, "t_final").and_then(|t| t.parse::<f64>().ok()) {
            Some(t) => vec![("dt".to_string(), (t / 2048.0).to_string())],
            None => Vec::new(),
        }
    })?;
    let report = spatial_convergence_study(&experiment(&cfg, args.modes.clone())?)?;
    write_report(&cfg.output, "converge_space", &report, out)
}

/// Outcome of one closed-form check.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn outcome(name: &'static str, value: Result<f64>, tolerance: f64) -> OracleOutcome {
    let value = value.unwrap_or(f64::INFINITY);
    OracleOutcome {
        name,
        value,
        tolerance,
        passed: value <= tolerance,
    }
}

fn max_abs_diff(a: &[f64], b: impl IntoIterator<Item = f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Closed-form checks covering the transform, both flows, the splitting and
/// the reference solver.
pub fn oracle_suite() -> Vec<OracleOutcome> {
    let grid = make_grid(64, 0.0, 2.0 * PI).expect("static grid");
    let profile: Vec<f64> = grid.points().iter().map(|x| 0.5 + 0.25 * x.sin()).collect();
    let mut checks = Vec::new();

    checks.push(outcome(
        "dft_round_trip",
        (|| {
            let v: Vec<f64> = (0..64).map(|j| ((j * j) as f64 * 0.37).sin() + 0.1 * j as f64).collect();
            let back = to_physical(&to_spectral(&v, &grid)?)?;
            Ok(max_abs_diff(&v, back) / v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        })(),
        1e-12,
    ));

    checks.push(outcome(
        "heat_limit_strang",
        (|| {
            let p = ModelParams::new(1.0, 0.0, 0.0, 0.0, 0.0)?;
            let traj = evolve(&to_spectral(&profile, &grid)?, &p, &SolveConfig::new(0.01, 1.0), None)?;
            let exact = grid.points().iter().map(|x| 0.5 + 0.25 * (-1.0f64).exp() * x.sin());
            Ok(max_abs_diff(&to_physical(&traj.final_state)?, exact))
        })(),
        1e-10,
    ));

    checks.push(outcome(
        "logistic_limit_strang",
        (|| {
            let p = ModelParams::new(0.0, 0.0, 0.0, 0.0, 1.0)?;
            let init = to_spectral(&vec![0.5; 64], &grid)?;
            let traj = evolve(&init, &p, &SolveConfig::new(1.0 / 80.0, 1.0), None)?;
            let exact = logistic_exact(0.5, 1.0, 1.0)?;
            Ok(max_abs_diff(&to_physical(&traj.final_state)?, std::iter::repeat(exact)))
        })(),
        1e-8,
    ));

    checks.push(outcome(
        "linear_propagator_vs_exact",
        (|| {
            let p = ModelParams::new(0.7, 1.1, 0.3, 0.0, 0.0)?;
            let sym = linear_symbol(&p, &grid);
            let init = to_spectral(&profile, &grid)?;
            let a = apply_linear(&build_propagator(&sym, 0.4)?, &init)?;
            let b = linear_exact_solution(&init, &sym, 0.4)?;
            Ok(a.sub(&b)?.norm(NormSpec::l2()))
        })(),
        1e-12,
    ));

    checks.push(outcome(
        "integrating_factor_linear_exact",
        (|| {
            let p = ModelParams::new(1.0, 1.0, 1.0, 0.0, 0.0)?;
            let sym = linear_symbol(&p, &grid);
            let init = to_spectral(&profile, &grid)?;
            let a = integrating_factor_rk4_solve(&init, &p, &sym, 0.1, 1.0)?;
            let b = linear_exact_solution(&init, &sym, 1.0)?;
            Ok(a.sub(&b)?.norm(NormSpec::l2()))
        })(),
        1e-12,
    ));

    checks.push(outcome(
        "interpolation_band_limited",
        interpolation_error_decay(TestFunction::BandLimited, NormSpec::l2(), &[8, 16])
            .map(|pairs| pairs.iter().map(|p| p.1).fold(0.0, f64::max)),
        1e-13,
    ));

    checks.push(outcome(
        "equilibria_preserved",
        (|| {
            let p = ModelParams::default();
            let mut worst = 0.0f64;
            for c in [0.0, 1.0] {
                let init = to_spectral(&vec![c; 64], &grid)?;
                let traj = evolve(&init, &p, &SolveConfig::new(0.01, 1.0), None)?;
                worst = worst.max(max_abs_diff(&to_physical(&traj.final_state)?, std::iter::repeat(c)));
            }
            Ok(worst)
        })(),
        1e-10,
    ));

    checks
}

fn cmd_oracle_check(out: &mut dyn Write) -> Result<()> {
    let checks = oracle_suite();
    for c in &checks {
        writeln!(
            out,
            "{} {} value={:.3e} tol={:.0e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        )
        .map_err(io_err)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(KbfError::OracleFailed(failed));
    }
    Ok(())
}
