//! Initial-condition descriptors and two-column profile ingestion.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{KbfError, Result};
use crate::spectral::{to_spectral, Grid, SpectralState};

/// Maximum abscissa deviation accepted when reading a profile file.
pub const ABSCISSA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IcKind {
    /// `1/2 + sin(x)/4`.
    #[default]
    Benchmark,
    Constant,
    /// `offset + amp * sin(k (2 pi / L) (x - a))`.
    Mode,
    File,
}

impl fmt::Display for IcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IcKind::Benchmark => "benchmark",
            IcKind::Constant => "constant",
            IcKind::Mode => "mode",
            IcKind::File => "file",
        })
    }
}

impl FromStr for IcKind {
    type Err = KbfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "benchmark" => Ok(IcKind::Benchmark),
            "constant" => Ok(IcKind::Constant),
            "mode" => Ok(IcKind::Mode),
            "file" => Ok(IcKind::File),
            other => Err(KbfError::Config(format!("unknown initial condition `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConditionSpec {
    pub kind: IcKind,
    pub c: f64,
    pub mode_k: i64,
    pub mode_amp: f64,
    pub mode_offset: f64,
    pub path: Option<PathBuf>,
}

impl Default for InitialConditionSpec {
    fn default() -> Self {
        InitialConditionSpec {
            kind: IcKind::Benchmark,
            c: 0.0,
            mode_k: 1,
            mode_amp: 0.25,
            mode_offset: 0.5,
            path: None,
        }
    }
}

impl InitialConditionSpec {
    pub fn benchmark() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        InitialConditionSpec {
            kind: IcKind::Constant,
            c,
            ..Self::default()
        }
    }

    pub fn mode(k: i64, amp: f64, offset: f64) -> Self {
        InitialConditionSpec {
            kind: IcKind::Mode,
            mode_k: k,
            mode_amp: amp,
            mode_offset: offset,
            ..Self::default()
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        InitialConditionSpec {
            kind: IcKind::File,
            path: Some(path.into()),
            ..Self::default()
        }
    }

    /// One-line description for report headers.
    pub fn describe(&self) -> String {
        match self.kind {
            IcKind::Benchmark => "benchmark: 1/2 + sin(x)/4".into(),
            IcKind::Constant => format!("constant: {}", self.c),
            IcKind::Mode => format!(
                "mode: {} + {} sin({} x)",
                self.mode_offset, self.mode_amp, self.mode_k
            ),
            IcKind::File => format!(
                "file: {}",
                self.path.as_deref().map(|p| p.display().to_string()).unwrap_or_default()
            ),
        }
    }
}

/// Samples the initial condition on `grid` and transforms it.
pub fn build_initial(ic: &InitialConditionSpec, grid: &Grid) -> Result<SpectralState> {
    let values: Vec<f64> = match ic.kind {
        IcKind::Benchmark => grid.points().iter().map(|x| 0.5 + 0.25 * x.sin()).collect(),
        IcKind::Constant => vec![ic.c; grid.n_modes()],
        IcKind::Mode => {
            let w = ic.mode_k as f64 * grid.wavenumber_scale();
            let a = grid.domain_start();
            grid.points()
                .iter()
                .map(|x| ic.mode_offset + ic.mode_amp * (w * (x - a)).sin())
                .collect()
        }
        IcKind::File => {
            let path = ic
                .path
                .as_deref()
                .ok_or_else(|| KbfError::Validation {
                    key: "ic.path".into(),
                    message: "ic.kind = file requires ic.path".into(),
                })?;
            let rows = read_profile_csv(path)?;
            profile_on_grid(&rows, grid)?
        }
    };
    to_spectral(&values, grid)
}

/// Reads `(x, y)` rows, skipping blank lines, `#` comments and a textual header.
pub fn read_profile_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| KbfError::FileFormat(format!("{}: {e}", path.display())))?;
    parse_profile_csv(&text)
}

pub fn parse_profile_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    let mut seen_data = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) if x.is_finite() && y.is_finite() => {
                rows.push((x, y));
                seen_data = true;
            }
            None if !seen_data && fields.iter().all(|f| f.parse::<f64>().is_err()) => continue,
            _ => {
                return Err(KbfError::FileFormat(format!(
                    "line {}: expected two finite numbers, got `{line}`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(rows)
}

/// Checks the rows against the grid abscissae and returns the ordinates.
pub fn profile_on_grid(rows: &[(f64, f64)], grid: &Grid) -> Result<Vec<f64>> {
    if rows.len() != grid.n_modes() {
        return Err(KbfError::FileFormat(format!(
            "expected {} rows, found {}",
            grid.n_modes(),
            rows.len()
        )));
    }
    for ((x, _), xg) in rows.iter().zip(grid.points()) {
        if (x - xg).abs() > ABSCISSA_TOL {
            return Err(KbfError::GridMismatch);
        }
    }
    Ok(rows.iter().map(|&(_, y)| y).collect())
}
