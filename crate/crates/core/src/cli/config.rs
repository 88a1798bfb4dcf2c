//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment and blank lines are
//! ignored. Command-line overrides are applied after the file. Keys:
//!
//! | key | default |
//! |-----|---------|
//! | `nu`, `mu`, `gamma`, `eps_conv`, `eps_react` | required |
//! | `n_modes`, `dt`, `t_final` | required |
//! | `domain_start` | `0` |
//! | `domain_length` | `2 pi` |
//! | `scheme` | `strang` (`lie_trotter`) |
//! | `substeps` | `1` |
//! | `dealias` | `none` (`two_thirds`) |
//! | `symbol` | `spectral` (`operator`) |
//! | `fuse_half_steps` | `false` |
//! | `ic.kind` | `benchmark` (`constant`, `mode`, `file`) |
//! | `ic.c`, `ic.mode_k`, `ic.mode_amp`, `ic.mode_offset`, `ic.path` | `0`, `1`, `0.25`, `0.5`, unset |
//! | `norm` | `L2` (`H<s>`) |
//! | `snapshot_stride` | `0` |
//! | `output` | `out` |

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{KbfError, Result};
use crate::flows::NonlinearFlowConfig;
use crate::initial::{IcKind, InitialConditionSpec};
use crate::model::ModelParams;
use crate::spectral::{make_grid, Grid, NormSpec};
use crate::splitting::SolveConfig;

pub const KNOWN_KEYS: &[&str] = &[
    "nu",
    "mu",
    "gamma",
    "eps_conv",
    "eps_react",
    "symbol",
    "n_modes",
    "domain_start",
    "domain_length",
    "dt",
    "t_final",
    "scheme",
    "substeps",
    "dealias",
    "fuse_half_steps",
    "ic.kind",
    "ic.c",
    "ic.mode_k",
    "ic.mode_amp",
    "ic.mode_offset",
    "ic.path",
    "norm",
    "snapshot_stride",
    "output",
];

const REQUIRED_KEYS: &[&str] = &[
    "nu", "mu", "gamma", "eps_conv", "eps_react", "n_modes", "dt", "t_final",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub n_modes: usize,
    pub domain_start: f64,
    pub domain_length: f64,
    pub solve: SolveConfig,
    pub ic: InitialConditionSpec,
    pub output: PathBuf,
    pub norm: NormSpec,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.n_modes, self.domain_start, self.domain_length)
    }

    /// Re-emits every key; parsing the result gives back an identical config.
    pub fn to_kv(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let m = &self.model;
        let s = &self.solve;
        let mut out = vec![
            ("nu", m.nu.to_string()),
            ("mu", m.mu.to_string()),
            ("gamma", m.gamma.to_string()),
            ("eps_conv", m.eps_conv.to_string()),
            ("eps_react", m.eps_react.to_string()),
            ("symbol", m.convention.to_string()),
            ("n_modes", self.n_modes.to_string()),
            ("domain_start", self.domain_start.to_string()),
            ("domain_length", self.domain_length.to_string()),
            ("dt", s.dt.to_string()),
            ("t_final", s.t_final.to_string()),
            ("scheme", s.scheme.to_string()),
            ("substeps", s.nonlinear.substeps.to_string()),
            ("dealias", s.nonlinear.dealias.to_string()),
            ("fuse_half_steps", s.fuse_half_steps.to_string()),
            ("ic.kind", self.ic.kind.to_string()),
            ("ic.c", self.ic.c.to_string()),
            ("ic.mode_k", self.ic.mode_k.to_string()),
            ("ic.mode_amp", self.ic.mode_amp.to_string()),
            ("ic.mode_offset", self.ic.mode_offset.to_string()),
        ];
        if let Some(p) = &self.ic.path {
            out.push(("ic.path", p.display().to_string()));
        }
        out.push(("norm", self.norm.to_string()));
        out.push(("snapshot_stride", s.snapshot_stride.to_string()));
        out.push(("output", self.output.display().to_string()));
        out
    }
}

/// Splits `key = value` lines, reporting the line number of malformed input.
pub fn parse_kv(source: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| KbfError::Parse {
            line: i + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(KbfError::Parse {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn value<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>().map_err(|_| KbfError::Validation {
                key: key.to_string(),
                message: format!("cannot parse `{v}`"),
            })
        })
        .transpose()
}

fn parsed<T>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T: FromStr<Err = KbfError>,
{
    map.get(key)
        .map(|v| {
            v.parse::<T>().map_err(|e| KbfError::Validation {
                key: key.to_string(),
                message: e.to_string(),
            })
        })
        .transpose()
}

/// Builds a [`RunConfig`] from file text plus `(key, value)` overrides.
pub fn parse_config(source: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (line, k, v) in parse_kv(source)? {
        if map.insert(k.clone(), v).is_some() {
            return Err(KbfError::Parse {
                line,
                message: format!("duplicate key `{k}`"),
            });
        }
    }
    for (k, v) in overrides {
        map.insert(k.clone(), v.clone());
    }
    if let Some(k) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(KbfError::Validation {
            key: k.clone(),
            message: format!("unknown key `{k}`"),
        });
    }
    if let Some(k) = REQUIRED_KEYS.iter().find(|k| !map.contains_key(**k)) {
        return Err(KbfError::Validation {
            key: k.to_string(),
            message: format!("missing required key `{k}`"),
        });
    }
    let req = |k: &str| -> Result<f64> { Ok(value::<f64>(&map, k)?.expect("required key")) };

    let model = ModelParams {
        nu: req("nu")?,
        mu: req("mu")?,
        gamma: req("gamma")?,
        eps_conv: req("eps_conv")?,
        eps_react: req("eps_react")?,
        convention: parsed(&map, "symbol")?.unwrap_or_default(),
    };
    model.validate()?;

    let n_modes: usize = value(&map, "n_modes")?.expect("required key");
    let domain_start = value(&map, "domain_start")?.unwrap_or(0.0);
    let domain_length = value(&map, "domain_length")?.unwrap_or(2.0 * PI);
    make_grid(n_modes, domain_start, domain_length).map_err(|e| KbfError::Validation {
        key: "n_modes".into(),
        message: e.to_string(),
    })?;

    let nonlinear = NonlinearFlowConfig {
        substeps: value(&map, "substeps")?.unwrap_or(1),
        dealias: parsed(&map, "dealias")?.unwrap_or_default(),
    };
    nonlinear.validate()?;
    let solve = SolveConfig {
        dt: req("dt")?,
        t_final: req("t_final")?,
        scheme: parsed(&map, "scheme")?.unwrap_or_default(),
        nonlinear,
        fuse_half_steps: value(&map, "fuse_half_steps")?.unwrap_or(false),
        snapshot_stride: value(&map, "snapshot_stride")?.unwrap_or(0),
    };
    solve.steps().map_err(|e| KbfError::Validation {
        key: "dt".into(),
        message: e.to_string(),
    })?;

    let defaults = InitialConditionSpec::default();
    let ic = InitialConditionSpec {
        kind: parsed::<IcKind>(&map, "ic.kind")?.unwrap_or_default(),
        c: value(&map, "ic.c")?.unwrap_or(defaults.c),
        mode_k: value(&map, "ic.mode_k")?.unwrap_or(defaults.mode_k),
        mode_amp: value(&map, "ic.mode_amp")?.unwrap_or(defaults.mode_amp),
        mode_offset: value(&map, "ic.mode_offset")?.unwrap_or(defaults.mode_offset),
        path: map.get("ic.path").map(PathBuf::from),
    };
    for (key, v) in [("ic.c", ic.c), ("ic.mode_amp", ic.mode_amp), ("ic.mode_offset", ic.mode_offset)] {
        if !v.is_finite() {
            return Err(KbfError::Validation {
                key: key.into(),
                message: format!("{key} must be finite"),
            });
        }
    }
    if ic.kind == IcKind::File && ic.path.is_none() {
        return Err(KbfError::Validation {
            key: "ic.path".into(),
            message: "ic.kind = file requires ic.path".into(),
        });
    }

    Ok(RunConfig {
        model,
        n_modes,
        domain_start,
        domain_length,
        solve,
        ic,
        output: map.get("output").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
        norm: parsed(&map, "norm")?.unwrap_or_default(),
    })
}
