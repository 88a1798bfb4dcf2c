//! Snapshot CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::spectral::{to_physical, SpectralState};

/// Two-column `x,y` CSV with a `#` header carrying `meta` key-value pairs.
/// Values use 17 significant digits so they parse back bit-for-bit.
pub fn snapshot_csv(state: &SpectralState, meta: &[(&str, String)]) -> Result<String> {
    let y = to_physical(state)?;
    let mut out = String::from("# kbf snapshot\n");
    for (k, v) in meta {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str("x,y\n");
    for (x, v) in state.grid().points().iter().zip(y) {
        let _ = writeln!(out, "{x:.16e},{v:.16e}");
    }
    Ok(out)
}

pub fn write_snapshot(path: &Path, state: &SpectralState, meta: &[(&str, String)]) -> Result<()> {
    fs::write(path, snapshot_csv(state, meta)?)?;
    Ok(())
}
