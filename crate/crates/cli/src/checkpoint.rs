//! Trained-parameter checkpoint files.
//!
//! Textual format, one value per line with round-trip float formatting,
//! preceded by the architecture widths:
//!
//! ```text
//! 2 40 40 40 40 1
//! 1.23456789012345678e0
//! ...
//! ```

use std::path::Path;

use sdpinn_core::mlp::{Architecture, ParameterVector};

use crate::{CliError, Result};

pub fn write_checkpoint(path: &Path, arch: &Architecture, params: &ParameterVector) -> Result<()> {
    let mut out = String::new();
    let widths: Vec<String> = arch.widths().iter().map(|w| w.to_string()).collect();
    out.push_str(&widths.join(" "));
    out.push('\n');
    for v in &params.values {
        out.push_str(&format!("{v:.17e}\n"));
    }
    std::fs::write(path, out).map_err(CliError::io(path.display().to_string()))
}

pub fn read_checkpoint(path: &Path) -> Result<(Architecture, ParameterVector)> {
    let text =
        std::fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{}: empty checkpoint", path.display())))?;
    let widths: Vec<usize> = header
        .split_whitespace()
        .map(|w| {
            w.parse()
                .map_err(|_| CliError::Config(format!("{}: bad width '{w}'", path.display())))
        })
        .collect::<Result<_>>()?;
    let arch = Architecture::new(widths)?;
    let values: Vec<f64> = lines
        .map(|l| {
            l.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{}: bad value '{l}'", path.display())))
        })
        .collect::<Result<_>>()?;
    if values.len() != arch.param_count() {
        return Err(CliError::Config(format!(
            "{}: {} values for an architecture needing {}",
            path.display(),
            values.len(),
            arch.param_count()
        )));
    }
    Ok((arch, ParameterVector::new(values)))
}
