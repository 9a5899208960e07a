//! Command implementations behind the `spinfac` binary.

use std::path::Path;

use spinfac::catalog::{self, CatalogError};
use spinfac::geometry::GeometryError;
use spinfac::operators::OperatorError;
use spinfac::{Execution, Report, Submersion};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] CatalogError),
    #[error("verification could not run: {0}")]
    Internal(#[from] OperatorError),
}

impl CliError {
    /// One line per frame-invariant violation, or the error message.
    pub fn details(&self) -> Vec<String> {
        match self {
            Self::Input(CatalogError::Geometry(GeometryError::Invalid(diags))) => {
                let mut lines = vec![format!("frame data violates {} invariant(s):", diags.len())];
                lines.extend(diags.iter().map(|d| format!("  {d}")));
                lines
            }
            other => vec![other.to_string()],
        }
    }
}

/// Exit status for a finished report: 0 when every residual is within tolerance.
pub fn exit_code(report: &Report) -> i32 {
    if report.pass {
        0
    } else {
        1
    }
}

/// Exit status for a run that produced no report.
pub const ERROR_EXIT: i32 = 2;

/// A file path if one exists at `target`, otherwise a catalog name.
pub fn resolve(target: &str) -> Result<Submersion, CliError> {
    if Path::new(target).is_file() {
        return Ok(catalog::load(target)?);
    }
    match catalog::by_name(target) {
        Ok(frame) => Ok(Submersion::try_from(frame).map_err(CatalogError::from)?),
        Err(CatalogError::UnknownExample(_)) => Err(CliError::Usage(format!(
            "`{target}` is neither a readable file nor a catalog example ({})",
            catalog::names().join(", ")
        ))),
        Err(e) => Err(e.into()),
    }
}

fn check_tolerance(tolerance: f64) -> Result<(), CliError> {
    if tolerance.is_finite() && tolerance >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "tolerance must be a finite non-negative number, got {tolerance}"
        )))
    }
}

pub fn cmd_verify(target: &str, tolerance: f64) -> Result<Report, CliError> {
    check_tolerance(tolerance)?;
    let sub = resolve(target)?;
    let mut report = spinfac::verify(&sub, tolerance)?;
    if target != sub.frame().label() {
        report.target = format!("{target} ({})", sub.frame().label());
    }
    Ok(report)
}

pub fn cmd_fuzz(
    count: usize,
    seed: u64,
    tolerance: f64,
    exec: Execution,
) -> Result<Report, CliError> {
    check_tolerance(tolerance)?;
    if count == 0 {
        return Err(CliError::Usage("fuzz needs --count of at least 1".into()));
    }
    Ok(spinfac::fuzz(count, seed, tolerance, exec)?)
}
