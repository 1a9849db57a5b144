use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("state of charge {soc:.6} outside [{min}, {max}]")]
    SocBound { soc: f64, min: f64, max: f64 },

    #[error(
        "responsive load cannot conserve {required:.3} kWh within bounds [{min:.3}, {max:.3}]"
    )]
    LoadShiftInfeasible { required: f64, min: f64, max: f64 },

    #[error("EV {ev} cannot reach departure SOC {required:.4} (best reachable {reachable:.4})")]
    DepartureUnreachable {
        ev: usize,
        required: f64,
        reachable: f64,
    },

    #[error("hour {hour}: grid import {import_kw:.3} kW exceeds tie-line limit {limit_kw:.3} kW")]
    GridLimitExceeded {
        hour: usize,
        import_kw: f64,
        limit_kw: f64,
    },

    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("table {table}: {message}")]
    Table { table: String, message: String },

    #[error("case file: {0}")]
    CaseParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::LoadShiftInfeasible { .. }
                | Error::DepartureUnreachable { .. }
                | Error::GridLimitExceeded { .. }
        )
    }

    /// Process exit code used by the `mmg` binary.
    pub fn exit_code(&self) -> i32 {
        if self.is_infeasibility() {
            2
        } else {
            1
        }
    }
}

/// One problem found while validating a case file, keyed by its field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIssue {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationError {
    pub issues: Vec<FieldIssue>,
}

impl ValidationError {
    pub fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(FieldIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case validation failed ({} issue(s))", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  {}: {}", issue.path, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationError {}
