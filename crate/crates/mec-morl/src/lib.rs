//! File formats, experiment orchestration and command line for
//! [`mec_morl_core`].
//!
//! * [`config_file`]: `key = value` system config files with environment
//!   overrides.
//! * [`checkpoint`]: versioned, checksummed network checkpoints.
//! * [`records`]: results, training-log, front and trace files.
//! * [`manifest`]: hashed inventory of everything a run writes.
//! * [`experiment`]: train / evaluate / front / calibrate / simulate.

pub mod checkpoint;
pub mod cli;
pub mod config_file;
pub mod experiment;
pub mod manifest;
pub mod records;

pub use mec_morl_core as core;

use std::fmt;

/// Failure classes, each with its process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration (exit 2).
    Usage(String),
    /// Unreadable, corrupt or mismatched input data (exit 3).
    Data(String),
    /// Non-finite values or failed numeric procedures (exit 4).
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<mec_morl_core::Error> for Failure {
    fn from(e: mec_morl_core::Error) -> Self {
        use mec_morl_core::Error as E;
        match e {
            E::InvalidConfig(_) => Failure::Usage(e.to_string()),
            E::NonFinite { .. } | E::Calibration(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Failure>;
