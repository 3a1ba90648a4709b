use std::path::PathBuf;

use thiserror::Error;

use crate::tail_dynamics::TailRun;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A problem with one line of a configuration file.
    #[error("line {line}: key `{key}`: {message}")]
    ConfigLine {
        line: usize,
        key: String,
        message: String,
    },

    #[error("missing required key `{key}`")]
    MissingKey { key: String },

    /// A parameter set that parses but violates a physical invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("integration failed at step {step}: non-finite state")]
    Integration { step: usize },

    #[error("no steady state within {cycles} cycles (last cycle-RMS change {last_change:.3e})")]
    Divergence {
        cycles: usize,
        last_change: f64,
        trace: Box<TailRun>,
    },

    #[error("infeasible stiffness interval: k1_min = {k1_min:.6} N*m > k1_max = {k1_max:.6} N*m")]
    Infeasible { k1_min: f64, k1_max: f64 },

    #[error("no {step} m spring-steel thickness gives a stiffness in [{k1_min:.6}, {k1_max:.6}] N*m")]
    EmptyLattice { k1_min: f64, k1_max: f64, step: f64 },

    #[error("phase undefined: channel `{0}` has zero fundamental amplitude")]
    UndefinedPhase(&'static str),

    #[error("{0}")]
    Output(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Output(e.to_string())
    }
}
