use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid helix parameters: {0}")]
    InvalidParams(String),

    #[error("potential is singular at s = {0}")]
    Singular(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "wave packet at s0 = {s0} with width {delta_s} comes within 8 widths of the grid edge"
    )]
    PacketTouchesBoundary { s0: f64, delta_s: f64 },

    #[error("finite-difference domain too small: {0}")]
    DomainTooSmall(String),

    #[error("diagonalization failed: {0}")]
    Diagonalization(String),

    #[error("need at least 2 bound states for a spacing profile, found {0}")]
    InsufficientStates(usize),

    #[error("no potential wells for h/R = {0}")]
    NoWells(f64),

    #[error("invalid propagation setup: {0}")]
    InvalidPropagation(String),

    #[error("observable invariant violated: {0}")]
    InvariantViolation(String),

    #[error("boundary contamination at t = {t}: edge density {density:e}")]
    BoundaryContamination { t: f64, density: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnknownPreset(_)
            | Error::InvalidParams(_)
            | Error::InvalidGrid(_)
            | Error::PacketTouchesBoundary { .. }
            | Error::InvalidPropagation(_)
            | Error::Io { .. } => 2,
            Error::BoundaryContamination { .. } => 4,
            _ => 3,
        }
    }
}
