use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("nine-point laplacian needs square cells, got dx = {dx}, dy = {dy}")]
    NonSquareCells { dx: f64, dy: f64 },

    #[error("field extents differ: {0}x{1} vs {2}x{3}")]
    ExtentMismatch(usize, usize, usize, usize),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: &'static str, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config line {line}: cannot parse value for `{key}`: {reason}")]
    ParseValue {
        line: usize,
        key: String,
        reason: String,
    },

    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error(
        "time step dt = {dt} exceeds the explicit stability bound {bound} \
         (thermal {thermal}, phase {phase}); pass --force to run anyway"
    )]
    Unstable {
        dt: f64,
        bound: f64,
        thermal: f64,
        phase: f64,
    },

    #[error("non-finite {field} value at step {step}, cell ({i}, {j})")]
    BlowUp {
        step: u64,
        field: &'static str,
        i: usize,
        j: usize,
    },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] io::Error),

    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait IoContext<T> {
    fn at(self, path: &std::path::Path) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
