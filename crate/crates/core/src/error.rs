use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by graph construction, rank evaluation, exploration and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments that no valid object can be built from (odd `n·d`, `n < 3` for a cycle, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A query referred to something outside the structure, usually a vertex id `>= n`.
    #[error("invalid input: {0}")]
    Input(String),

    /// The configuration model did not produce a simple graph within the retry budget.
    #[error("random regular generation failed after {attempts} attempts (n={n}, d={d})")]
    GenerationFailure { n: usize, d: usize, attempts: u64 },

    /// A graph file that does not follow the edge-list format.
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn vertex_out_of_range(v: usize, n: usize) -> Error {
    Error::Input(format!("vertex {v} out of range for graph with {n} vertices"))
}
