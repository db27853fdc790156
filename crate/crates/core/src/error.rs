use std::path::PathBuf;

use thiserror::Error;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Runtime,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: vertex id {id} does not fit in 32 bits")]
    EndpointOverflow { line: usize, id: String },
    #[error("edge list is empty")]
    EmptyFile,
    #[error("malformed {what} file: {message}")]
    Format { what: &'static str, message: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid rmat parameters: {0}")]
    InvalidRmat(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("{pes} processing elements exceed {vertices} vertices")]
    TooManyPes { pes: usize, vertices: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite value at iteration {iteration}, vertex {vertex}")]
    NonFinite { iteration: usize, vertex: u32 },
    #[error("zero-norm vector at iteration {iteration}; normalization is undefined")]
    ZeroNorm { iteration: usize },
    #[error("router queue for worker {worker} exceeded its capacity of {capacity} messages")]
    RouterOverflow { worker: usize, capacity: usize },
    #[error("unknown destination worker {worker} (cluster has {workers})")]
    UnknownWorker { worker: usize, workers: usize },
    #[error("dependency graph contains a cycle")]
    CyclicDag,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidRmat(_)
            | Error::InvalidLayout(_)
            | Error::TooManyPes { .. }
            | Error::Config(_) => ErrorClass::Usage,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::EndpointOverflow { .. }
            | Error::EmptyFile
            | Error::Format { .. }
            | Error::InvalidGraph(_)
            | Error::ZeroNorm { .. } => ErrorClass::Data,
            Error::NonFinite { .. }
            | Error::RouterOverflow { .. }
            | Error::UnknownWorker { .. }
            | Error::CyclicDag => ErrorClass::Runtime,
        }
    }

    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::EndpointOverflow { .. } => "endpoint_overflow",
            Error::EmptyFile => "empty_file",
            Error::Format { .. } => "format",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::InvalidRmat(_) => "invalid_rmat",
            Error::InvalidLayout(_) => "invalid_layout",
            Error::TooManyPes { .. } => "too_many_pes",
            Error::Config(_) => "config",
            Error::NonFinite { .. } => "non_finite",
            Error::ZeroNorm { .. } => "zero_norm",
            Error::RouterOverflow { .. } => "router_overflow",
            Error::UnknownWorker { .. } => "unknown_worker",
            Error::CyclicDag => "cyclic_dag",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
