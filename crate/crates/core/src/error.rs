use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
///
/// Variants map onto the error classes the CLI distinguishes: configuration and
/// usage errors are the caller's fault, the rest indicate a failed computation
/// or corrupt input files.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("non-finite value in layer {layer}")]
    NonFiniteLayer { layer: usize },
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("non-finite state at t = {time} ms")]
    NonFiniteState { time: f64 },
    #[error("unsupported initial data: {0}")]
    Unsupported(String),
    #[error("stability error: {0}")]
    Stability(String),
    #[error("extraction failed in slice {slice}: {reason}")]
    Extraction { slice: usize, reason: String },
    #[error("no sharp transition: max slope {max_slope} below floor {floor}")]
    NoTransition { max_slope: f64, floor: f64 },
    #[error("corrupt data in {path}: {reason}")]
    Corruption { path: PathBuf, reason: String },
    #[error("format version mismatch: expected {expected}, found {found}")]
    Version { expected: u32, found: u32 },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad arguments, configuration or input files
    /// rather than a failure inside the computation.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Usage(_)
                | Error::Unsupported(_)
                | Error::Stability(_)
                | Error::Corruption { .. }
                | Error::Version { .. }
                | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
