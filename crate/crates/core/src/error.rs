use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular (pivot magnitude {pivot:.3e} below 1e-12)")]
    SingularMatrix { pivot: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input value")]
    NonFiniteInput,

    #[error("probability vector sums to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("transition matrix is not row-stochastic: row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("entry ({row}, {col}) = {value} outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite activation after layer {layer}")]
    NonFiniteActivation { layer: usize },

    #[error("backward pass requested without a cached forward pass")]
    NoCachedForward,

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("no anchor candidate for class {class}: best posterior {best} is no better than uniform")]
    NoAnchorCandidate { class: usize, best: f64 },

    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("truncated file: {0}")]
    TruncatedFile(String),

    #[error("validation fraction {0} outside (0, 1)")]
    FractionOutOfRange(f64),

    #[error("empty input")]
    EmptyInput,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("runs are not homogeneous: {0}")]
    HeterogeneousRuns(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by the user's configuration or inputs rather
    /// than by a failure while running.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigInvalid(_) | Error::FractionOutOfRange(_) | Error::Io { .. } | Error::Parse(_)
        )
    }
}
