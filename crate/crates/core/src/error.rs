use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed ENVI header: {0}")]
    MalformedHeader(String),

    #[error("unsupported interleave `{0}` (only bil is supported)")]
    UnsupportedInterleave(String),

    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    TruncatedPayload { expected: usize, actual: usize },

    #[error("wavelength {target_nm} nm outside [{min_nm}, {max_nm}] nm")]
    OutOfRange { target_nm: f64, min_nm: f64, max_nm: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("difference image is constant; cannot threshold")]
    DegenerateImage,

    #[error("region of interest is empty")]
    EmptyRoi,

    #[error("zero variance")]
    ZeroVariance,

    #[error("degenerate scatter fit (|slope| = {0:e})")]
    DegenerateFit(f64),

    #[error("bad Savitzky-Golay window {window} (polyorder {polyorder}, {bands} bands)")]
    BadWindow {
        window: usize,
        polyorder: usize,
        bands: usize,
    },

    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),

    #[error("rank deficient at latent variable {component}")]
    RankDeficient { component: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectral coverage [{min_nm}, {max_nm}] nm does not span 420-700 nm")]
    CoverageError { min_nm: f64, max_nm: f64 },

    #[error("patch {patch} larger than image {height}x{width}")]
    BadPatch {
        patch: usize,
        height: usize,
        width: usize,
    },

    #[error("training diverged at epoch {epoch}, iteration {iter} (loss {loss})")]
    Divergence { epoch: usize, iter: usize, loss: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("bad file format in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Configuration problems, as opposed to failures while running a stage.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::BadRatios(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
