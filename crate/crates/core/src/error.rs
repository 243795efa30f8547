use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("sidecar declares {declared} bytes of pixel data but payload holds {actual}")]
    SidecarMismatch { declared: u64, actual: u64 },

    #[error("malformed sidecar: {0}")]
    BadSidecar(String),

    #[error("non-finite pixel at index {0}")]
    NonFinitePixel(usize),

    #[error("i/o failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("not a binary PGM (expected magic P5)")]
    BadMagic,

    #[error("unsupported PGM maxval {0} (only 65535 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("malformed PGM: {0}")]
    BadPgm(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("ROI {x},{y},{w},{h} does not fit a {width}x{height} image")]
    RoiOutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("image too small for this filter: {width}x{height}, need at least {min} per side")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("malformed coefficient pyramid: {0}")]
    MalformedPyramid(String),

    #[error("no dose information: need an R_the override or positive mAs on both images")]
    MissingDose,

    #[error("high-dose residual variance {0:e} is degenerate")]
    DegenerateHighVariance(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("ground truth does not correspond to the scan pair")]
    Mismatch,

    #[error("sweep axis `{0}` is empty")]
    EmptyAxis(String),

    #[error("every candidate specification has a degenerate record")]
    AllDegenerate,

    #[error("no baseline (filter=none) records to compare against")]
    MissingBaseline,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
