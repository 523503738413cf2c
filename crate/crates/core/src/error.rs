use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("cube payload size mismatch: header implies {expected} bytes, found {found}")]
    PayloadSize { expected: usize, found: usize },

    #[error("invalid wavelength grid: {0}")]
    Grid(String),

    #[error("wavelength grids differ")]
    GridMismatch,

    #[error("no band within {tolerance_nm} nm of {wavelength_nm} nm (nearest is {nearest_nm} nm)")]
    MissingBand {
        wavelength_nm: f64,
        nearest_nm: f64,
        tolerance_nm: f64,
    },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("pixel ({x}, {y}) outside {width}x{height} frame")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid value for {field}: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("no illuminant region covers pixel ({x}, {y})")]
    RegionMiss { x: usize, y: usize },

    #[error("insufficient visible coverage: {bands} bands in 380-780 nm, need at least {required}")]
    VisibleCoverage { bands: usize, required: usize },

    #[error("zero valid samples")]
    NoValidSamples,

    #[error("white point mismatch between Lab colors")]
    WhitePointMismatch,

    #[error("empty dictionary: sparse albedo has no measured pixels")]
    EmptyDictionary,

    #[error("signature lengths differ: {0} vs {1}")]
    SignatureLength(usize, usize),

    #[error("invalid scene spec: {0}")]
    Scene(String),

    #[error("annotation error: {0}")]
    Annotation(String),

    #[error("invalid reference chart: {0}")]
    Chart(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }
}
