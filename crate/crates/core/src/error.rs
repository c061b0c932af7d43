use std::path::PathBuf;

use thiserror::Error;

use crate::volume::LabelSource;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("malformed header {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("voxel {index}: invalid class value {value}")]
    InvalidClassValue { index: usize, value: u8 },

    #[error("voxel {index}: invalid mask value {value}")]
    InvalidMaskValue { index: usize, value: u8 },

    #[error("voxel {index}: non-finite value")]
    NonFiniteValue { index: usize },

    #[error("voxel {index}: probabilities {probs:?} are not on the simplex")]
    InvalidProbability { index: usize, probs: [f32; 3] },

    #[error("volume kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("grid metadata mismatch")]
    MetaMismatch,

    #[error("in-plane spacing is anisotropic ({sx} vs {sy} mm)")]
    AnisotropicInPlaneSpacing { sx: f64, sy: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lesion has no voxels")]
    EmptyLesion,

    #[error("lesions overlap at voxel {0}")]
    OverlappingLesions(usize),

    #[error("mask has no foreground voxels")]
    EmptyMask,

    #[error("label source {0} is missing")]
    MissingLabelSource(LabelSource),

    #[error("cohort is empty")]
    EmptyCohort,

    #[error("degenerate intensities: {0}")]
    DegenerateIntensities(String),

    #[error("linear interpolation is not allowed for categorical volumes")]
    ModeMismatch,

    #[error("phantom infeasible: {0}")]
    SpecInfeasible(String),

    #[error("duplicate patient id {0}")]
    DuplicatePatient(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
