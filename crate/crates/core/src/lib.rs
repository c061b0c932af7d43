//! Volumetric label processing and lesion-level evaluation.
//!
//! * [`volume`] and [`vgrid`]: metric-grid volumes and their file format.
//! * [`lesions`]: closing, connected components, volume filter and grading.
//! * [`eval`]: sextants, Dice, lesion-level ROC-AUC and cohort aggregation.
//! * [`preprocess`]: landmark intensity standardization, z-scores, resampling.
//! * [`synth`]: seeded phantom cohorts and label/prediction degradations.

pub mod error;
pub mod eval;
pub mod format;
pub mod kv;
pub mod lesions;
pub mod preprocess;
pub mod synth;
pub mod vgrid;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{
    ClassGroup, ClassId, GridMeta, IntensityVolume, LabelSource, LabelVolume, MaskVolume,
    PatientCase, ProbVolume, Volume, Voxel,
};
