//! Seeded phantom cohorts and simulators for the four label sources and for
//! model predictions.

pub mod cohort;
mod degrade;
pub mod phantom;
pub mod rng;

pub use cohort::{
    load_cohort, read_case, read_manifest, write_case, write_cohort, write_cohort_manifest,
    CohortManifest,
};
pub use degrade::{
    derive_dpath_lesion, simulate_pathologist, simulate_predictions, simulate_radiologist,
    DegradationSpec,
};
pub use phantom::{generate_phantom, patient_id, PhantomSpec, Span};
