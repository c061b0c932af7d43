//! Sextant-based lesion-level evaluation.
//!
//! Ground-truth lesions are the positive units; sextants holding no voxel of
//! an in-group ground-truth lesion are the negative units. Each unit is
//! scored from the prediction and scored units feed the ROC-AUC and the
//! thresholded confusion counts. Dice is computed on pixels.

mod metrics;
mod report;
mod sextants;

pub use metrics::{
    lesion_confusion, lesion_roc_auc, pixel_dice, sensitivity_specificity, ConfusionCounts,
    EvalUnit, UnitKind,
};
pub use report::{
    aggregate, render_summary, summarize, write_metrics_csv, GroupSummary, MetricSummary,
    MetricsReport, PatientRow, METRICS_CSV_HEADER,
};
pub use sextants::{partition_sextants, zone_sizes, Sextant, SextantMap, Side, Zone, OUTSIDE};

use crate::error::{Error, Result};
use crate::lesions::{LesionParams, LesionSet};
use crate::volume::{ClassGroup, LabelSource, LabelVolume, PatientCase, ProbVolume};

/// Default score cutoff for the confusion counts.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Builds positive and negative units, scoring each voxel set with `score`.
pub fn build_units_with(
    gt_lesions: &LesionSet,
    group: ClassGroup,
    sextants: &SextantMap,
    mut score: impl FnMut(&[usize]) -> f64,
) -> Result<Vec<EvalUnit>> {
    if gt_lesions.meta != *sextants.meta() {
        return Err(Error::MetaMismatch);
    }
    let mut in_lesion = vec![false; gt_lesions.meta.len()];
    let mut units = Vec::new();
    for lesion in gt_lesions.in_group(group) {
        for &v in &lesion.voxels {
            in_lesion[v] = true;
        }
        units.push(EvalUnit {
            kind: UnitKind::GtLesion,
            score: score(&lesion.voxels),
            voxels: lesion.voxels.clone(),
        });
    }
    for region in sextants.regions() {
        if region.is_empty() || region.iter().any(|&v| in_lesion[v]) {
            continue;
        }
        units.push(EvalUnit {
            kind: UnitKind::CancerFreeSextant,
            score: score(&region),
            voxels: region,
        });
    }
    Ok(units)
}

/// Units scored by the maximum summed group probability over their voxels.
pub fn build_eval_units(
    gt_lesions: &LesionSet,
    group: ClassGroup,
    sextants: &SextantMap,
    probs: &ProbVolume,
) -> Result<Vec<EvalUnit>> {
    if gt_lesions.meta != *probs.meta() {
        return Err(Error::MetaMismatch);
    }
    let data = probs.data();
    build_units_with(gt_lesions, group, sextants, |voxels| {
        voxels
            .iter()
            .map(|&v| group.probability(data[v]))
            .fold(0.0, f64::max)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concordance {
    pub dice: f64,
    pub auc: Option<f64>,
}

/// Agreement of a binary comparator label volume with a reference. Units
/// are scored by the fraction of their voxels the comparator marks as
/// in-group.
pub fn concordance(
    truth: &LabelVolume,
    truth_lesions: &LesionSet,
    other: &LabelVolume,
    group: ClassGroup,
    sextants: &SextantMap,
) -> Result<Concordance> {
    truth.same_grid(other)?;
    let dice = pixel_dice(&truth.binarize(group), &other.binarize(group))?;
    let other_data = other.data();
    let units = build_units_with(truth_lesions, group, sextants, |voxels| {
        let hits = voxels.iter().filter(|&&v| group.contains(other_data[v])).count();
        hits as f64 / voxels.len() as f64
    })?;
    Ok(Concordance {
        dice,
        auc: lesion_roc_auc(&units),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub lesions: LesionParams,
    pub threshold: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            lesions: LesionParams::default(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Scores one prediction against one truth source of a patient.
pub fn evaluate_patient(
    case: &PatientCase,
    truth_source: LabelSource,
    prediction: &str,
    pred: &ProbVolume,
    group: ClassGroup,
    params: &EvalParams,
) -> Result<PatientRow> {
    let truth = case.require_label(truth_source)?;
    truth.same_grid(pred)?;
    let lesions = params.lesions.extract(truth, group)?;
    let sextants = partition_sextants(case.mask())?;
    let units = build_eval_units(&lesions, group, &sextants, pred)?;
    let counts = lesion_confusion(&units, params.threshold);
    let (sensitivity, specificity) = sensitivity_specificity(counts);
    let dice = pixel_dice(&truth.binarize(group), &pred.argmax().binarize(group))?;
    Ok(PatientRow {
        patient_id: case.id().to_string(),
        prediction: prediction.to_string(),
        truth: truth_source,
        group,
        dice: Some(dice),
        auc: lesion_roc_auc(&units),
        sensitivity,
        specificity,
        counts,
    })
}
