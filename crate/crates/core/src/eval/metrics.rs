//! Pixel Dice and lesion-level ranking/confusion metrics.

use crate::error::Result;
use crate::volume::MaskVolume;

/// `2|A∩B| / (|A|+|B|)`, with Dice(∅, ∅) = 1.
pub fn pixel_dice(truth: &MaskVolume, pred: &MaskVolume) -> Result<f64> {
    truth.same_grid(pred)?;
    let (mut both, mut a, mut b) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.data().iter().zip(pred.data()) {
        a += t as usize;
        b += p as usize;
        both += (t && p) as usize;
    }
    if a + b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (a + b) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    GtLesion,
    CancerFreeSextant,
}

/// A positive (ground-truth lesion) or negative (cancer-free sextant)
/// evaluation unit with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalUnit {
    pub kind: UnitKind,
    pub voxels: Vec<usize>,
    pub score: f64,
}

impl EvalUnit {
    pub fn truth(&self) -> bool {
        self.kind == UnitKind::GtLesion
    }
}

/// Mann–Whitney AUC: the probability that a positive unit outscores a
/// negative one, ties counting one half. `None` when either class is
/// missing.
pub fn lesion_roc_auc(units: &[EvalUnit]) -> Option<f64> {
    let mut scored: Vec<(f64, bool)> = units.iter().map(|u| (u.score, u.truth())).collect();
    let n_pos = scored.iter().filter(|s| s.1).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    // U counted in half-units so every step is an exact integer
    let mut twice_u = 0u64;
    let mut neg_below = 0u64;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < scored.len() && scored[j].0 == scored[i].0 {
            if scored[j].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        twice_u += pos * (2 * neg_below + neg);
        neg_below += neg;
        i = j;
    }
    Some(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Thresholds unit scores: `score >= threshold` is a positive call.
pub fn lesion_confusion(units: &[EvalUnit], threshold: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for u in units {
        let called = u.score >= threshold;
        match (u.truth(), called) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

/// `TP/(TP+FN)` and `TN/(TN+FP)`; each undefined when its denominator is 0.
pub fn sensitivity_specificity(c: ConfusionCounts) -> (Option<f64>, Option<f64>) {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    (ratio(c.tp, c.tp + c.fn_), ratio(c.tn, c.tn + c.fp))
}
