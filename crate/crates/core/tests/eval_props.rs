mod common;

use std::collections::BTreeSet;

use common::{blob_strategy, flood_fill, mask_strategy};
use lesion_harness::eval::{
    lesion_confusion, lesion_roc_auc, partition_sextants, pixel_dice, sensitivity_specificity,
    EvalUnit, Sextant, UnitKind, OUTSIDE,
};
use lesion_harness::lesions::Connectivity;
use lesion_harness::{MaskVolume, Volume};
use proptest::prelude::*;

fn units_strategy() -> impl Strategy<Value = Vec<EvalUnit>> {
    // few distinct scores so ties are common
    proptest::collection::vec((any::<bool>(), 0u8..6), 0..=30).prop_map(|raw| {
        raw.into_iter()
            .map(|(pos, s)| EvalUnit {
                kind: if pos { UnitKind::GtLesion } else { UnitKind::CancerFreeSextant },
                voxels: Vec::new(),
                score: s as f64 / 5.0,
            })
            .collect()
    })
}

/// Pairwise enumeration of P(score_pos > score_neg) + P(tie) / 2.
fn brute_auc(units: &[EvalUnit]) -> Option<f64> {
    let pos: Vec<f64> = units.iter().filter(|u| u.truth()).map(|u| u.score).collect();
    let neg: Vec<f64> = units.iter().filter(|u| !u.truth()).map(|u| u.score).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
        }
    }
    Some(wins / (pos.len() * neg.len()) as f64)
}

fn check_partition(mask: &MaskVolume) -> Result<(), TestCaseError> {
    let map = partition_sextants(mask).unwrap();
    let regions = map.regions();
    let mut seen = vec![0u8; mask.len()];
    for region in &regions {
        for &v in region {
            seen[v] += 1;
        }
    }
    for (i, &n) in seen.iter().enumerate() {
        prop_assert_eq!(n, mask[i] as u8, "voxel {} covered {} times", i, n);
        prop_assert_eq!(map.region_ids()[i] == OUTSIDE, !mask[i]);
    }
    // zone slice counts from the map itself
    let meta = mask.meta();
    let mut zone_slices: [BTreeSet<usize>; 3] = Default::default();
    for i in mask.foreground() {
        let s = map.region_of(i).unwrap();
        zone_slices[s.zone as usize].insert(meta.coords(i)[2]);
    }
    let counts: Vec<usize> = zone_slices.iter().map(BTreeSet::len).collect();
    let total: usize = counts.iter().sum();
    let occupied: BTreeSet<usize> = mask.foreground().map(|i| meta.coords(i)[2]).collect();
    prop_assert_eq!(total, occupied.len(), "a slice straddles two zones");
    prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn auc_matches_pairwise_enumeration(units in units_strategy()) {
        match (lesion_roc_auc(&units), brute_auc(&units)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn auc_invariant_under_increasing_transform(units in units_strategy()) {
        let squared: Vec<EvalUnit> = units
            .iter()
            .map(|u| EvalUnit { score: u.score * u.score, ..u.clone() })
            .collect();
        prop_assert_eq!(lesion_roc_auc(&units), lesion_roc_auc(&squared));
    }

    #[test]
    fn oracle_scores_give_unit_auc(units in units_strategy()) {
        let oracle: Vec<EvalUnit> = units
            .iter()
            .map(|u| EvalUnit { score: u.truth() as u8 as f64, ..u.clone() })
            .collect();
        if let Some(a) = lesion_roc_auc(&oracle) {
            prop_assert_eq!(a, 1.0);
        }
        let (sens, spec) = sensitivity_specificity(lesion_confusion(&oracle, 0.5));
        prop_assert!(sens.is_none_or(|s| s == 1.0));
        prop_assert!(spec.is_none_or(|s| s == 1.0));
    }

    #[test]
    fn confusion_monotone_in_threshold(units in units_strategy(), a in 0.0f64..1.2, b in 0.0f64..1.2) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (c_lo, c_hi) = (lesion_confusion(&units, lo), lesion_confusion(&units, hi));
        prop_assert!(c_hi.tp <= c_lo.tp && c_hi.fp <= c_lo.fp);
        let (sens, spec) = sensitivity_specificity(c_lo);
        for v in [sens, spec].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn dice_symmetric_and_bounded(a in mask_strategy([6, 6, 4]), seed in any::<u64>()) {
        let b = Volume::from_fn(*a.meta(), |i| (seed >> (i % 64)) & 1 == 1 || a[i] && i % 3 == 0).unwrap();
        let ab = pixel_dice(&a, &b).unwrap();
        prop_assert_eq!(ab, pixel_dice(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(pixel_dice(&a, &a).unwrap(), 1.0);
        let complement = Volume::from_fn(*a.meta(), |i| !a[i]).unwrap();
        if a.count() > 0 && complement.count() > 0 {
            prop_assert_eq!(pixel_dice(&a, &complement).unwrap(), 0.0);
        }
    }

    #[test]
    fn sextants_partition_random_masks(mask in mask_strategy([10, 10, 12])) {
        if mask.count() > 0 {
            check_partition(&mask)?;
        } else {
            prop_assert!(partition_sextants(&mask).is_err());
        }
    }

    #[test]
    fn sextants_on_blobs_are_all_nonempty(mask in blob_strategy()) {
        check_partition(&mask)?;
        prop_assert_eq!(flood_fill(&mask, Connectivity::TwentySix).len(), 1);
        let slices: BTreeSet<usize> = mask.foreground().map(|i| mask.meta().coords(i)[2]).collect();
        if slices.len() >= 6 {
            let map = partition_sextants(&mask).unwrap();
            for (k, region) in map.regions().iter().enumerate() {
                prop_assert!(!region.is_empty(), "{} empty", Sextant::from_id(k as u8).unwrap());
            }
        }
    }
}

#[test]
fn auc_edge_cases() {
    let unit = |pos: bool, score: f64| EvalUnit {
        kind: if pos { UnitKind::GtLesion } else { UnitKind::CancerFreeSextant },
        voxels: Vec::new(),
        score,
    };
    assert_eq!(lesion_roc_auc(&[]), None);
    assert_eq!(lesion_roc_auc(&[unit(true, 0.9), unit(true, 0.1)]), None);
    assert_eq!(lesion_roc_auc(&[unit(false, 0.9)]), None);
    let ties: Vec<_> = (0..7).map(|i| unit(i % 2 == 0, 0.4)).collect();
    assert_eq!(lesion_roc_auc(&ties), Some(0.5));
    assert_eq!(lesion_roc_auc(&[unit(true, 0.2), unit(false, 0.8)]), Some(0.0));
}
