//! Pixel annotations to graded 3D lesions: closing, connected components,
//! a physical volume filter and fraction-based grading.

mod components;
mod grading;
mod morphology;

use std::io::Write;

pub use components::{connected_components, ComponentMap, Connectivity};
pub use grading::{grade_lesion, Grade, GradeThresholds, Grading};
pub use morphology::{
    binary_close, build_structuring_element, dilate, disk_offsets, erode, in_plane_disk,
    radius_to_voxels, StructuringElement,
};

use crate::error::{Error, Result};
use crate::format::sig6;
use crate::volume::{ClassGroup, ClassId, GridMeta, LabelVolume, Volume};

pub const DEFAULT_DISK_RADII_MM: [f64; 3] = [0.5, 1.5, 0.5];
pub const DEFAULT_MIN_VOLUME_MM3: f64 = 250.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Lesion {
    /// Ascending linear voxel indices.
    pub voxels: Vec<usize>,
    pub volume_mm3: f64,
    pub grade: Grade,
    pub agg_fraction: f64,
    pub ind_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LesionSet {
    pub meta: GridMeta,
    pub min_volume_mm3: f64,
    pub lesions: Vec<Lesion>,
}

impl LesionSet {
    pub fn len(&self) -> usize {
        self.lesions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lesions.is_empty()
    }

    pub fn in_group(&self, group: ClassGroup) -> impl Iterator<Item = &Lesion> {
        self.lesions
            .iter()
            .filter(move |l| group.contains(l.grade.class()))
    }
}

/// Parameters of the lesion-forming pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LesionParams {
    pub disk_radii_mm: [f64; 3],
    pub connectivity: Connectivity,
    pub min_volume_mm3: f64,
    pub thresholds: GradeThresholds,
}

impl Default for LesionParams {
    fn default() -> Self {
        Self {
            disk_radii_mm: DEFAULT_DISK_RADII_MM,
            connectivity: Connectivity::TwentySix,
            min_volume_mm3: DEFAULT_MIN_VOLUME_MM3,
            thresholds: GradeThresholds::default(),
        }
    }
}

impl LesionParams {
    /// Builds the structuring element for `labels`' grid and runs
    /// [`extract_lesions`].
    pub fn extract(&self, labels: &LabelVolume, group: ClassGroup) -> Result<LesionSet> {
        let se = build_structuring_element(labels.meta(), self.disk_radii_mm)?;
        Ok(extract_lesions(
            labels,
            group,
            &se,
            self.connectivity,
            self.min_volume_mm3,
            self.thresholds,
        ))
    }
}

/// Binarizes `labels` by `group`, closes, labels components and keeps those
/// with volume >= `min_volume_mm3`. Each kept component is graded against
/// the original, unclosed labels.
pub fn extract_lesions(
    labels: &LabelVolume,
    group: ClassGroup,
    se: &StructuringElement,
    connectivity: Connectivity,
    min_volume_mm3: f64,
    thresholds: GradeThresholds,
) -> LesionSet {
    let meta = *labels.meta();
    let closed = binary_close(&labels.binarize(group), se);
    let voxel_mm3 = meta.voxel_volume_mm3();
    let lesions = connected_components(&closed, connectivity)
        .components()
        .into_iter()
        .filter_map(|voxels| {
            let volume_mm3 = voxels.len() as f64 * voxel_mm3;
            if volume_mm3 < min_volume_mm3 {
                return None;
            }
            let g = grade_lesion(&voxels, labels, thresholds).expect("components are nonempty");
            Some(Lesion {
                voxels,
                volume_mm3,
                grade: g.grade,
                agg_fraction: g.agg_fraction,
                ind_fraction: g.ind_fraction,
            })
        })
        .collect();
    LesionSet {
        meta,
        min_volume_mm3,
        lesions,
    }
}

/// Paints every lesion uniformly with its grade's class.
pub fn lesionset_to_labelvolume(set: &LesionSet) -> Result<LabelVolume> {
    let mut data = vec![ClassId::Normal; set.meta.len()];
    let mut taken = vec![false; set.meta.len()];
    for lesion in &set.lesions {
        let class = lesion.grade.class();
        for &v in &lesion.voxels {
            if std::mem::replace(&mut taken[v], true) {
                return Err(Error::OverlappingLesions(v));
            }
            data[v] = class;
        }
    }
    Ok(Volume::from_parts_unchecked(set.meta, data))
}

pub const LESION_CSV_HEADER: [&str; 7] = [
    "patient_id",
    "lesion_id",
    "grade",
    "n_voxels",
    "volume_mm3",
    "agg_fraction",
    "ind_fraction",
];

/// Appends one CSV row per lesion; lesion ids start at 1.
pub fn write_lesion_rows<W: Write>(
    writer: &mut csv::Writer<W>,
    patient_id: &str,
    set: &LesionSet,
) -> Result<()> {
    for (k, lesion) in set.lesions.iter().enumerate() {
        writer.write_record([
            patient_id.to_string(),
            (k + 1).to_string(),
            lesion.grade.to_string(),
            lesion.voxels.len().to_string(),
            sig6(lesion.volume_mm3),
            sig6(lesion.agg_fraction),
            sig6(lesion.ind_fraction),
        ])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(meta: GridMeta, lo: [usize; 3], hi: [usize; 3], class: ClassId, data: &mut [ClassId]) {
        for z in lo[2]..hi[2] {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    data[meta.index(x, y, z)] = class;
                }
            }
        }
    }

    #[test]
    fn all_normal_has_no_lesions() {
        let meta = GridMeta::new([10, 10, 4], [0.5, 0.5, 3.0]).unwrap();
        let labels = LabelVolume::filled(meta, ClassId::Normal);
        let set = LesionParams::default()
            .extract(&labels, ClassGroup::CancerVsAll)
            .unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn volume_filter_boundary_at_acquisition_spacing() {
        // 990 voxels * 0.2523 mm³ = 249.777 mm³, 991 voxels = 250.029 mm³
        let meta = GridMeta::new([40, 40, 3], [0.29, 0.29, 3.0]).unwrap();
        let se = StructuringElement::from_offsets(vec![[0, 0, 0]]).unwrap();
        for (n, kept) in [(990usize, false), (991, true)] {
            let mut data = vec![ClassId::Normal; meta.len()];
            // a contiguous run in slice 1, rows of 33
            for k in 0..n {
                data[meta.index(3 + k % 33, 3 + k / 33, 1)] = ClassId::Aggressive;
            }
            let labels = LabelVolume::new(meta, data).unwrap();
            let set = extract_lesions(
                &labels,
                ClassGroup::CancerVsAll,
                &se,
                Connectivity::TwentySix,
                250.0,
                GradeThresholds::default(),
            );
            assert_eq!(set.len(), kept as usize, "n = {n}");
        }
    }

    #[test]
    fn equality_volume_is_kept() {
        let meta = GridMeta::new([20, 20, 1], [1.0; 3]).unwrap();
        let se = StructuringElement::from_offsets(vec![[0, 0, 0]]).unwrap();
        let mut data = vec![ClassId::Normal; meta.len()];
        data[..250].fill(ClassId::Indolent);
        let labels = LabelVolume::new(meta, data).unwrap();
        let set = extract_lesions(
            &labels,
            ClassGroup::CancerVsAll,
            &se,
            Connectivity::Six,
            250.0,
            GradeThresholds::default(),
        );
        assert_eq!(set.len(), 1);
        assert_eq!(set.lesions[0].volume_mm3, 250.0);
        assert_eq!(set.lesions[0].grade, Grade::Indolent);
    }

    #[test]
    fn separated_blobs_give_disjoint_lesions() {
        let meta = GridMeta::new([40, 20, 6], [0.5, 0.5, 3.0]).unwrap();
        let mut data = vec![ClassId::Normal; meta.len()];
        block(meta, [2, 2, 1], [14, 14, 5], ClassId::Aggressive, &mut data);
        block(meta, [24, 2, 1], [36, 14, 5], ClassId::Indolent, &mut data);
        let labels = LabelVolume::new(meta, data).unwrap();
        let params = LesionParams {
            min_volume_mm3: 0.0,
            ..LesionParams::default()
        };
        let set = params.extract(&labels, ClassGroup::CancerVsAll).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.lesions[0].grade, Grade::Aggressive);
        assert_eq!(set.lesions[1].grade, Grade::Indolent);
        assert!(set.lesions[0]
            .voxels
            .iter()
            .all(|v| set.lesions[1].voxels.binary_search(v).is_err()));
    }

    #[test]
    fn render_and_overlap() {
        let meta = GridMeta::new([4, 1, 1], [1.0; 3]).unwrap();
        let lesion = |voxels: Vec<usize>, grade| Lesion {
            volume_mm3: voxels.len() as f64,
            voxels,
            grade,
            agg_fraction: 0.0,
            ind_fraction: 0.0,
        };
        let set = LesionSet {
            meta,
            min_volume_mm3: 0.0,
            lesions: vec![
                lesion(vec![0, 1], Grade::Aggressive),
                lesion(vec![3], Grade::Benign),
            ],
        };
        let rendered = lesionset_to_labelvolume(&set).unwrap();
        assert_eq!(
            rendered.data(),
            &[ClassId::Aggressive, ClassId::Aggressive, ClassId::Normal, ClassId::Normal]
        );
        let overlapping = LesionSet {
            lesions: vec![
                lesion(vec![0, 1], Grade::Aggressive),
                lesion(vec![1], Grade::Indolent),
            ],
            ..set
        };
        assert!(matches!(
            lesionset_to_labelvolume(&overlapping),
            Err(Error::OverlappingLesions(1))
        ));
        let empty = LesionSet {
            lesions: vec![],
            ..overlapping
        };
        assert_eq!(lesionset_to_labelvolume(&empty).unwrap().count_class(ClassId::Normal), 4);
    }

    #[test]
    fn csv_rows() {
        let meta = GridMeta::new([4, 1, 1], [0.29, 0.29, 3.0]).unwrap();
        let set = LesionSet {
            meta,
            min_volume_mm3: 0.0,
            lesions: vec![Lesion {
                voxels: vec![0, 1, 2],
                volume_mm3: 3.0 * meta.voxel_volume_mm3(),
                grade: Grade::Indolent,
                agg_fraction: 0.0,
                ind_fraction: 2.0 / 3.0,
            }],
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(LESION_CSV_HEADER).unwrap();
        write_lesion_rows(&mut w, "case0001", &set).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(
            text,
            "patient_id,lesion_id,grade,n_voxels,volume_mm3,agg_fraction,ind_fraction\n\
             case0001,1,indolent,3,0.7569,0,0.666667\n"
        );
    }
}
