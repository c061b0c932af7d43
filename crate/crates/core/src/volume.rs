//! Metric-grid volumes and the label vocabulary shared by every module.
//!
//! Voxels are stored densely in x-fastest, then y, then z order. The same
//! order is used on disk (see [`crate::vgrid`]).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Allowed deviation of a probability triple's sum from one.
pub const SIMPLEX_TOLERANCE: f32 = 1e-5;

/// Voxel counts and physical spacing (mm) of a regular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    dims: [usize; 3],
    spacing: [f64; 3],
}

impl GridMeta {
    pub fn new(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidGrid(format!("dims must be >= 1, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive and finite, got {spacing:?}"
            )));
        }
        dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::InvalidGrid(format!("dims {dims:?} overflow")))?;
        Ok(Self { dims, spacing })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slice_len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.dims[0];
        let rest = index / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    /// Index of `(x, y, z) + offset`, or `None` when it falls off the grid.
    #[inline]
    pub fn offset_index(&self, [x, y, z]: [usize; 3], [dx, dy, dz]: [i32; 3]) -> Option<usize> {
        let nx = x as i64 + dx as i64;
        let ny = y as i64 + dy as i64;
        let nz = z as i64 + dz as i64;
        if nx < 0
            || ny < 0
            || nz < 0
            || nx >= self.dims[0] as i64
            || ny >= self.dims[1] as i64
            || nz >= self.dims[2] as i64
        {
            return None;
        }
        Some(self.index(nx as usize, ny as usize, nz as usize))
    }

    /// Physical volume of one voxel in mm³.
    pub fn voxel_volume_mm3(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }
}

/// Per-voxel tissue class. The numeric encoding is part of the file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum ClassId {
    #[default]
    Normal = 0,
    Indolent = 1,
    Aggressive = 2,
}

impl ClassId {
    pub const ALL: [ClassId; 3] = [ClassId::Normal, ClassId::Indolent, ClassId::Aggressive];

    pub fn from_u8(value: u8) -> Option<Self> {
        match value {
            0 => Some(ClassId::Normal),
            1 => Some(ClassId::Indolent),
            2 => Some(ClassId::Aggressive),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn is_cancer(self) -> bool {
        self != ClassId::Normal
    }
}

/// A set of cancer classes treated as "positive" for a binary task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassGroup {
    CancerVsAll,
    AggressiveVsAll,
    IndolentVsAll,
}

impl ClassGroup {
    pub const ALL: [ClassGroup; 3] = [
        ClassGroup::CancerVsAll,
        ClassGroup::AggressiveVsAll,
        ClassGroup::IndolentVsAll,
    ];

    pub fn contains(self, class: ClassId) -> bool {
        match self {
            ClassGroup::CancerVsAll => class.is_cancer(),
            ClassGroup::AggressiveVsAll => class == ClassId::Aggressive,
            ClassGroup::IndolentVsAll => class == ClassId::Indolent,
        }
    }

    pub fn classes(self) -> &'static [ClassId] {
        match self {
            ClassGroup::CancerVsAll => &[ClassId::Indolent, ClassId::Aggressive],
            ClassGroup::AggressiveVsAll => &[ClassId::Aggressive],
            ClassGroup::IndolentVsAll => &[ClassId::Indolent],
        }
    }

    /// Summed probability of the group's classes.
    #[inline]
    pub fn probability(self, p: [f32; 3]) -> f64 {
        match self {
            ClassGroup::CancerVsAll => p[1] as f64 + p[2] as f64,
            ClassGroup::AggressiveVsAll => p[2] as f64,
            ClassGroup::IndolentVsAll => p[1] as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassGroup::CancerVsAll => "cancer",
            ClassGroup::AggressiveVsAll => "aggressive",
            ClassGroup::IndolentVsAll => "indolent",
        }
    }
}

impl fmt::Display for ClassGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown class group '{s}'")))
    }
}

/// Origin of a label volume: radiologist, pathologist, lesion-level or
/// pixel-level digital pathologist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelSource {
    Rad,
    Path,
    DPathLesion,
    DPathPixel,
}

impl LabelSource {
    pub const ALL: [LabelSource; 4] = [
        LabelSource::Rad,
        LabelSource::Path,
        LabelSource::DPathLesion,
        LabelSource::DPathPixel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LabelSource::Rad => "rad",
            LabelSource::Path => "path",
            LabelSource::DPathLesion => "dpath_lesion",
            LabelSource::DPathPixel => "dpath_pixel",
        }
    }
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabelSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LabelSource::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown label source '{s}'")))
    }
}

/// On-disk element type of a volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    U8,
    Bool8,
    F32,
    F32x3,
}

impl Dtype {
    pub fn name(self) -> &'static str {
        match self {
            Dtype::U8 => "u8",
            Dtype::Bool8 => "bool8",
            Dtype::F32 => "f32",
            Dtype::F32x3 => "f32x3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "u8" => Some(Dtype::U8),
            "bool8" => Some(Dtype::Bool8),
            "f32" => Some(Dtype::F32),
            "f32x3" => Some(Dtype::F32x3),
            _ => None,
        }
    }

    pub fn element_size(self) -> usize {
        match self {
            Dtype::U8 | Dtype::Bool8 => 1,
            Dtype::F32 => 4,
            Dtype::F32x3 => 12,
        }
    }
}

/// Element type storable in a [`Volume`].
pub trait Voxel: Copy + PartialEq + fmt::Debug + Send + Sync + 'static {
    const DTYPE: Dtype;
    const KIND: &'static str;

    fn validate(&self, index: usize) -> Result<()>;

    fn encode(&self, out: &mut Vec<u8>);

    /// Decodes one element; `bytes` has exactly `DTYPE.element_size()` bytes.
    fn decode(bytes: &[u8], index: usize) -> Result<Self>;
}

impl Voxel for ClassId {
    const DTYPE: Dtype = Dtype::U8;
    const KIND: &'static str = "label";

    fn validate(&self, _index: usize) -> Result<()> {
        Ok(())
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.as_u8());
    }

    fn decode(bytes: &[u8], index: usize) -> Result<Self> {
        ClassId::from_u8(bytes[0]).ok_or(Error::InvalidClassValue {
            index,
            value: bytes[0],
        })
    }
}

impl Voxel for bool {
    const DTYPE: Dtype = Dtype::Bool8;
    const KIND: &'static str = "mask";

    fn validate(&self, _index: usize) -> Result<()> {
        Ok(())
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(*self as u8);
    }

    fn decode(bytes: &[u8], index: usize) -> Result<Self> {
        match bytes[0] {
            0 => Ok(false),
            1 => Ok(true),
            value => Err(Error::InvalidMaskValue { index, value }),
        }
    }
}

impl Voxel for f32 {
    const DTYPE: Dtype = Dtype::F32;
    const KIND: &'static str = "intensity";

    fn validate(&self, index: usize) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteValue { index })
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn decode(bytes: &[u8], index: usize) -> Result<Self> {
        let v = f32::from_le_bytes(bytes.try_into().expect("4-byte element"));
        v.validate(index)?;
        Ok(v)
    }
}

/// Class probabilities in (normal, indolent, aggressive) order.
impl Voxel for [f32; 3] {
    const DTYPE: Dtype = Dtype::F32x3;
    const KIND: &'static str = "probability";

    fn validate(&self, index: usize) -> Result<()> {
        if self.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        let sum: f32 = self.iter().sum();
        if self.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > SIMPLEX_TOLERANCE
        {
            return Err(Error::InvalidProbability {
                index,
                probs: *self,
            });
        }
        Ok(())
    }

    fn encode(&self, out: &mut Vec<u8>) {
        for p in self {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }

    fn decode(bytes: &[u8], index: usize) -> Result<Self> {
        let mut p = [0f32; 3];
        for (k, chunk) in bytes.chunks_exact(4).enumerate() {
            p[k] = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        }
        p.validate(index)?;
        Ok(p)
    }
}

/// Dense voxel data on a [`GridMeta`]. Immutable invariants are checked on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume<T> {
    meta: GridMeta,
    data: Vec<T>,
}

pub type LabelVolume = Volume<ClassId>;
pub type MaskVolume = Volume<bool>;
pub type IntensityVolume = Volume<f32>;
pub type ProbVolume = Volume<[f32; 3]>;

impl<T: Voxel> Volume<T> {
    pub fn new(meta: GridMeta, data: Vec<T>) -> Result<Self> {
        if data.len() != meta.len() {
            return Err(Error::SizeMismatch {
                expected: meta.len() * T::DTYPE.element_size(),
                actual: data.len() * T::DTYPE.element_size(),
            });
        }
        for (i, v) in data.iter().enumerate() {
            v.validate(i)?;
        }
        Ok(Self { meta, data })
    }

    pub fn filled(meta: GridMeta, value: T) -> Self {
        value.validate(0).expect("fill value must be valid");
        Self {
            meta,
            data: vec![value; meta.len()],
        }
    }

    pub fn from_fn(meta: GridMeta, mut f: impl FnMut(usize) -> T) -> Result<Self> {
        let data = (0..meta.len()).map(&mut f).collect();
        Self::new(meta, data)
    }
}

impl<T> Volume<T> {
    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> &T {
        &self.data[self.meta.index(x, y, z)]
    }

    pub(crate) fn from_parts_unchecked(meta: GridMeta, data: Vec<T>) -> Self {
        debug_assert_eq!(meta.len(), data.len());
        Self { meta, data }
    }

    pub fn same_grid<U>(&self, other: &Volume<U>) -> Result<()> {
        if self.meta == other.meta {
            Ok(())
        } else {
            Err(Error::MetaMismatch)
        }
    }
}

impl<T> std::ops::Index<usize> for Volume<T> {
    type Output = T;

    fn index(&self, index: usize) -> &T {
        &self.data[index]
    }
}

impl MaskVolume {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn foreground(&self) -> impl Iterator<Item = usize> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| v.then_some(i))
    }

    /// Mask centroid in continuous voxel coordinates.
    pub fn centroid(&self) -> Option<[f64; 3]> {
        let mut sum = [0f64; 3];
        let mut n = 0usize;
        for i in self.foreground() {
            let c = self.meta.coords(i);
            for k in 0..3 {
                sum[k] += c[k] as f64;
            }
            n += 1;
        }
        (n > 0).then(|| sum.map(|s| s / n as f64))
    }
}

impl LabelVolume {
    /// Voxels whose class belongs to `group`.
    pub fn binarize(&self, group: ClassGroup) -> MaskVolume {
        Volume::from_parts_unchecked(
            self.meta,
            self.data.iter().map(|&c| group.contains(c)).collect(),
        )
    }

    pub fn count_class(&self, class: ClassId) -> usize {
        self.data.iter().filter(|&&c| c == class).count()
    }
}

impl ProbVolume {
    /// Maximum-probability class per voxel; ties resolve to the lower class id.
    pub fn argmax(&self) -> LabelVolume {
        let data = self
            .data
            .iter()
            .map(|p| {
                let mut best = 0;
                for k in 1..3 {
                    if p[k] > p[best] {
                        best = k;
                    }
                }
                ClassId::ALL[best]
            })
            .collect();
        Volume::from_parts_unchecked(self.meta, data)
    }

    /// One-hot probabilities of a label volume.
    pub fn one_hot(labels: &LabelVolume) -> Self {
        let data = labels
            .data
            .iter()
            .map(|&c| {
                let mut p = [0f32; 3];
                p[c as usize] = 1.0;
                p
            })
            .collect();
        Volume::from_parts_unchecked(labels.meta, data)
    }
}

/// All volumes belonging to one patient. Every contained volume shares the
/// mask's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientCase {
    id: String,
    mask: MaskVolume,
    labels: BTreeMap<LabelSource, LabelVolume>,
    probs: BTreeMap<String, ProbVolume>,
    intensities: BTreeMap<String, IntensityVolume>,
}

impl PatientCase {
    pub fn new(id: impl Into<String>, mask: MaskVolume) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidParameter("patient id must be nonempty".into()));
        }
        Ok(Self {
            id,
            mask,
            labels: BTreeMap::new(),
            probs: BTreeMap::new(),
            intensities: BTreeMap::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn meta(&self) -> &GridMeta {
        self.mask.meta()
    }

    pub fn mask(&self) -> &MaskVolume {
        &self.mask
    }

    pub fn insert_label(&mut self, source: LabelSource, labels: LabelVolume) -> Result<()> {
        self.mask.same_grid(&labels)?;
        self.labels.insert(source, labels);
        Ok(())
    }

    pub fn label(&self, source: LabelSource) -> Option<&LabelVolume> {
        self.labels.get(&source)
    }

    pub fn require_label(&self, source: LabelSource) -> Result<&LabelVolume> {
        self.label(source).ok_or(Error::MissingLabelSource(source))
    }

    pub fn labels(&self) -> impl Iterator<Item = (LabelSource, &LabelVolume)> {
        self.labels.iter().map(|(&s, v)| (s, v))
    }

    pub fn insert_probs(&mut self, name: impl Into<String>, probs: ProbVolume) -> Result<()> {
        self.mask.same_grid(&probs)?;
        self.probs.insert(name.into(), probs);
        Ok(())
    }

    pub fn probs(&self, name: &str) -> Option<&ProbVolume> {
        self.probs.get(name)
    }

    pub fn prob_names(&self) -> impl Iterator<Item = &str> {
        self.probs.keys().map(String::as_str)
    }

    pub fn insert_intensity(
        &mut self,
        name: impl Into<String>,
        volume: IntensityVolume,
    ) -> Result<()> {
        self.mask.same_grid(&volume)?;
        self.intensities.insert(name.into(), volume);
        Ok(())
    }

    pub fn intensity(&self, name: &str) -> Option<&IntensityVolume> {
        self.intensities.get(name)
    }

    pub fn intensities(&self) -> impl Iterator<Item = (&str, &IntensityVolume)> {
        self.intensities.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn voxel_volume_products() {
        let unit = GridMeta::new([1, 1, 1], [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(unit.voxel_volume_mm3(), 1.0);
        let acquisition = GridMeta::new([1, 1, 1], [0.29, 0.29, 3.0]).unwrap();
        assert!((acquisition.voxel_volume_mm3() - 0.2523).abs() < 1e-12);
        let half = GridMeta::new([1, 1, 1], [0.5, 0.5, 4.0]).unwrap();
        assert_eq!(half.voxel_volume_mm3(), 1.0);
    }

    #[test]
    fn grid_rejects_bad_values() {
        assert!(GridMeta::new([0, 1, 1], [1.0; 3]).is_err());
        assert!(GridMeta::new([1, 1, 1], [1.0, 0.0, 1.0]).is_err());
        assert!(GridMeta::new([1, 1, 1], [1.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn index_coords_are_inverse() {
        let m = GridMeta::new([3, 4, 5], [1.0; 3]).unwrap();
        for i in 0..m.len() {
            let [x, y, z] = m.coords(i);
            assert_eq!(m.index(x, y, z), i);
        }
        assert_eq!(m.index(1, 0, 0), 1);
        assert_eq!(m.index(0, 1, 0), 3);
        assert_eq!(m.index(0, 0, 1), 12);
    }

    #[test]
    fn prob_volume_enforces_simplex() {
        let m = GridMeta::new([1, 1, 1], [1.0; 3]).unwrap();
        assert!(ProbVolume::new(m, vec![[0.5, 0.25, 0.25]]).is_ok());
        assert!(ProbVolume::new(m, vec![[0.5, 0.25, 0.2]]).is_err());
        assert!(ProbVolume::new(m, vec![[1.2, -0.1, -0.1]]).is_err());
        assert!(ProbVolume::new(m, vec![[0.999_995, 0.0, 0.0]]).is_ok());
    }

    #[test]
    fn case_rejects_mismatched_grids() {
        let a = GridMeta::new([2, 2, 1], [1.0; 3]).unwrap();
        let b = GridMeta::new([2, 2, 2], [1.0; 3]).unwrap();
        let mut case = PatientCase::new("p", MaskVolume::filled(a, true)).unwrap();
        assert!(matches!(
            case.insert_label(LabelSource::Rad, LabelVolume::filled(b, ClassId::Normal)),
            Err(Error::MetaMismatch)
        ));
        assert!(PatientCase::new("", MaskVolume::filled(a, true)).is_err());
    }

    #[test]
    fn group_membership() {
        assert!(ClassGroup::CancerVsAll.contains(ClassId::Indolent));
        assert!(ClassGroup::CancerVsAll.contains(ClassId::Aggressive));
        assert!(!ClassGroup::CancerVsAll.contains(ClassId::Normal));
        assert!(!ClassGroup::AggressiveVsAll.contains(ClassId::Indolent));
        assert!(!ClassGroup::IndolentVsAll.contains(ClassId::Aggressive));
        for g in ClassGroup::ALL {
            assert!(!g.classes().is_empty());
            assert_eq!(g.name().parse::<ClassGroup>().unwrap(), g);
        }
    }
}
