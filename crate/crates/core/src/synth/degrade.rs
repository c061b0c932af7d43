//! Label-source and prediction simulators. Each derives an imperfect copy of
//! the digital-pathology labels of one case.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::rng::stream;
use crate::error::{Error, Result};
use crate::lesions::{
    connected_components, erode, in_plane_disk, lesionset_to_labelvolume, Connectivity,
    LesionParams,
};
use crate::volume::{
    ClassGroup, ClassId, GridMeta, LabelSource, LabelVolume, MaskVolume, PatientCase, ProbVolume,
    Volume,
};

/// Radius of an injected false-positive blob (mm).
pub const FP_BLOB_RADIUS_MM: f64 = 3.0;
/// Range of the peak class probability painted into a false-positive blob.
pub const FP_STRENGTH: (f64, f64) = (0.6, 0.95);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradationSpec {
    /// Seed of every simulator stream; streams are further keyed by patient id.
    pub seed: u64,
    pub miss_prob: f64,
    pub erosion_mm: f64,
    pub slice_keep_prob: f64,
    pub fp_rate: f64,
    pub blur_mm: f64,
    pub noise_sigma: f64,
}

impl Default for DegradationSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            miss_prob: 0.15,
            erosion_mm: 1.0,
            slice_keep_prob: 0.6,
            fp_rate: 0.5,
            blur_mm: 1.0,
            noise_sigma: 0.1,
        }
    }
}

impl DegradationSpec {
    /// Parameters under which every simulator returns its input unchanged.
    pub fn identity(seed: u64) -> Self {
        Self {
            seed,
            miss_prob: 0.0,
            erosion_mm: 0.0,
            slice_keep_prob: 1.0,
            fp_rate: 0.0,
            blur_mm: 0.0,
            noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !prob(self.miss_prob) || !prob(self.slice_keep_prob) {
            return Err(Error::InvalidParameter(
                "miss_prob and slice_keep_prob must lie within [0, 1]".into(),
            ));
        }
        if ![self.erosion_mm, self.fp_rate, self.blur_mm, self.noise_sigma]
            .into_iter()
            .all(nonneg)
        {
            return Err(Error::InvalidParameter(
                "erosion_mm, fp_rate, blur_mm and noise_sigma must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("degrade_seed", self.seed.to_string()),
            ("miss_prob", self.miss_prob.to_string()),
            ("erosion_mm", self.erosion_mm.to_string()),
            ("slice_keep_prob", self.slice_keep_prob.to_string()),
            ("fp_rate", self.fp_rate.to_string()),
            ("blur_mm", self.blur_mm.to_string()),
            ("noise_sigma", self.noise_sigma.to_string()),
        ]
    }
}

/// Lesion-level digital-pathology labels: closing, component filtering and
/// grading of the pixel grade map.
pub fn derive_dpath_lesion(case: &PatientCase, params: &LesionParams) -> Result<LabelVolume> {
    let pixel = case.require_label(LabelSource::DPathPixel)?;
    let set = params.extract(pixel, ClassGroup::CancerVsAll)?;
    lesionset_to_labelvolume(&set)
}

/// 26-connected cancer components, each a sorted voxel list.
fn cancer_components(labels: &LabelVolume) -> Vec<Vec<usize>> {
    connected_components(&labels.binarize(ClassGroup::CancerVsAll), Connectivity::TwentySix)
        .components()
}

/// Pathologist analog: every lesion slice of the DPathLesion labels is kept
/// with `slice_keep_prob`; a lesion losing all slices keeps one at random.
pub fn simulate_pathologist(case: &PatientCase, spec: &DegradationSpec) -> Result<LabelVolume> {
    spec.validate()?;
    let source = case.require_label(LabelSource::DPathLesion)?;
    let meta = *source.meta();
    let mut rng = stream(spec.seed, case.id(), "pathologist");
    let mut out = vec![ClassId::Normal; meta.len()];
    for lesion in cancer_components(source) {
        let mut slices: Vec<usize> = lesion.iter().map(|&v| meta.coords(v)[2]).collect();
        slices.sort_unstable();
        slices.dedup();
        let mut kept: Vec<usize> = slices
            .iter()
            .copied()
            .filter(|_| rng.random_bool(spec.slice_keep_prob))
            .collect();
        if kept.is_empty() {
            kept.push(*slices.choose(&mut rng).expect("lesion has a slice"));
        }
        for &v in &lesion {
            if kept.contains(&meta.coords(v)[2]) {
                out[v] = source[v];
            }
        }
    }
    Volume::new(meta, out)
}

/// Radiologist analog: each DPathLesion lesion is missed with `miss_prob`;
/// the rest are eroded in-plane by `erosion_mm`.
pub fn simulate_radiologist(case: &PatientCase, spec: &DegradationSpec) -> Result<LabelVolume> {
    spec.validate()?;
    let source = case.require_label(LabelSource::DPathLesion)?;
    let meta = *source.meta();
    let disk = in_plane_disk(&meta, spec.erosion_mm)?;
    let mut rng = stream(spec.seed, case.id(), "radiologist");
    let mut out = vec![ClassId::Normal; meta.len()];
    for lesion in cancer_components(source) {
        if rng.random_bool(spec.miss_prob) {
            continue;
        }
        let mut mask = vec![false; meta.len()];
        for &v in &lesion {
            mask[v] = true;
        }
        let eroded = erode(&Volume::new(meta, mask)?, &disk);
        for v in eroded.foreground() {
            out[v] = source[v];
        }
    }
    Volume::new(meta, out)
}

/// Normalized 1D Gaussian kernel truncated at 3 sigma.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let r = (3.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-r..=r)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Separable blur of one channel along each axis, edges replicated.
fn blur_channel(meta: &GridMeta, data: &mut [f64], sigma_vox: [f64; 3]) {
    let dims = meta.dims();
    let strides = [1, dims[0], dims[0] * dims[1]];
    for axis in 0..3 {
        let kernel = gaussian_kernel(sigma_vox[axis]);
        if kernel.len() == 1 {
            continue;
        }
        let r = (kernel.len() / 2) as i64;
        let n = dims[axis] as i64;
        let src = data.to_vec();
        for (i, out) in data.iter_mut().enumerate() {
            let c = meta.coords(i)[axis] as i64;
            let base = i as i64 - c * strides[axis] as i64;
            *out = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let p = (c + k as i64 - r).clamp(0, n - 1);
                    w * src[(base + p * strides[axis] as i64) as usize]
                })
                .sum();
        }
    }
}

/// Voxels within the box `[-reach, reach]` of any voxel of `voxels`.
fn box_dilate(meta: &GridMeta, voxels: &[usize], reach: [i32; 3]) -> Vec<usize> {
    let mut hit = vec![false; meta.len()];
    for &v in voxels {
        let c = meta.coords(v);
        for dz in -reach[2]..=reach[2] {
            for dy in -reach[1]..=reach[1] {
                for dx in -reach[0]..=reach[0] {
                    if let Some(j) = meta.offset_index(c, [dx, dy, dz]) {
                        hit[j] = true;
                    }
                }
            }
        }
    }
    (0..meta.len()).filter(|&i| hit[i]).collect()
}

/// Synthetic model output. Starting from the one-hot DPathPixel labels:
/// Gaussian blur (`blur_mm`), clipped Gaussian noise (`noise_sigma`), removal
/// of the cancer mass around each lesion with `miss_prob`, Poisson(`fp_rate`)
/// false-positive blobs inside the prostate, then renormalization. Voxels
/// outside the prostate are always (1, 0, 0).
pub fn simulate_predictions(case: &PatientCase, spec: &DegradationSpec) -> Result<ProbVolume> {
    spec.validate()?;
    let labels = case.require_label(LabelSource::DPathPixel)?;
    let meta = *labels.meta();
    let spacing = meta.spacing();
    let mask: &MaskVolume = case.mask();

    let mut channels: [Vec<f64>; 3] = std::array::from_fn(|c| {
        labels
            .data()
            .iter()
            .map(|&l| if l.as_u8() as usize == c { 1.0 } else { 0.0 })
            .collect()
    });

    let sigma_vox = spacing.map(|s| spec.blur_mm / s);
    for ch in channels.iter_mut() {
        blur_channel(&meta, ch, sigma_vox);
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = stream(spec.seed, case.id(), "prediction_noise");
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        for i in 0..meta.len() {
            for ch in channels.iter_mut() {
                let z: f64 = unit.sample(&mut rng);
                ch[i] = (ch[i] + spec.noise_sigma * z).clamp(0.0, 1.0);
            }
        }
    }

    if spec.miss_prob > 0.0 {
        let mut rng = stream(spec.seed, case.id(), "prediction_miss");
        let reach = sigma_vox.map(|s| (3.0 * s).ceil() as i32);
        for lesion in cancer_components(labels) {
            if !rng.random_bool(spec.miss_prob) {
                continue;
            }
            for v in box_dilate(&meta, &lesion, reach) {
                channels[1][v] = 0.0;
                channels[2][v] = 0.0;
            }
        }
    }

    if spec.fp_rate > 0.0 {
        let mut rng = stream(spec.seed, case.id(), "prediction_fp");
        let n_blobs = Poisson::new(spec.fp_rate)
            .map_err(|e| Error::InvalidParameter(format!("fp_rate: {e}")))?
            .sample(&mut rng) as usize;
        let inside: Vec<usize> = mask.foreground().collect();
        for _ in 0..n_blobs {
            let Some(&center) = inside.choose(&mut rng) else {
                break;
            };
            let class = if rng.random_bool(0.5) { 2 } else { 1 };
            let strength = rng.random_range(FP_STRENGTH.0..=FP_STRENGTH.1);
            let c = meta.coords(center);
            for &v in &inside {
                let p = meta.coords(v);
                let d2: f64 = (0..3)
                    .map(|k| ((p[k] as f64 - c[k] as f64) * spacing[k]).powi(2))
                    .sum();
                if d2 <= FP_BLOB_RADIUS_MM * FP_BLOB_RADIUS_MM {
                    channels[class][v] = channels[class][v].max(strength);
                }
            }
        }
    }

    let data = (0..meta.len())
        .map(|i| {
            if !mask[i] {
                return [1.0, 0.0, 0.0];
            }
            let p = [channels[0][i], channels[1][i], channels[2][i]];
            let s: f64 = p.iter().sum();
            if s > 0.0 {
                p.map(|x| (x / s) as f32)
            } else {
                [1.0, 0.0, 0.0]
            }
        })
        .collect();
    Volume::new(meta, data)
}
