//! Seeded ellipsoidal prostate phantoms with graded lesions and two
//! intensity channels.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::rng::stream;
use crate::error::{Error, Result};
use crate::kv;
use crate::volume::{
    ClassId, GridMeta, IntensityVolume, LabelSource, LabelVolume, MaskVolume, PatientCase, Volume,
};

/// Attempts per lesion before the phantom is declared infeasible.
pub const PLACEMENT_ATTEMPTS: usize = 100;
/// Lesions keep out of each other's ellipsoid grown by this much (mm).
const LESION_GAP_MM: f64 = 2.0;
/// Lesions stay this far inside the prostate surface (mm).
const CAPSULE_MARGIN_MM: f64 = 0.5;

pub const T2_CHANNEL: &str = "t2";
pub const ADC_CHANNEL: &str = "adc";

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.hi > self.lo {
            rng.random_range(self.lo..=self.hi)
        } else {
            self.lo
        }
    }

    fn render(&self) -> String {
        kv::join_f64(&[self.lo, self.hi])
    }
}

/// Per-channel intensity levels: outside the gland, normal gland, indolent
/// and aggressive tissue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelLevels {
    pub outside: f64,
    pub normal: f64,
    pub indolent: f64,
    pub aggressive: f64,
}

const T2_LEVELS: ChannelLevels = ChannelLevels {
    outside: 40.0,
    normal: 100.0,
    indolent: 80.0,
    aggressive: 65.0,
};

const ADC_LEVELS: ChannelLevels = ChannelLevels {
    outside: 1800.0,
    normal: 1500.0,
    indolent: 1200.0,
    aggressive: 900.0,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub master_seed: u64,
    pub n_patients: usize,
    pub grid: GridMeta,
    /// Prostate semi-axes along x, y, z (mm).
    pub prostate_semi_axes_mm: [Span; 3],
    /// Inclusive range of lesion counts.
    pub lesions_per_patient: (usize, usize),
    pub lesion_radius_mm: Span,
    /// Fraction of each lesion's voxels that are aggressive.
    pub aggressive_fraction: Span,
    /// Scales the lesion-to-gland intensity difference.
    pub contrast: f64,
    /// Noise standard deviation relative to the normal-gland level.
    pub noise_sigma: f64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            master_seed: 42,
            n_patients: 40,
            grid: GridMeta::new([96, 96, 16], [0.5, 0.5, 3.0]).expect("valid default grid"),
            prostate_semi_axes_mm: [Span::new(20.0, 23.0), Span::new(18.0, 21.0), Span::new(19.0, 22.0)],
            lesions_per_patient: (1, 3),
            lesion_radius_mm: Span::new(4.0, 9.0),
            aggressive_fraction: Span::new(0.0, 1.0),
            contrast: 1.0,
            noise_sigma: 0.05,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.n_patients == 0 {
            return bad("n_patients must be >= 1");
        }
        let positive = |s: &Span| s.lo > 0.0 && s.hi >= s.lo && s.hi.is_finite();
        if !self.prostate_semi_axes_mm.iter().all(positive) {
            return bad("prostate semi-axis ranges must be positive and nonempty");
        }
        if !positive(&self.lesion_radius_mm) {
            return bad("lesion radius range must be positive and nonempty");
        }
        let (lo, hi) = self.lesions_per_patient;
        if lo > hi {
            return bad("lesions_per_patient range is empty");
        }
        let f = self.aggressive_fraction;
        if !(0.0 <= f.lo && f.lo <= f.hi && f.hi <= 1.0) {
            return bad("aggressive_fraction must lie within [0, 1]");
        }
        if !(self.contrast.is_finite() && self.contrast >= 0.0)
            || !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0)
        {
            return bad("contrast and noise_sigma must be finite and non-negative");
        }
        Ok(())
    }

    /// `key = value` echo for manifests.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let [nx, ny, nz] = self.grid.dims();
        let [ax, ay, az] = self.prostate_semi_axes_mm;
        vec![
            ("seed", self.master_seed.to_string()),
            ("n_patients", self.n_patients.to_string()),
            ("dims", format!("{nx} {ny} {nz}")),
            ("spacing_mm", kv::join_f64(&self.grid.spacing())),
            ("prostate_semi_axis_x_mm", ax.render()),
            ("prostate_semi_axis_y_mm", ay.render()),
            ("prostate_semi_axis_z_mm", az.render()),
            (
                "lesions_per_patient",
                format!("{} {}", self.lesions_per_patient.0, self.lesions_per_patient.1),
            ),
            ("lesion_radius_mm", self.lesion_radius_mm.render()),
            ("aggressive_fraction", self.aggressive_fraction.render()),
            ("contrast", self.contrast.to_string()),
            ("noise_sigma", self.noise_sigma.to_string()),
        ]
    }
}

pub fn patient_id(index: usize) -> String {
    format!("case{index:04}")
}

/// Physical position (mm) of a voxel centre.
fn position(meta: &GridMeta, index: usize) -> [f64; 3] {
    let c = meta.coords(index);
    let s = meta.spacing();
    [c[0] as f64 * s[0], c[1] as f64 * s[1], c[2] as f64 * s[2]]
}

fn inside_ellipsoid(p: [f64; 3], center: [f64; 3], semi: [f64; 3]) -> bool {
    (0..3)
        .map(|k| ((p[k] - center[k]) / semi[k]).powi(2))
        .sum::<f64>()
        <= 1.0
}

/// Voxels whose centres fall inside the ellipsoid, scanning only its
/// bounding box.
fn ellipsoid_voxels(meta: &GridMeta, center: [f64; 3], semi: [f64; 3]) -> Vec<usize> {
    let s = meta.spacing();
    let dims = meta.dims();
    let range = |k: usize| {
        let lo = ((center[k] - semi[k]) / s[k]).ceil().max(0.0) as usize;
        let hi = ((center[k] + semi[k]) / s[k]).floor();
        let hi = if hi < 0.0 { 0 } else { (hi as usize + 1).min(dims[k]) };
        lo..hi.max(lo)
    };
    let mut out = Vec::new();
    for z in range(2) {
        for y in range(1) {
            for x in range(0) {
                let i = meta.index(x, y, z);
                if inside_ellipsoid(position(meta, i), center, semi) {
                    out.push(i);
                }
            }
        }
    }
    out
}

struct Placed {
    center: [f64; 3],
    semi: [f64; 3],
}

fn grown(semi: [f64; 3], by: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|k| semi[k] + by[k])
}

/// One placement try for a lesion with semi-axes `semi`. The centre is drawn
/// from voxel centres deep enough inside the prostate and outside every
/// placed lesion grown by this lesion and the gap, then checked voxel by
/// voxel.
fn place_lesion(
    rng: &mut ChaCha8Rng,
    meta: &GridMeta,
    mask: &MaskVolume,
    prostate_center: [f64; 3],
    prostate_semi: [f64; 3],
    semi: [f64; 3],
    placed: &[Placed],
) -> Option<([f64; 3], Vec<usize>)> {
    let room: [f64; 3] =
        std::array::from_fn(|k| prostate_semi[k] - semi[k] - CAPSULE_MARGIN_MM);
    if room.iter().any(|&r| r < 0.0) {
        return None;
    }
    let clear = |p: [f64; 3], extra: [f64; 3]| {
        placed
            .iter()
            .all(|o| !inside_ellipsoid(p, o.center, grown(o.semi, extra)))
    };
    let reach = grown(semi, [LESION_GAP_MM; 3]);
    let candidates: Vec<usize> = ellipsoid_voxels(meta, prostate_center, room)
        .into_iter()
        .filter(|&i| clear(position(meta, i), reach))
        .collect();
    let &c = candidates.choose(rng)?;
    let center = position(meta, c);
    let voxels = ellipsoid_voxels(meta, center, semi);
    let ok = !voxels.is_empty()
        && voxels
            .iter()
            .all(|&i| mask[i] && clear(position(meta, i), [LESION_GAP_MM; 3]));
    ok.then_some((center, voxels))
}

/// Places all lesions, largest first. A failed lesion restarts the whole
/// layout; gives up after [`PLACEMENT_ATTEMPTS`] layouts.
fn place_all(
    rng: &mut ChaCha8Rng,
    meta: &GridMeta,
    mask: &MaskVolume,
    prostate_center: [f64; 3],
    prostate_semi: [f64; 3],
    semis: &[[f64; 3]],
) -> Option<Vec<([f64; 3], Vec<usize>)>> {
    'attempt: for _ in 0..PLACEMENT_ATTEMPTS {
        let mut placed = Vec::new();
        let mut out = Vec::new();
        for &semi in semis {
            let Some((center, voxels)) =
                place_lesion(rng, meta, mask, prostate_center, prostate_semi, semi, &placed)
            else {
                continue 'attempt;
            };
            placed.push(Placed { center, semi });
            out.push((center, voxels));
        }
        return Some(out);
    }
    None
}

/// Marks the `fraction` of `voxels` lying furthest along a random direction
/// as aggressive, the rest indolent.
fn paint_mixture(
    rng: &mut ChaCha8Rng,
    meta: &GridMeta,
    voxels: &[usize],
    center: [f64; 3],
    fraction: f64,
    labels: &mut [ClassId],
) {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let dir: [f64; 3] = [normal.sample(rng), normal.sample(rng), normal.sample(rng)];
    let mut ranked: Vec<(f64, usize)> = voxels
        .iter()
        .map(|&i| {
            let p = position(meta, i);
            ((0..3).map(|k| (p[k] - center[k]) * dir[k]).sum(), i)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let n_agg = (fraction * voxels.len() as f64).round() as usize;
    for (rank, &(_, i)) in ranked.iter().enumerate() {
        labels[i] = if rank < n_agg {
            ClassId::Aggressive
        } else {
            ClassId::Indolent
        };
    }
}

fn channel(
    rng: &mut ChaCha8Rng,
    mask: &MaskVolume,
    labels: &LabelVolume,
    levels: ChannelLevels,
    spec: &PhantomSpec,
) -> Result<IntensityVolume> {
    let sigma = spec.noise_sigma * levels.normal;
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let data = (0..labels.len())
        .map(|i| {
            let base = if !mask[i] {
                levels.outside
            } else {
                let target = match labels[i] {
                    ClassId::Normal => levels.normal,
                    ClassId::Indolent => levels.indolent,
                    ClassId::Aggressive => levels.aggressive,
                };
                levels.normal + spec.contrast * (target - levels.normal)
            };
            let n = if sigma > 0.0 { noise.sample(rng) } else { 0.0 };
            (base + n) as f32
        })
        .collect();
    Volume::new(*labels.meta(), data)
}

/// Generates patient `index` of the cohort described by `spec`. The result
/// depends only on `(spec, index)`.
pub fn generate_phantom(spec: &PhantomSpec, index: usize) -> Result<PatientCase> {
    spec.validate()?;
    let id = patient_id(index);
    let mut rng = stream(spec.master_seed, &index.to_string(), "phantom");
    let meta = spec.grid;
    let [nx, ny, nz] = meta.dims();
    let s = meta.spacing();

    let prostate_semi = spec.prostate_semi_axes_mm.map(|a| a.sample(&mut rng));
    let fov_center = [
        (nx - 1) as f64 * s[0] / 2.0,
        (ny - 1) as f64 * s[1] / 2.0,
        (nz - 1) as f64 * s[2] / 2.0,
    ];
    let jitter = 0.5;
    let prostate_center = [
        fov_center[0] + rng.random_range(-jitter..=jitter),
        fov_center[1] + rng.random_range(-jitter..=jitter),
        fov_center[2],
    ];
    let mask = Volume::from_fn(meta, |i| {
        inside_ellipsoid(position(&meta, i), prostate_center, prostate_semi)
    })?;
    if mask.count() == 0 {
        return Err(Error::SpecInfeasible(format!("{id}: empty prostate")));
    }

    let (lo, hi) = spec.lesions_per_patient;
    let n_lesions = rng.random_range(lo..=hi);
    let mut radii: Vec<f64> = (0..n_lesions)
        .map(|_| spec.lesion_radius_mm.sample(&mut rng))
        .collect();
    radii.sort_by(|a, b| b.total_cmp(a));

    let semis: Vec<[f64; 3]> = radii
        .iter()
        .map(|&r| [r * rng.random_range(0.9..=1.1), r * rng.random_range(0.9..=1.1), r])
        .collect();
    let layout = place_all(&mut rng, &meta, &mask, prostate_center, prostate_semi, &semis)
        .ok_or_else(|| {
            let sizes: Vec<String> = radii.iter().map(|r| format!("{r:.2}")).collect();
            Error::SpecInfeasible(format!(
                "{id}: lesions of radius [{}] mm do not fit after {PLACEMENT_ATTEMPTS} attempts",
                sizes.join(", ")
            ))
        })?;

    let mut labels = vec![ClassId::Normal; meta.len()];
    for (center, voxels) in layout {
        let fraction = spec.aggressive_fraction.sample(&mut rng);
        paint_mixture(&mut rng, &meta, &voxels, center, fraction, &mut labels);
    }
    let labels = Volume::new(meta, labels)?;

    let mut case = PatientCase::new(id, mask)?;
    let mut noise_rng = stream(spec.master_seed, &index.to_string(), "intensity");
    let t2 = channel(&mut noise_rng, case.mask(), &labels, T2_LEVELS, spec)?;
    let adc = channel(&mut noise_rng, case.mask(), &labels, ADC_LEVELS, spec)?;
    case.insert_label(LabelSource::DPathPixel, labels)?;
    case.insert_intensity(T2_CHANNEL, t2)?;
    case.insert_intensity(ADC_CHANNEL, adc)?;
    Ok(case)
}
