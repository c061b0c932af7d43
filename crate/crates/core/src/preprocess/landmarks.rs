//! Piecewise-linear histogram landmark standardization.
//!
//! Each volume's intensity percentiles are mapped onto a standard scale
//! learned from a training cohort. Percentiles are taken as order statistics
//! (nearest rank), so a monotone map of the intensities moves every
//! percentile exactly with it.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kv;
use crate::volume::{IntensityVolume, MaskVolume, Volume};

pub const STANDARD_MIN: f64 = 0.0;
pub const STANDARD_MAX: f64 = 100.0;
/// Standardized outputs are clamped to this range.
pub const OUTPUT_RANGE: (f64, f64) = (-10.0, 110.0);

pub fn default_percentiles() -> Vec<f64> {
    let mut p = vec![1.0];
    p.extend((1..=9).map(|k| 10.0 * k as f64));
    p.push(99.0);
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkTable {
    percentiles: Vec<f64>,
    standard_values: Vec<f64>,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl LandmarkTable {
    pub fn new(percentiles: Vec<f64>, standard_values: Vec<f64>) -> Result<Self> {
        if percentiles.len() < 2 || percentiles.len() != standard_values.len() {
            return Err(Error::InvalidParameter(
                "landmark table needs at least two matched percentiles".into(),
            ));
        }
        if !strictly_increasing(&percentiles)
            || percentiles.iter().any(|&p| !(p > 0.0 && p < 100.0))
        {
            return Err(Error::InvalidParameter(
                "percentiles must be strictly increasing within (0, 100)".into(),
            ));
        }
        if !strictly_increasing(&standard_values) || standard_values.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter(
                "standard values must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self {
            percentiles,
            standard_values,
        })
    }

    pub fn percentiles(&self) -> &[f64] {
        &self.percentiles
    }

    pub fn standard_values(&self) -> &[f64] {
        &self.standard_values
    }

    pub fn to_text(&self) -> String {
        kv::render([
            ("percentiles", kv::join_f64(&self.percentiles)),
            ("standard_values", kv::join_f64(&self.standard_values)),
        ])
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let pairs = kv::parse(text).map_err(Error::InvalidParameter)?;
        let get = |key: &str| -> Result<Vec<f64>> {
            let v = pairs
                .iter()
                .find(|(k, _)| k == key)
                .ok_or_else(|| Error::InvalidParameter(format!("missing key '{key}'")))?;
            kv::split_f64(&v.1).map_err(Error::InvalidParameter)
        };
        if let Some((k, _)) = pairs
            .iter()
            .find(|(k, _)| k != "percentiles" && k != "standard_values")
        {
            return Err(Error::InvalidParameter(format!("unknown key '{k}'")));
        }
        Self::new(get("percentiles")?, get("standard_values")?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Intensities inside `mask`, or the whole volume.
pub(crate) fn scoped_values(vol: &IntensityVolume, mask: Option<&MaskVolume>) -> Result<Vec<f32>> {
    match mask {
        None => Ok(vol.data().to_vec()),
        Some(m) => {
            vol.same_grid(m)?;
            Ok(m.foreground().map(|i| vol[i]).collect())
        }
    }
}

/// Order-statistic percentiles: rank `round(p/100 · (n−1))` of the sorted
/// values.
pub fn percentiles_of(values: &[f32], percentiles: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::DegenerateIntensities("no voxels in scope".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f32::total_cmp);
    let last = (sorted.len() - 1) as f64;
    Ok(percentiles
        .iter()
        .map(|&p| sorted[(p / 100.0 * last).round() as usize] as f64)
        .collect())
}

fn checked_span(landmarks: &[f64]) -> Result<(f64, f64)> {
    let lo = landmarks[0];
    let hi = *landmarks.last().expect("nonempty");
    if hi <= lo {
        return Err(Error::DegenerateIntensities(format!(
            "lowest and highest landmarks coincide at {lo}"
        )));
    }
    Ok((lo, hi))
}

/// Averages each volume's percentile vector after mapping its lowest and
/// highest landmark to 0 and 100.
pub fn fit_landmarks(
    cohort: &[IntensityVolume],
    masks: Option<&[MaskVolume]>,
    percentiles: &[f64],
) -> Result<LandmarkTable> {
    if cohort.is_empty() {
        return Err(Error::EmptyCohort);
    }
    if masks.is_some_and(|m| m.len() != cohort.len()) {
        return Err(Error::InvalidParameter(
            "need one mask per cohort volume".into(),
        ));
    }
    let mut sum = vec![0f64; percentiles.len()];
    for (k, vol) in cohort.iter().enumerate() {
        let values = scoped_values(vol, masks.map(|m| &m[k]))?;
        let lm = percentiles_of(&values, percentiles)?;
        let (lo, hi) = checked_span(&lm)?;
        for (s, v) in sum.iter_mut().zip(&lm) {
            *s += STANDARD_MIN + (v - lo) / (hi - lo) * (STANDARD_MAX - STANDARD_MIN);
        }
    }
    let n = cohort.len() as f64;
    let standard: Vec<f64> = sum.into_iter().map(|s| s / n).collect();
    if !strictly_increasing(&standard) {
        return Err(Error::DegenerateIntensities(
            "averaged landmarks are not strictly increasing".into(),
        ));
    }
    LandmarkTable::new(percentiles.to_vec(), standard)
}

/// Piecewise-linear map through `(from[k], to[k])`, extrapolated from the
/// end segments. `from` is non-decreasing with `from[0] < from[last]`.
struct PiecewiseLinear {
    from: Vec<f64>,
    to: Vec<f64>,
}

impl PiecewiseLinear {
    fn new(from: &[f64], to: &[f64]) -> Self {
        let mut f = vec![from[0]];
        let mut t = vec![to[0]];
        for (&a, &b) in from.iter().zip(to).skip(1) {
            if a > *f.last().unwrap() {
                f.push(a);
                t.push(b);
            }
        }
        Self { from: f, to: t }
    }

    fn apply(&self, v: f64) -> f64 {
        let n = self.from.len();
        let seg = self.from.partition_point(|&x| x <= v).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.from[seg], self.from[seg + 1]);
        let (y0, y1) = (self.to[seg], self.to[seg + 1]);
        y0 + (v - x0) * (y1 - y0) / (x1 - x0)
    }
}

/// Maps the volume's own percentiles (within `mask` if given) onto the
/// table's standard values; the map is applied to every voxel and clamped to
/// [`OUTPUT_RANGE`].
pub fn standardize(
    vol: &IntensityVolume,
    table: &LandmarkTable,
    mask: Option<&MaskVolume>,
) -> Result<IntensityVolume> {
    let values = scoped_values(vol, mask)?;
    let src = percentiles_of(&values, table.percentiles())?;
    checked_span(&src)?;
    let map = PiecewiseLinear::new(&src, table.standard_values());
    let (lo, hi) = OUTPUT_RANGE;
    let data = vol
        .data()
        .iter()
        .map(|&v| map.apply(v as f64).clamp(lo, hi) as f32)
        .collect();
    Volume::new(*vol.meta(), data)
}
