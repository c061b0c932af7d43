//! Intensity standardization, z-score normalization and resampling.

mod landmarks;
mod resample;

pub use landmarks::{
    default_percentiles, fit_landmarks, percentiles_of, standardize, LandmarkTable, OUTPUT_RANGE,
    STANDARD_MAX, STANDARD_MIN,
};
pub use resample::{
    resample_crop, Interpolation, Resample, ResampleParams, DEFAULT_SIZE_XY, DEFAULT_SPACING_XY,
};

use crate::error::{Error, Result};
use crate::volume::{IntensityVolume, MaskVolume, Volume};

/// Mean and population standard deviation of the in-scope voxels.
pub fn scoped_moments(vol: &IntensityVolume, mask: Option<&MaskVolume>) -> Result<(f64, f64)> {
    let values = landmarks::scoped_values(vol, mask)?;
    if values.len() < 2 {
        return Err(Error::DegenerateIntensities(
            "fewer than two voxels in scope".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|&v| (v as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    Ok((mean, var.sqrt()))
}

/// `(v - mean) / std` with statistics from the in-scope voxels (population
/// std); voxels outside the mask get the same affine map.
pub fn zscore(vol: &IntensityVolume, mask: Option<&MaskVolume>) -> Result<IntensityVolume> {
    let (mean, std) = scoped_moments(vol, mask)?;
    if std.is_nan() || std <= 0.0 {
        return Err(Error::DegenerateIntensities(
            "zero intensity variance".into(),
        ));
    }
    let data = vol
        .data()
        .iter()
        .map(|&v| ((v as f64 - mean) / std) as f32)
        .collect();
    Volume::new(*vol.meta(), data)
}
