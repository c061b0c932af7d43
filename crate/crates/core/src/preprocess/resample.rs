//! In-plane resampling and cropping to a fixed field of view.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::volume::{ClassId, GridMeta, Volume, Voxel};

pub const DEFAULT_SPACING_XY: [f64; 2] = [0.29, 0.29];
pub const DEFAULT_SIZE_XY: [usize; 2] = [224, 224];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Nearest,
    Linear,
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpolation::Nearest => "nearest",
            Interpolation::Linear => "linear",
        })
    }
}

impl FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Interpolation::Nearest),
            "linear" => Ok(Interpolation::Linear),
            _ => Err(Error::InvalidParameter(format!("unknown interpolation '{s}'"))),
        }
    }
}

/// Element types that can be resampled.
pub trait Resample: Voxel {
    /// Value used for padding outside the input field of view.
    fn background() -> Self;

    /// Weighted blend of neighbours; `None` for categorical types.
    fn blend(samples: &[(Self, f64)]) -> Option<Self>;
}

impl Resample for ClassId {
    fn background() -> Self {
        ClassId::Normal
    }

    fn blend(_: &[(Self, f64)]) -> Option<Self> {
        None
    }
}

impl Resample for bool {
    fn background() -> Self {
        false
    }

    fn blend(_: &[(Self, f64)]) -> Option<Self> {
        None
    }
}

impl Resample for f32 {
    fn background() -> Self {
        0.0
    }

    fn blend(samples: &[(Self, f64)]) -> Option<Self> {
        Some(samples.iter().map(|&(v, w)| v as f64 * w).sum::<f64>() as f32)
    }
}

impl Resample for [f32; 3] {
    fn background() -> Self {
        [1.0, 0.0, 0.0]
    }

    fn blend(samples: &[(Self, f64)]) -> Option<Self> {
        let mut acc = [0f64; 3];
        for &(p, w) in samples {
            for k in 0..3 {
                acc[k] += p[k] as f64 * w;
            }
        }
        let sum: f64 = acc.iter().sum();
        Some(acc.map(|a| (a / sum) as f32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleParams {
    pub spacing_xy: [f64; 2],
    pub size_xy: [usize; 2],
    pub mode: Interpolation,
}

impl Default for ResampleParams {
    fn default() -> Self {
        Self {
            spacing_xy: DEFAULT_SPACING_XY,
            size_xy: DEFAULT_SIZE_XY,
            mode: Interpolation::Nearest,
        }
    }
}

/// Output sample positions along one axis, in input voxel coordinates.
fn axis_positions(center: f64, n_out: usize, out_spacing: f64, in_spacing: f64) -> Vec<f64> {
    let mid = (n_out as f64 - 1.0) / 2.0;
    (0..n_out)
        .map(|j| center + (j as f64 - mid) * out_spacing / in_spacing)
        .collect()
}

/// Resamples each slice to `params.spacing_xy` on a `params.size_xy` grid
/// centred on `center` (input voxel coordinates, x and y). Samples falling
/// outside the input footprint are padded with the background value; z is
/// untouched.
pub fn resample_crop<T: Resample>(
    vol: &Volume<T>,
    center: [f64; 2],
    params: &ResampleParams,
) -> Result<Volume<T>> {
    let categorical = T::blend(&[]).is_none();
    if categorical && params.mode == Interpolation::Linear {
        return Err(Error::ModeMismatch);
    }
    let in_meta = vol.meta();
    let [nx, ny, nz] = in_meta.dims();
    let [sx, sy, sz] = in_meta.spacing();
    let [ox, oy] = params.size_xy;
    let out_meta = GridMeta::new([ox, oy, nz], [params.spacing_xy[0], params.spacing_xy[1], sz])?;
    if !center.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidParameter("resample center must be finite".into()));
    }

    let xs = axis_positions(center[0], ox, params.spacing_xy[0], sx);
    let ys = axis_positions(center[1], oy, params.spacing_xy[1], sy);
    let inside = |u: f64, n: usize| u >= -0.5 && u < n as f64 - 0.5;

    let mut data = Vec::with_capacity(out_meta.len());
    for z in 0..nz {
        for &v in &ys {
            for &u in &xs {
                if !inside(u, nx) || !inside(v, ny) {
                    data.push(T::background());
                    continue;
                }
                let value = match params.mode {
                    Interpolation::Nearest => {
                        let x = (u.round() as usize).min(nx - 1);
                        let y = (v.round() as usize).min(ny - 1);
                        *vol.at(x, y, z)
                    }
                    Interpolation::Linear => {
                        let u = u.clamp(0.0, (nx - 1) as f64);
                        let v = v.clamp(0.0, (ny - 1) as f64);
                        let (x0, y0) = (u.floor() as usize, v.floor() as usize);
                        let (x1, y1) = ((x0 + 1).min(nx - 1), (y0 + 1).min(ny - 1));
                        let (wx, wy) = (u - x0 as f64, v - y0 as f64);
                        T::blend(&[
                            (*vol.at(x0, y0, z), (1.0 - wx) * (1.0 - wy)),
                            (*vol.at(x1, y0, z), wx * (1.0 - wy)),
                            (*vol.at(x0, y1, z), (1.0 - wx) * wy),
                            (*vol.at(x1, y1, z), wx * wy),
                        ])
                        .expect("continuous voxel type")
                    }
                };
                data.push(value);
            }
        }
    }
    Volume::new(out_meta, data)
}
