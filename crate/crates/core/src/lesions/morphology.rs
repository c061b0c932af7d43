//! Binary morphology with stacked-disk structuring elements.

use crate::error::{Error, Result};
use crate::volume::{GridMeta, MaskVolume, Volume};

/// Largest tolerated |sx - sy| when converting mm radii to voxel radii.
const ISOTROPY_TOLERANCE: f64 = 1e-6;

/// Set of voxel offsets. Always contains the origin and is closed under
/// negation.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuringElement {
    offsets: Vec<[i32; 3]>,
    radii_mm: Option<[f64; 3]>,
}

impl StructuringElement {
    /// Builds an element from explicit offsets; the set must contain the
    /// origin and be symmetric.
    pub fn from_offsets(mut offsets: Vec<[i32; 3]>) -> Result<Self> {
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.binary_search(&[0, 0, 0]).is_err() {
            return Err(Error::InvalidParameter(
                "structuring element must contain the origin".into(),
            ));
        }
        if offsets
            .iter()
            .any(|o| offsets.binary_search(&[-o[0], -o[1], -o[2]]).is_err())
        {
            return Err(Error::InvalidParameter(
                "structuring element must be symmetric".into(),
            ));
        }
        Ok(Self {
            offsets,
            radii_mm: None,
        })
    }

    pub fn offsets(&self) -> &[[i32; 3]] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// The mm radii this element was built from, if it came from disks.
    pub fn radii_mm(&self) -> Option<[f64; 3]> {
        self.radii_mm
    }

    /// Maximum |offset| along each axis.
    pub fn reach(&self) -> [usize; 3] {
        let mut r = [0usize; 3];
        for o in &self.offsets {
            for k in 0..3 {
                r[k] = r[k].max(o[k].unsigned_abs() as usize);
            }
        }
        r
    }

    /// Offsets lying in slice `dz`.
    pub fn slice(&self, dz: i32) -> impl Iterator<Item = [i32; 2]> + '_ {
        self.offsets
            .iter()
            .filter(move |o| o[2] == dz)
            .map(|o| [o[0], o[1]])
    }
}

/// Converts an in-plane radius in mm to whole voxels, rounding half away
/// from zero.
pub fn radius_to_voxels(meta: &GridMeta, radius_mm: f64) -> Result<u32> {
    let [sx, sy, _] = meta.spacing();
    if (sx - sy).abs() > ISOTROPY_TOLERANCE {
        return Err(Error::AnisotropicInPlaneSpacing { sx, sy });
    }
    if !(radius_mm.is_finite() && radius_mm >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be finite and non-negative, got {radius_mm}"
        )));
    }
    Ok((radius_mm / sx).round() as u32)
}

/// All `(dx, dy)` with `dx² + dy² <= r²`.
pub fn disk_offsets(radius: u32) -> Vec<[i32; 2]> {
    let r = radius as i32;
    let r2 = r * r;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r2 {
                out.push([dx, dy]);
            }
        }
    }
    out
}

/// Stacks three in-plane disks on slices -1, 0 and +1. The middle radius
/// goes on the centre slice.
pub fn build_structuring_element(
    meta: &GridMeta,
    radii_mm: [f64; 3],
) -> Result<StructuringElement> {
    if radii_mm.iter().any(|&r| !(r.is_finite() && r > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "disk radii must be positive, got {radii_mm:?}"
        )));
    }
    let mut vox = [0u32; 3];
    for k in 0..3 {
        vox[k] = radius_to_voxels(meta, radii_mm[k])?;
    }
    if vox[0] != vox[2] {
        return Err(Error::InvalidParameter(format!(
            "outer disks must round to the same voxel radius, got {} and {}",
            vox[0], vox[2]
        )));
    }
    let mut offsets = Vec::new();
    for (slot, dz) in [-1, 0, 1].into_iter().enumerate() {
        offsets.extend(disk_offsets(vox[slot]).into_iter().map(|[dx, dy]| [dx, dy, dz]));
    }
    let mut se = StructuringElement::from_offsets(offsets)?;
    se.radii_mm = Some(radii_mm);
    Ok(se)
}

/// Single-slice disk for in-plane operations.
pub fn in_plane_disk(meta: &GridMeta, radius_mm: f64) -> Result<StructuringElement> {
    let r = radius_to_voxels(meta, radius_mm)?;
    let offsets = disk_offsets(r).into_iter().map(|[dx, dy]| [dx, dy, 0]).collect();
    StructuringElement::from_offsets(offsets)
}

/// Dilation clipped to the grid.
pub fn dilate(mask: &MaskVolume, se: &StructuringElement) -> MaskVolume {
    let meta = *mask.meta();
    let mut out = vec![false; meta.len()];
    for i in mask.foreground() {
        let c = meta.coords(i);
        for &o in se.offsets() {
            if let Some(j) = meta.offset_index(c, o) {
                out[j] = true;
            }
        }
    }
    Volume::from_parts_unchecked(meta, out)
}

/// Erosion with voxels outside the grid treated as background.
pub fn erode(mask: &MaskVolume, se: &StructuringElement) -> MaskVolume {
    let meta = *mask.meta();
    let data = mask.data();
    let mut out = vec![false; meta.len()];
    for i in mask.foreground() {
        let c = meta.coords(i);
        out[i] = se
            .offsets()
            .iter()
            .all(|&o| meta.offset_index(c, o).is_some_and(|j| data[j]));
    }
    Volume::from_parts_unchecked(meta, out)
}

/// Morphological closing (dilation, then erosion).
///
/// The grid is treated as embedded in unbounded background, so dilation may
/// spill past the border and erosion sees that spill. This keeps closing
/// extensive and idempotent near the grid boundary.
pub fn binary_close(mask: &MaskVolume, se: &StructuringElement) -> MaskVolume {
    let meta = *mask.meta();
    let reach = se.reach();
    let [nx, ny, nz] = meta.dims();
    let pdims = [nx + 2 * reach[0], ny + 2 * reach[1], nz + 2 * reach[2]];
    let pindex = |[x, y, z]: [usize; 3]| {
        (x + reach[0]) + pdims[0] * ((y + reach[1]) + pdims[1] * (z + reach[2]))
    };
    let lin: Vec<isize> = se
        .offsets()
        .iter()
        .map(|o| o[0] as isize + pdims[0] as isize * (o[1] as isize + pdims[1] as isize * o[2] as isize))
        .collect();

    let mut dilated = vec![false; pdims[0] * pdims[1] * pdims[2]];
    for i in mask.foreground() {
        let p = pindex(meta.coords(i)) as isize;
        for &d in &lin {
            dilated[(p + d) as usize] = true;
        }
    }

    let mut out = vec![false; meta.len()];
    for (i, v) in out.iter_mut().enumerate() {
        let p = pindex(meta.coords(i)) as isize;
        if !dilated[p as usize] {
            continue;
        }
        *v = lin.iter().all(|&d| dilated[(p + d) as usize]);
    }
    Volume::from_parts_unchecked(meta, out)
}
