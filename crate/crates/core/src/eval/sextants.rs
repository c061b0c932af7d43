use std::fmt;

use crate::error::{Error, Result};
use crate::volume::{GridMeta, MaskVolume};

/// Region id for voxels outside the prostate mask.
pub const OUTSIDE: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Zone {
    Base,
    Mid,
    Apex,
}

/// One of the six regions; `id = 3 * side + zone`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sextant {
    pub side: Side,
    pub zone: Zone,
}

impl Sextant {
    pub const ALL: [Sextant; 6] = [
        Sextant::new(Side::Left, Zone::Base),
        Sextant::new(Side::Left, Zone::Mid),
        Sextant::new(Side::Left, Zone::Apex),
        Sextant::new(Side::Right, Zone::Base),
        Sextant::new(Side::Right, Zone::Mid),
        Sextant::new(Side::Right, Zone::Apex),
    ];

    pub const fn new(side: Side, zone: Zone) -> Self {
        Self { side, zone }
    }

    pub fn id(self) -> u8 {
        3 * self.side as u8 + self.zone as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }
}

impl fmt::Display for Sextant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        let zone = match self.zone {
            Zone::Base => "base",
            Zone::Mid => "mid",
            Zone::Apex => "apex",
        };
        write!(f, "{side}_{zone}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SextantMap {
    meta: GridMeta,
    region: Vec<u8>,
}

impl SextantMap {
    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    /// Region id per voxel, [`OUTSIDE`] outside the mask.
    pub fn region_ids(&self) -> &[u8] {
        &self.region
    }

    pub fn region_of(&self, voxel: usize) -> Option<Sextant> {
        Sextant::from_id(self.region[voxel])
    }

    /// Voxel lists of the six regions, indexed by region id.
    pub fn regions(&self) -> [Vec<usize>; 6] {
        let mut out: [Vec<usize>; 6] = Default::default();
        for (i, &r) in self.region.iter().enumerate() {
            if r != OUTSIDE {
                out[r as usize].push(i);
            }
        }
        out
    }
}

/// Slice counts of the base/mid/apex runs for `n` occupied slices; the
/// remainder goes to base first, then mid.
pub fn zone_sizes(n: usize) -> [usize; 3] {
    let q = n / 3;
    let r = n % 3;
    [q + (r >= 1) as usize, q + (r >= 2) as usize, q]
}

/// Splits the mask at its x-centroid into left (`x < cx`) and right halves,
/// and its occupied slices into three balanced contiguous runs (base, mid,
/// apex in increasing z).
pub fn partition_sextants(mask: &MaskVolume) -> Result<SextantMap> {
    let meta = *mask.meta();
    let [cx, _, _] = mask.centroid().ok_or(Error::EmptyMask)?;

    let nz = meta.dims()[2];
    let slice_len = meta.slice_len();
    let occupied: Vec<usize> = (0..nz)
        .filter(|&z| mask.data()[z * slice_len..(z + 1) * slice_len].iter().any(|&v| v))
        .collect();
    let sizes = zone_sizes(occupied.len());
    let mut zone_of = vec![None; nz];
    for (rank, &z) in occupied.iter().enumerate() {
        let zone = if rank < sizes[0] {
            Zone::Base
        } else if rank < sizes[0] + sizes[1] {
            Zone::Mid
        } else {
            Zone::Apex
        };
        zone_of[z] = Some(zone);
    }

    let mut region = vec![OUTSIDE; meta.len()];
    for i in mask.foreground() {
        let [x, _, z] = meta.coords(i);
        let side = if (x as f64) < cx { Side::Left } else { Side::Right };
        let zone = zone_of[z].expect("occupied slice");
        region[i] = Sextant::new(side, zone).id();
    }
    Ok(SextantMap { meta, region })
}
