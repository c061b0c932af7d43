//! 3D connected-component labelling.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::volume::{GridMeta, MaskVolume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Face neighbours.
    Six,
    /// Face and edge neighbours.
    Eighteen,
    /// Face, edge and corner neighbours.
    #[default]
    TwentySix,
}

impl Connectivity {
    pub fn from_count(n: u32) -> Result<Self> {
        match n {
            6 => Ok(Connectivity::Six),
            18 => Ok(Connectivity::Eighteen),
            26 => Ok(Connectivity::TwentySix),
            _ => Err(Error::InvalidParameter(format!(
                "connectivity must be 6, 18 or 26, got {n}"
            ))),
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Connectivity::Six => 6,
            Connectivity::Eighteen => 18,
            Connectivity::TwentySix => 26,
        }
    }

    pub fn offsets(self) -> Vec<[i32; 3]> {
        let max_nonzero = match self {
            Connectivity::Six => 1,
            Connectivity::Eighteen => 2,
            Connectivity::TwentySix => 3,
        };
        let mut out = Vec::with_capacity(self.count() as usize);
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let nonzero = [dx, dy, dz].iter().filter(|&&d| d != 0).count();
                    if (1..=max_nonzero).contains(&nonzero) {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .parse::<u32>()
            .map_err(|_| Error::InvalidParameter(format!("bad connectivity '{s}'")))?;
        Connectivity::from_count(n)
    }
}

/// Per-voxel component ids: 0 is background, components are `1..=count`
/// numbered in first-encounter scan order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMap {
    meta: GridMeta,
    ids: Vec<u32>,
    count: usize,
}

impl ComponentMap {
    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Voxel indices of each component, ascending; entry `k` is id `k + 1`.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &id) in self.ids.iter().enumerate() {
            if id > 0 {
                out[id as usize - 1].push(i);
            }
        }
        out
    }
}

pub fn connected_components(mask: &MaskVolume, connectivity: Connectivity) -> ComponentMap {
    let meta = *mask.meta();
    let data = mask.data();
    let neighbours = connectivity.offsets();
    let mut ids = vec![0u32; meta.len()];
    let mut count = 0u32;
    let mut queue = VecDeque::new();

    for start in 0..meta.len() {
        if !data[start] || ids[start] != 0 {
            continue;
        }
        count += 1;
        ids[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let c = meta.coords(i);
            for &o in &neighbours {
                if let Some(j) = meta.offset_index(c, o) {
                    if data[j] && ids[j] == 0 {
                        ids[j] = count;
                        queue.push_back(j);
                    }
                }
            }
        }
    }

    ComponentMap {
        meta,
        ids,
        count: count as usize,
    }
}
