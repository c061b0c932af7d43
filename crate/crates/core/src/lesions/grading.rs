//! Lesion grading from a pixel-level grade map.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::volume::{ClassId, LabelVolume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Benign,
    Indolent,
    Aggressive,
}

impl Grade {
    /// Class painted for this grade. Benign lesions render as normal tissue.
    pub fn class(self) -> ClassId {
        match self {
            Grade::Benign => ClassId::Normal,
            Grade::Indolent => ClassId::Indolent,
            Grade::Aggressive => ClassId::Aggressive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Grade::Benign => "benign",
            Grade::Indolent => "indolent",
            Grade::Aggressive => "aggressive",
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Grade::Benign, Grade::Indolent, Grade::Aggressive]
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown grade '{s}'")))
    }
}

/// Minimum voxel fractions (inclusive) for the aggressive and indolent grades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradeThresholds {
    pub aggressive: f64,
    pub indolent: f64,
}

impl Default for GradeThresholds {
    fn default() -> Self {
        Self {
            aggressive: 0.01,
            indolent: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub grade: Grade,
    pub agg_fraction: f64,
    pub ind_fraction: f64,
}

/// Grades a voxel set: aggressive if at least `thresholds.aggressive` of its
/// voxels are aggressive in `grade_map`, else indolent if at least
/// `thresholds.indolent` are indolent, else benign.
pub fn grade_lesion(
    voxels: &[usize],
    grade_map: &LabelVolume,
    thresholds: GradeThresholds,
) -> Result<Grading> {
    if voxels.is_empty() {
        return Err(Error::EmptyLesion);
    }
    let (mut agg, mut ind) = (0usize, 0usize);
    for &v in voxels {
        match grade_map[v] {
            ClassId::Aggressive => agg += 1,
            ClassId::Indolent => ind += 1,
            ClassId::Normal => {}
        }
    }
    let n = voxels.len() as f64;
    let agg_fraction = agg as f64 / n;
    let ind_fraction = ind as f64 / n;
    let grade = if agg_fraction >= thresholds.aggressive {
        Grade::Aggressive
    } else if ind_fraction >= thresholds.indolent {
        Grade::Indolent
    } else {
        Grade::Benign
    };
    Ok(Grading {
        grade,
        agg_fraction,
        ind_fraction,
    })
}
