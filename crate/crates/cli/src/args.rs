//! Argument types shared by several subcommands.
//!
//! List-valued flags take a single comma-separated token (`--disk-radii
//! 0.5,1.5,0.5`) so that their raw value round-trips through manifests.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use lesion_harness::lesions::{
    Connectivity, GradeThresholds, LesionParams, DEFAULT_MIN_VOLUME_MM3,
};
use lesion_harness::{ClassGroup, LabelSource};

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// `key = value` file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for per-patient work (does not change any output).
    #[arg(long, global = true, env = "LESION_HARNESS_JOBS")]
    pub jobs: Option<usize>,
}

/// Comma-separated numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct NumList(pub Vec<f64>);

impl FromStr for NumList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("'{t}' is not a finite number"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(NumList)
    }
}

impl NumList {
    pub fn exactly<const N: usize>(&self, what: &str) -> anyhow::Result<[f64; N]> {
        <[f64; N]>::try_from(self.0.clone())
            .map_err(|_| anyhow::anyhow!("{what} needs {N} comma-separated values"))
    }
}

/// `nx,ny,nz` grid size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dims(pub [usize; 3]);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a count")))
            .collect::<Result<_, _>>()?;
        <[usize; 3]>::try_from(parts)
            .map(Dims)
            .map_err(|_| format!("expected 'nx,ny,nz', got '{s}'"))
    }
}

/// `lo,hi` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair<T>(pub T, pub T);

impl<T: FromStr> FromStr for Pair<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected 'lo,hi', got '{s}'"))?;
        let parse = |t: &str| t.trim().parse::<T>().map_err(|e| format!("'{t}': {e}"));
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

/// Comma-separated list of names, or `all`.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T>(pub Vec<T>);

pub trait Universe: Sized + Copy + PartialEq + FromStr {
    fn all() -> Vec<Self>;
}

impl Universe for LabelSource {
    fn all() -> Vec<Self> {
        LabelSource::ALL.to_vec()
    }
}

impl Universe for ClassGroup {
    fn all() -> Vec<Self> {
        ClassGroup::ALL.to_vec()
    }
}

impl<T: Universe> FromStr for Selection<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "all" {
            return Ok(Selection(T::all()));
        }
        let mut out: Vec<T> = Vec::new();
        for t in s.split(',') {
            let v = t.trim().parse::<T>().map_err(|e| e.to_string())?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err("empty selection".into());
        }
        Ok(Selection(out))
    }
}

/// Lesion-forming pipeline parameters.
#[derive(Debug, Clone, Args)]
pub struct LesionArgs {
    /// Closing disk radii (mm) for slices dz = -1, 0, +1.
    #[arg(long, default_value = "0.5,1.5,0.5")]
    pub disk_radii: NumList,
    /// 6, 18 or 26.
    #[arg(long, default_value = "26")]
    pub connectivity: Connectivity,
    /// Components below this volume (mm^3) are discarded.
    #[arg(long, default_value_t = DEFAULT_MIN_VOLUME_MM3)]
    pub min_volume: f64,
    /// Minimum aggressive voxel fraction for an aggressive lesion.
    #[arg(long, default_value_t = 0.01)]
    pub agg_threshold: f64,
    /// Minimum indolent voxel fraction for an indolent lesion.
    #[arg(long, default_value_t = 0.01)]
    pub ind_threshold: f64,
}

impl LesionArgs {
    pub fn params(&self) -> anyhow::Result<LesionParams> {
        let disk_radii_mm = self.disk_radii.exactly::<3>("--disk-radii")?;
        if disk_radii_mm.iter().any(|&r| r < 0.0) || self.min_volume < 0.0 {
            anyhow::bail!("disk radii and --min-volume must be >= 0");
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.agg_threshold) || !unit(self.ind_threshold) {
            anyhow::bail!("grading thresholds must lie within [0, 1]");
        }
        Ok(LesionParams {
            disk_radii_mm,
            connectivity: self.connectivity,
            min_volume_mm3: self.min_volume,
            thresholds: GradeThresholds {
                aggressive: self.agg_threshold,
                indolent: self.ind_threshold,
            },
        })
    }
}
