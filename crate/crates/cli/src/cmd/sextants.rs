use std::path::PathBuf;

use anyhow::Result;
use lesion_harness::eval::{partition_sextants, Sextant};
use lesion_harness::format::sig6;

use crate::run::{create_dir, csv_writer, Context};

pub const SEXTANT_CSV_HEADER: [&str; 6] =
    ["patient_id", "sextant", "region_id", "n_voxels", "n_slices", "volume_mm3"];

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub cohort: PathBuf,
    /// Output directory for sextants.csv.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(ctx: &Context, args: &Args) -> Result<()> {
    let cases = ctx.load_cohort(&args.cohort)?;
    create_dir(&args.out)?;
    let maps = ctx.par_map(&cases, |case| Ok(partition_sextants(case.mask())?))?;
    let mut w = csv_writer(&args.out.join("sextants.csv"))?;
    w.write_record(SEXTANT_CSV_HEADER)?;
    for (case, map) in cases.iter().zip(&maps) {
        let meta = map.meta();
        for (sextant, voxels) in Sextant::ALL.iter().zip(map.regions()) {
            // voxel lists are in index order, so z is non-decreasing
            let mut slices: Vec<usize> = voxels.iter().map(|&v| meta.coords(v)[2]).collect();
            slices.dedup();
            w.write_record([
                case.id().to_string(),
                sextant.to_string(),
                sextant.id().to_string(),
                voxels.len().to_string(),
                slices.len().to_string(),
                sig6(voxels.len() as f64 * meta.voxel_volume_mm3()),
            ])?;
        }
    }
    w.flush()?;
    ctx.write_manifest(&args.out, &[])?;
    Ok(())
}
