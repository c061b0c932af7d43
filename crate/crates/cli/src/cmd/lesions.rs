use std::path::PathBuf;

use anyhow::{Context as _, Result};
use lesion_harness::lesions::{lesionset_to_labelvolume, write_lesion_rows, LESION_CSV_HEADER};
use lesion_harness::vgrid::write_volume;
use lesion_harness::{ClassGroup, LabelSource};

use crate::args::LesionArgs;
use crate::run::{create_dir, csv_writer, Context};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub cohort: PathBuf,
    /// Output directory for lesions.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Label source to process.
    #[arg(long, default_value = "dpath_pixel")]
    pub source: LabelSource,
    /// Class group binarized before closing.
    #[arg(long, default_value = "cancer")]
    pub group: ClassGroup,
    /// Also write each patient's graded lesion labels as <out>/<id>.vgh.
    #[arg(long)]
    pub write_volumes: bool,
    #[command(flatten)]
    pub lesion: LesionArgs,
}

pub fn run(ctx: &Context, args: &Args) -> Result<()> {
    let params = args.lesion.params()?;
    let cases = ctx.load_cohort(&args.cohort)?;
    create_dir(&args.out)?;
    let sets = ctx.par_map(&cases, |case| {
        let labels = case.require_label(args.source)?;
        let set = params.extract(labels, args.group)?;
        if args.write_volumes {
            let path = args.out.join(format!("{}.vgh", case.id()));
            write_volume(&lesionset_to_labelvolume(&set)?, &path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(set)
    })?;
    let mut w = csv_writer(&args.out.join("lesions.csv"))?;
    w.write_record(LESION_CSV_HEADER)?;
    let mut total = 0;
    for (case, set) in cases.iter().zip(&sets) {
        write_lesion_rows(&mut w, case.id(), set)?;
        total += set.len();
    }
    w.flush()?;
    ctx.write_manifest(&args.out, &[("n_lesions", total.to_string())])?;
    eprintln!("{total} lesions from {} patients", cases.len());
    Ok(())
}
