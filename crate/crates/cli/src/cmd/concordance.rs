use std::path::PathBuf;

use anyhow::Result;
use lesion_harness::eval::{concordance, partition_sextants, summarize};
use lesion_harness::format::sig6_opt;
use lesion_harness::{ClassGroup, LabelSource};

use crate::args::{LesionArgs, Selection};
use crate::run::{create_dir, csv_writer, Context};

pub const CONCORDANCE_CSV_HEADER: [&str; 6] =
    ["truth", "other", "group", "patient_id", "dice", "auc"];
pub const SUMMARY_CSV_HEADER: [&str; 9] = [
    "truth",
    "other",
    "group",
    "n_patients",
    "dice_mean",
    "dice_std",
    "auc_mean",
    "auc_std",
    "auc_undefined",
];

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub cohort: PathBuf,
    /// Output directory for concordance.csv and concordance_summary.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Reference label source.
    #[arg(long, default_value = "dpath_lesion")]
    pub truth: LabelSource,
    /// Label sources compared against the reference (comma list or `all`).
    #[arg(long, default_value = "rad,path")]
    pub compare: Selection<LabelSource>,
    /// Class groups (comma list or `all`).
    #[arg(long, default_value = "cancer")]
    pub groups: Selection<ClassGroup>,
    /// Lesion pipeline applied to the reference labels.
    #[command(flatten)]
    pub lesion: LesionArgs,
}

struct Row {
    other: LabelSource,
    group: ClassGroup,
    dice: f64,
    auc: Option<f64>,
}

pub fn run(ctx: &Context, args: &Args) -> Result<()> {
    let params = args.lesion.params()?;
    let cases = ctx.load_cohort(&args.cohort)?;
    create_dir(&args.out)?;
    let per_case = ctx.par_map(&cases, |case| {
        let truth = case.require_label(args.truth)?;
        let sextants = partition_sextants(case.mask())?;
        let mut rows = Vec::new();
        for &group in &args.groups.0 {
            let lesions = params.extract(truth, group)?;
            for &other in &args.compare.0 {
                let c = concordance(truth, &lesions, case.require_label(other)?, group, &sextants)?;
                rows.push(Row {
                    other,
                    group,
                    dice: c.dice,
                    auc: c.auc,
                });
            }
        }
        Ok(rows)
    })?;

    let mut w = csv_writer(&args.out.join("concordance.csv"))?;
    w.write_record(CONCORDANCE_CSV_HEADER)?;
    let mut s = csv_writer(&args.out.join("concordance_summary.csv"))?;
    s.write_record(SUMMARY_CSV_HEADER)?;
    for &other in &args.compare.0 {
        for &group in &args.groups.0 {
            let mut dice = Vec::new();
            let mut auc = Vec::new();
            for (case, rows) in cases.iter().zip(&per_case) {
                for r in rows.iter().filter(|r| r.other == other && r.group == group) {
                    w.write_record([
                        args.truth.to_string(),
                        other.to_string(),
                        group.to_string(),
                        case.id().to_string(),
                        sig6_opt(Some(r.dice)),
                        sig6_opt(r.auc),
                    ])?;
                    dice.push(Some(r.dice));
                    auc.push(r.auc);
                }
            }
            let d = summarize(dice);
            let a = summarize(auc);
            s.write_record([
                args.truth.to_string(),
                other.to_string(),
                group.to_string(),
                cases.len().to_string(),
                sig6_opt(d.mean),
                sig6_opt(d.std),
                sig6_opt(a.mean),
                sig6_opt(a.std),
                a.n_undefined.to_string(),
            ])?;
        }
    }
    w.flush()?;
    s.flush()?;
    ctx.write_manifest(&args.out, &[])?;
    Ok(())
}
