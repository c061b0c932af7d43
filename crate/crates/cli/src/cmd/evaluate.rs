use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context as _, Result};
use lesion_harness::eval::{
    aggregate, evaluate_patient, render_summary, write_metrics_csv, EvalParams,
};
use lesion_harness::vgrid::read_typed;
use lesion_harness::{ClassGroup, LabelSource, PatientCase, ProbVolume};

use crate::args::{LesionArgs, Selection};
use crate::run::{create_dir, Context};

/// `name` (read from `<cohort>/<id>/probs/<name>.vgh`) or `name=dir` (read
/// from `<dir>/<id>.vgh`).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSource {
    pub name: String,
    pub dir: Option<PathBuf>,
}

impl FromStr for PredictionSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, dir) = match s.split_once('=') {
            Some((n, d)) => (n, Some(PathBuf::from(d))),
            None => (s, None),
        };
        let ok = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok {
            return Err(format!("bad prediction name '{name}'"));
        }
        Ok(PredictionSource {
            name: name.to_string(),
            dir,
        })
    }
}

impl PredictionSource {
    fn load(&self, case: &PatientCase) -> Result<ProbVolume> {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(format!("{}.vgh", case.id()));
                read_typed(&path).with_context(|| format!("reading {}", path.display()))
            }
            None => case
                .probs(&self.name)
                .cloned()
                .ok_or_else(|| anyhow!("{}: no prediction '{}'", case.id(), self.name)),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub cohort: PathBuf,
    /// Output directory for metrics.csv and summary.txt.
    #[arg(long)]
    pub out: PathBuf,
    /// Prediction to score, `name` or `name=dir`; repeatable.
    #[arg(long = "predictions", required = true)]
    pub predictions: Vec<PredictionSource>,
    /// Truth label sources (comma list or `all`).
    #[arg(long, default_value = "dpath_lesion")]
    pub truth: Selection<LabelSource>,
    /// Class groups (comma list or `all`).
    #[arg(long, default_value = "all")]
    pub groups: Selection<ClassGroup>,
    /// Lesion score cutoff for sensitivity and specificity.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Lesion pipeline applied to the truth labels.
    #[command(flatten)]
    pub lesion: LesionArgs,
}

pub fn run(ctx: &Context, args: &Args) -> Result<()> {
    let params = EvalParams {
        lesions: args.lesion.params()?,
        threshold: args.threshold,
    };
    if !args.threshold.is_finite() {
        bail!("--threshold must be finite");
    }
    let mut names: Vec<&str> = args.predictions.iter().map(|p| p.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        bail!("prediction names must be unique");
    }
    let cases = ctx.load_cohort(&args.cohort)?;
    create_dir(&args.out)?;
    let per_case = ctx.par_map(&cases, |case| {
        let mut rows = Vec::new();
        for source in &args.predictions {
            let pred = source.load(case)?;
            for &truth in &args.truth.0 {
                for &group in &args.groups.0 {
                    rows.push(evaluate_patient(case, truth, &source.name, &pred, group, &params)?);
                }
            }
        }
        Ok(rows)
    })?;
    let report = aggregate(per_case.into_iter().flatten().collect())?;
    let path = args.out.join("metrics.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_metrics_csv(&report, std::io::BufWriter::new(file))?;
    let summary = render_summary(&report);
    fs::write(args.out.join("summary.txt"), &summary)?;
    ctx.write_manifest(&args.out, &[])?;
    print!("{summary}");
    Ok(())
}
