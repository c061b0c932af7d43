use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context as _, Result};
use lesion_harness::synth::cohort::{label_path, probs_path, LABELS_DIR, PROBS_DIR};
use lesion_harness::synth::{
    derive_dpath_lesion, simulate_pathologist, simulate_predictions, simulate_radiologist,
    DegradationSpec,
};
use lesion_harness::vgrid::write_volume;
use lesion_harness::LabelSource;

use crate::args::{LesionArgs, Selection, Universe};
use crate::cmd::evaluate::PredictionSource;
use crate::run::{create_dir, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Path,
    Rad,
    Predictions,
}

impl FromStr for Output {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "path" => Ok(Output::Path),
            "rad" => Ok(Output::Rad),
            "predictions" => Ok(Output::Predictions),
            _ => Err(format!("unknown output '{s}' (path, rad, predictions)")),
        }
    }
}

impl Universe for Output {
    fn all() -> Vec<Self> {
        vec![Output::Path, Output::Rad, Output::Predictions]
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Cohort directory; outputs are written into each patient's directory.
    #[arg(long)]
    pub cohort: PathBuf,
    /// Which simulators to run (comma list or `all`).
    #[arg(long, default_value = "all")]
    pub outputs: Selection<Output>,
    /// Name under which predictions are stored (probs/<name>.vgh).
    #[arg(long, default_value = "sim")]
    pub pred_name: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Probability that a lesion is missed entirely.
    #[arg(long, default_value_t = 0.15)]
    pub miss_prob: f64,
    /// In-plane erosion radius of radiologist lesions (mm).
    #[arg(long, default_value_t = 1.0)]
    pub erosion_mm: f64,
    /// Probability that a pathologist keeps a lesion slice.
    #[arg(long, default_value_t = 0.6)]
    pub slice_keep_prob: f64,
    /// Expected false-positive blobs per patient in predictions.
    #[arg(long, default_value_t = 0.5)]
    pub fp_rate: f64,
    /// Gaussian blur of predictions (mm).
    #[arg(long, default_value_t = 1.0)]
    pub blur_mm: f64,
    /// Gaussian noise added to prediction channels.
    #[arg(long, default_value_t = 0.1)]
    pub noise_sigma: f64,
    /// Lesion pipeline used when DPathLesion labels must be derived.
    #[command(flatten)]
    pub lesion: LesionArgs,
}

impl Args {
    pub fn spec(&self) -> Result<DegradationSpec> {
        let spec = DegradationSpec {
            seed: self.seed,
            miss_prob: self.miss_prob,
            erosion_mm: self.erosion_mm,
            slice_keep_prob: self.slice_keep_prob,
            fp_rate: self.fp_rate,
            blur_mm: self.blur_mm,
            noise_sigma: self.noise_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn run(ctx: &Context, args: &Args) -> Result<()> {
    let spec = args.spec()?;
    let params = args.lesion.params()?;
    if args.pred_name.contains('=') {
        bail!("--pred-name must be a plain name");
    }
    args.pred_name
        .parse::<PredictionSource>()
        .map_err(|e| anyhow!("--pred-name: {e}"))?;
    let cases = ctx.load_cohort(&args.cohort)?;
    let wants = |o: Output| args.outputs.0.contains(&o);
    ctx.par_map(&cases, |case| {
        let dir = args.cohort.join(case.id());
        let mut case = case.clone();
        if case.label(LabelSource::DPathLesion).is_none() && (wants(Output::Path) || wants(Output::Rad)) {
            let lesions = derive_dpath_lesion(&case, &params)?;
            create_dir(&dir.join(LABELS_DIR))?;
            write_volume(&lesions, label_path(&dir, LabelSource::DPathLesion))?;
            case.insert_label(LabelSource::DPathLesion, lesions)?;
        }
        if wants(Output::Path) {
            let labels = simulate_pathologist(&case, &spec)?;
            write_volume(&labels, label_path(&dir, LabelSource::Path))?;
        }
        if wants(Output::Rad) {
            let labels = simulate_radiologist(&case, &spec)?;
            write_volume(&labels, label_path(&dir, LabelSource::Rad))?;
        }
        if wants(Output::Predictions) {
            let probs = simulate_predictions(&case, &spec)?;
            create_dir(&dir.join(PROBS_DIR))?;
            write_volume(&probs, probs_path(&dir, &args.pred_name))?;
        }
        Ok(())
    })
    .with_context(|| format!("simulating into {}", args.cohort.display()))?;
    ctx.write_manifest(&args.cohort, &[])?;
    eprintln!("simulated {} patients", cases.len());
    Ok(())
}
