use std::path::PathBuf;

use anyhow::{anyhow, bail, Context as _, Result};
use lesion_harness::kv;
use lesion_harness::preprocess::{
    fit_landmarks, resample_crop, standardize, zscore, Interpolation, LandmarkTable,
    ResampleParams,
};
use lesion_harness::synth::cohort::MASK_FILE;
use lesion_harness::vgrid::write_volume;
use lesion_harness::{IntensityVolume, MaskVolume, PatientCase};

use crate::args::{NumList, Pair};
use crate::run::{create_dir, Context};

pub const LANDMARK_FILE: &str = "landmarks.txt";

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub cohort: PathBuf,
    /// Output directory: landmarks.txt plus <id>/<channel>_{std,z}.vgh.
    #[arg(long)]
    pub out: PathBuf,
    /// Image channel to standardize.
    #[arg(long, default_value = "t2")]
    pub channel: String,
    /// Compute percentiles and moments inside the prostate mask only.
    #[arg(long)]
    pub mask_scoped: bool,
    /// Apply this landmark table instead of fitting one on the cohort.
    #[arg(long, value_name = "FILE")]
    pub landmarks: Option<PathBuf>,
    /// Landmark percentiles used when fitting.
    #[arg(long, default_value = "1,10,20,30,40,50,60,70,80,90,99")]
    pub percentiles: NumList,
    /// Also resample outputs in-plane about the mask centroid.
    #[arg(long)]
    pub resample: bool,
    /// In-plane output spacing (mm) when resampling.
    #[arg(long, default_value = "0.29,0.29")]
    pub spacing_xy: Pair<f64>,
    /// In-plane output size when resampling.
    #[arg(long, default_value = "224,224")]
    pub size_xy: Pair<usize>,
    /// Interpolation for intensity outputs (nearest or linear); the mask is
    /// always resampled nearest.
    #[arg(long, default_value = "linear")]
    pub interpolation: Interpolation,
}

fn channel<'a>(case: &'a PatientCase, name: &str) -> Result<&'a IntensityVolume> {
    case.intensity(name)
        .ok_or_else(|| anyhow!("{}: no image channel '{name}'", case.id()))
}

pub fn run(ctx: &Context, args: &Args) -> Result<()> {
    if args.channel.is_empty() || args.channel.contains(['/', '\\']) {
        bail!("--channel must be a plain name");
    }
    let resample = ResampleParams {
        spacing_xy: [args.spacing_xy.0, args.spacing_xy.1],
        size_xy: [args.size_xy.0, args.size_xy.1],
        mode: args.interpolation,
    };
    if args.resample
        && (resample.spacing_xy.iter().any(|s| !(*s > 0.0 && s.is_finite()))
            || resample.size_xy.contains(&0))
    {
        bail!("--spacing-xy must be positive and --size-xy nonzero");
    }
    let cases = ctx.load_cohort(&args.cohort)?;
    let masks: Vec<MaskVolume> = cases.iter().map(|c| c.mask().clone()).collect();
    let scope = |k: usize| args.mask_scoped.then(|| &masks[k]);

    let table = match &args.landmarks {
        Some(path) => LandmarkTable::read(path)
            .with_context(|| format!("reading landmarks {}", path.display()))?,
        None => {
            let vols: Vec<IntensityVolume> = cases
                .iter()
                .map(|c| channel(c, &args.channel).cloned())
                .collect::<Result<_>>()?;
            fit_landmarks(&vols, args.mask_scoped.then_some(&masks[..]), &args.percentiles.0)
                .context("fitting landmarks")?
        }
    };
    create_dir(&args.out)?;
    table.write(args.out.join(LANDMARK_FILE))?;

    let indices: Vec<usize> = (0..cases.len()).collect();
    ctx.par_map(&indices, |&k| {
        let case = &cases[k];
        let vol = channel(case, &args.channel)?;
        let std = standardize(vol, &table, scope(k))
            .with_context(|| format!("standardizing {}", case.id()))?;
        let z = zscore(&std, scope(k)).with_context(|| format!("z-scoring {}", case.id()))?;
        let dir = args.out.join(case.id());
        create_dir(&dir)?;
        let mut outputs = [
            (format!("{}_std.vgh", args.channel), std),
            (format!("{}_z.vgh", args.channel), z),
        ];
        if args.resample {
            let c = case
                .mask()
                .centroid()
                .ok_or_else(|| anyhow!("{}: empty mask", case.id()))?;
            let center = [c[0], c[1]];
            for (_, vol) in outputs.iter_mut() {
                *vol = resample_crop(vol, center, &resample)?;
            }
            let nearest = ResampleParams {
                mode: Interpolation::Nearest,
                ..resample
            };
            write_volume(&resample_crop(case.mask(), center, &nearest)?, dir.join(MASK_FILE))?;
        }
        for (name, vol) in &outputs {
            write_volume(vol, dir.join(name))?;
        }
        Ok(())
    })?;
    let extra = [
        ("landmark_percentiles", kv::join_f64(table.percentiles())),
        ("landmark_standard_values", kv::join_f64(table.standard_values())),
    ];
    ctx.write_manifest(&args.out, &extra)?;
    eprintln!("standardized {} patients", cases.len());
    Ok(())
}
