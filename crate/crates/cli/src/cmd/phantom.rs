use std::path::PathBuf;

use anyhow::{Context as _, Result};
use lesion_harness::kv;
use lesion_harness::synth::{
    derive_dpath_lesion, generate_phantom, write_case, write_cohort_manifest, PhantomSpec, Span,
};
use lesion_harness::{GridMeta, LabelSource};

use crate::args::{Dims, LesionArgs, NumList, Pair};
use crate::run::Context;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Output cohort directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub patients: usize,
    #[arg(long, default_value = "96,96,16")]
    pub dims: Dims,
    /// Voxel spacing (mm).
    #[arg(long, default_value = "0.5,0.5,3")]
    pub spacing: NumList,
    /// Prostate semi-axis range along x (mm).
    #[arg(long, default_value = "20,23")]
    pub prostate_x: Pair<f64>,
    #[arg(long, default_value = "18,21")]
    pub prostate_y: Pair<f64>,
    #[arg(long, default_value = "19,22")]
    pub prostate_z: Pair<f64>,
    /// Inclusive range of lesion counts per patient.
    #[arg(long, default_value = "1,3")]
    pub lesions: Pair<usize>,
    /// Lesion radius range (mm).
    #[arg(long, default_value = "4,9")]
    pub radius: Pair<f64>,
    /// Range of the aggressive voxel fraction within a lesion.
    #[arg(long, default_value = "0,1")]
    pub agg_fraction: Pair<f64>,
    /// Scales lesion intensity contrast.
    #[arg(long, default_value_t = 1.0)]
    pub contrast: f64,
    /// Image noise relative to the normal-gland level.
    #[arg(long, default_value_t = 0.05)]
    pub noise_sigma: f64,
    /// Lesion pipeline used to derive the DPathLesion labels.
    #[command(flatten)]
    pub lesion: LesionArgs,
}

fn span(p: Pair<f64>) -> Span {
    Span::new(p.0, p.1)
}

impl Args {
    pub fn spec(&self) -> Result<PhantomSpec> {
        let grid = GridMeta::new(self.dims.0, self.spacing.exactly::<3>("--spacing")?)?;
        let spec = PhantomSpec {
            master_seed: self.seed,
            n_patients: self.patients,
            grid,
            prostate_semi_axes_mm: [
                span(self.prostate_x),
                span(self.prostate_y),
                span(self.prostate_z),
            ],
            lesions_per_patient: (self.lesions.0, self.lesions.1),
            lesion_radius_mm: span(self.radius),
            aggressive_fraction: span(self.agg_fraction),
            contrast: self.contrast,
            noise_sigma: self.noise_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn run(ctx: &Context, args: &Args) -> Result<()> {
    let spec = args.spec()?;
    let params = args.lesion.params()?;
    let indices: Vec<usize> = (0..spec.n_patients).collect();
    let ids = ctx.par_map(&indices, |&i| {
        let mut case = generate_phantom(&spec, i)?;
        let lesions = derive_dpath_lesion(&case, &params)?;
        case.insert_label(LabelSource::DPathLesion, lesions)?;
        write_case(&args.out, &case).with_context(|| format!("writing {}", case.id()))?;
        Ok(case.id().to_string())
    })?;
    let mut pairs = spec.to_pairs();
    pairs.push(("dpath_lesion_disk_radii_mm", kv::join_f64(&params.disk_radii_mm)));
    pairs.push(("dpath_lesion_connectivity", params.connectivity.to_string()));
    pairs.push(("dpath_lesion_min_volume_mm3", params.min_volume_mm3.to_string()));
    pairs.push(("dpath_lesion_agg_threshold", params.thresholds.aggressive.to_string()));
    pairs.push(("dpath_lesion_ind_threshold", params.thresholds.indolent.to_string()));
    write_cohort_manifest(&args.out, &pairs, &ids)?;
    ctx.write_manifest(&args.out, &[])?;
    eprintln!("wrote {} patients to {}", ids.len(), args.out.display());
    Ok(())
}
