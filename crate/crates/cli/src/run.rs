//! Per-invocation context: worker pool, cohort loading and run manifests.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context as _, Result};
use lesion_harness::synth::{read_case, read_manifest};
use lesion_harness::PatientCase;
use rayon::prelude::*;

use crate::args::GlobalArgs;
use crate::config::Echo;

pub struct Context {
    pub echo: Echo,
    pool: rayon::ThreadPool,
}

impl Context {
    pub fn new(global: &GlobalArgs, echo: Echo) -> Result<Self> {
        let jobs = match global.jobs {
            Some(0) => bail!("--jobs must be >= 1"),
            Some(n) => n,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building worker pool")?;
        Ok(Self { echo, pool })
    }

    /// Maps `f` over `items` in the worker pool. Results keep the input
    /// order; the first failing item (in input order) is reported.
    pub fn par_map<T, R, F>(&self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        let results: Vec<Result<R>> = self.pool.install(|| items.par_iter().map(&f).collect());
        results.into_iter().collect()
    }

    /// Reads every case of a cohort directory, sorted by patient id.
    pub fn load_cohort(&self, root: &Path) -> Result<Vec<PatientCase>> {
        let manifest =
            read_manifest(root).with_context(|| format!("reading cohort {}", root.display()))?;
        let mut ids = manifest.patients;
        if ids.is_empty() {
            bail!("cohort {} lists no patients", root.display());
        }
        ids.sort();
        self.par_map(&ids, |id| {
            read_case(root, id).with_context(|| format!("reading patient {id}"))
        })
    }

    /// Writes `<dir>/<command>.manifest.txt` echoing the resolved
    /// configuration. `extra` pairs are appended as comments so the file
    /// still loads as a `--config`.
    pub fn write_manifest(&self, dir: &Path, extra: &[(&str, String)]) -> Result<()> {
        let mut text = self.echo.render();
        for line in lesion_harness::kv::render(extra.iter().cloned()).lines() {
            text.push_str(&format!("# {line}\n"));
        }
        create_dir(dir)?;
        let path = dir.join(format!("{}.manifest.txt", self.echo.command));
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub type CsvWriter = csv::Writer<BufWriter<File>>;

pub fn csv_writer(path: &Path) -> Result<CsvWriter> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}
