//! On-disk cohorts: one directory per patient plus a `key = value` manifest.
//!
//! ```text
//! cohort/
//!   cohort.txt                 seed, n_patients, generator settings, patients
//!   case0000/
//!     mask.vgh  mask.raw
//!     labels/<source>.vgh      dpath_pixel, dpath_lesion, path, rad
//!     images/<channel>.vgh     t2, adc
//!     probs/<name>.vgh
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kv;
use crate::vgrid::{read_typed, write_volume, HEADER_EXTENSION};
use crate::volume::{LabelSource, PatientCase};

pub const COHORT_MANIFEST: &str = "cohort.txt";
pub const MASK_FILE: &str = "mask.vgh";
pub const LABELS_DIR: &str = "labels";
pub const IMAGES_DIR: &str = "images";
pub const PROBS_DIR: &str = "probs";

/// Parsed cohort manifest. `entries` keeps every pair in file order,
/// including `patients`.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortManifest {
    pub entries: Vec<(String, String)>,
    pub patients: Vec<String>,
}

impl CohortManifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn label_path(case_dir: &Path, source: LabelSource) -> PathBuf {
    case_dir
        .join(LABELS_DIR)
        .join(format!("{}.{HEADER_EXTENSION}", source.name()))
}

pub fn image_path(case_dir: &Path, channel: &str) -> PathBuf {
    case_dir
        .join(IMAGES_DIR)
        .join(format!("{channel}.{HEADER_EXTENSION}"))
}

pub fn probs_path(case_dir: &Path, name: &str) -> PathBuf {
    case_dir
        .join(PROBS_DIR)
        .join(format!("{name}.{HEADER_EXTENSION}"))
}

/// Writes every volume held by `case` under `<root>/<id>/`.
pub fn write_case(root: &Path, case: &PatientCase) -> Result<()> {
    let dir = root.join(case.id());
    ensure_dir(&dir)?;
    write_volume(case.mask(), dir.join(MASK_FILE))?;
    if case.labels().next().is_some() {
        ensure_dir(&dir.join(LABELS_DIR))?;
    }
    for (source, labels) in case.labels() {
        write_volume(labels, label_path(&dir, source))?;
    }
    if case.intensities().next().is_some() {
        ensure_dir(&dir.join(IMAGES_DIR))?;
    }
    for (name, vol) in case.intensities() {
        write_volume(vol, image_path(&dir, name))?;
    }
    let probs: Vec<_> = case.prob_names().collect();
    if !probs.is_empty() {
        ensure_dir(&dir.join(PROBS_DIR))?;
    }
    for name in probs {
        write_volume(case.probs(name).expect("listed"), probs_path(&dir, name))?;
    }
    Ok(())
}

/// Sorted stems of the `.vgh` files in `dir`; empty if `dir` is absent.
fn header_stems(dir: &Path) -> Result<Vec<String>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut stems = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(HEADER_EXTENSION) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            stems.push(stem.to_string());
        }
    }
    stems.sort();
    Ok(stems)
}

/// Reads `<root>/<id>/` back into a [`PatientCase`].
pub fn read_case(root: &Path, id: &str) -> Result<PatientCase> {
    let dir = root.join(id);
    let mut case = PatientCase::new(id, read_typed(dir.join(MASK_FILE))?)?;
    for stem in header_stems(&dir.join(LABELS_DIR))? {
        let source: LabelSource = stem.parse()?;
        case.insert_label(source, read_typed(label_path(&dir, source))?)?;
    }
    for stem in header_stems(&dir.join(IMAGES_DIR))? {
        let vol = read_typed(image_path(&dir, &stem))?;
        case.insert_intensity(stem, vol)?;
    }
    for stem in header_stems(&dir.join(PROBS_DIR))? {
        let vol = read_typed(probs_path(&dir, &stem))?;
        case.insert_probs(stem, vol)?;
    }
    Ok(case)
}

/// Writes `cohort.txt`: the given pairs followed by `patients`.
pub fn write_cohort_manifest(
    root: &Path,
    pairs: &[(&str, String)],
    patients: &[String],
) -> Result<()> {
    ensure_dir(root)?;
    let mut all: Vec<(&str, String)> = pairs.to_vec();
    all.push(("patients", patients.join(" ")));
    let path = root.join(COHORT_MANIFEST);
    fs::write(&path, kv::render(all)).map_err(|e| Error::io(&path, e))
}

pub fn read_manifest(root: &Path) -> Result<CohortManifest> {
    let path = root.join(COHORT_MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let entries = kv::parse(&text).map_err(|reason| Error::MalformedHeader {
        path: path.clone(),
        reason,
    })?;
    let patients: Vec<String> = entries
        .iter()
        .find(|(k, _)| k == "patients")
        .ok_or_else(|| Error::MalformedHeader {
            path: path.clone(),
            reason: "missing key 'patients'".into(),
        })?
        .1
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let mut sorted = patients.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePatient(w[0].clone()));
    }
    Ok(CohortManifest { entries, patients })
}

/// Writes a cohort directory: manifest plus one directory per case.
pub fn write_cohort(root: &Path, pairs: &[(&str, String)], cases: &[PatientCase]) -> Result<()> {
    let ids: Vec<String> = cases.iter().map(|c| c.id().to_string()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePatient(w[0].clone()));
    }
    for case in cases {
        write_case(root, case)?;
    }
    write_cohort_manifest(root, pairs, &ids)
}

/// Reads every case listed in the manifest, sorted by patient id.
pub fn load_cohort(root: &Path) -> Result<Vec<PatientCase>> {
    let manifest = read_manifest(root)?;
    if manifest.patients.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let mut ids = manifest.patients;
    ids.sort();
    ids.iter().map(|id| read_case(root, id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::phantom::{generate_phantom, PhantomSpec};
    use crate::volume::ProbVolume;

    #[test]
    fn case_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut case = generate_phantom(&PhantomSpec::default(), 0).unwrap();
        let probs = ProbVolume::one_hot(case.label(LabelSource::DPathPixel).unwrap());
        case.insert_probs("oracle", probs).unwrap();
        write_case(dir.path(), &case).unwrap();
        assert_eq!(read_case(dir.path(), case.id()).unwrap(), case);
    }

    #[test]
    fn cohort_round_trip_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let spec = PhantomSpec::default();
        let cases = vec![
            generate_phantom(&spec, 1).unwrap(),
            generate_phantom(&spec, 0).unwrap(),
        ];
        write_cohort(dir.path(), &spec.to_pairs(), &cases).unwrap();
        let manifest = read_manifest(dir.path()).unwrap();
        assert_eq!(manifest.get("seed"), Some("42"));
        assert_eq!(manifest.patients, vec!["case0001", "case0000"]);
        let loaded = load_cohort(dir.path()).unwrap();
        assert_eq!(loaded[0], cases[1]);
        assert_eq!(loaded[1], cases[0]);
    }

    #[test]
    fn duplicate_patients_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let case = generate_phantom(&PhantomSpec::default(), 0).unwrap();
        assert!(matches!(
            write_cohort(dir.path(), &[], &[case.clone(), case]),
            Err(Error::DuplicatePatient(_))
        ));
        fs::write(dir.path().join(COHORT_MANIFEST), "patients = a b a\n").unwrap();
        assert!(matches!(read_manifest(dir.path()), Err(Error::DuplicatePatient(_))));
    }

    #[test]
    fn unknown_label_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let case = generate_phantom(&PhantomSpec::default(), 0).unwrap();
        write_case(dir.path(), &case).unwrap();
        let labels = case.label(LabelSource::DPathPixel).unwrap();
        write_volume(labels, dir.path().join("case0000/labels/bogus.vgh")).unwrap();
        assert!(read_case(dir.path(), "case0000").is_err());
    }
}
