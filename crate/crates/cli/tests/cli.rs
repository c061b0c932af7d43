use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lesion_harness::preprocess::{percentiles_of, LandmarkTable};
use lesion_harness::synth::{generate_phantom, load_cohort, write_cohort, PhantomSpec};
use lesion_harness::vgrid::read_typed;
use lesion_harness::{ClassGroup, GridMeta, LabelSource, ProbVolume, Volume};

fn harness(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lesion-harness"))
        .current_dir(dir)
        .env_remove("LESION_HARNESS_JOBS")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = harness(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_cohort(dir: &Path, extra: &[&str]) {
    let mut args = vec!["phantom", "--out", "cohort", "--patients", "4", "--dims", "64,64,12"];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

fn cancer_voxels(dir: &Path, source: LabelSource) -> usize {
    load_cohort(&dir.join("cohort"))
        .unwrap()
        .iter()
        .map(|c| c.require_label(source).unwrap().binarize(ClassGroup::CancerVsAll).count())
        .sum()
}

#[test]
fn usage_errors_exit_2_and_runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(harness(d, &["phantom"]).status.code(), Some(2));
    assert_eq!(harness(d, &["phantom", "--out", "x", "--bogus"]).status.code(), Some(2));
    assert_eq!(harness(d, &["phantom", "--out", "x", "--dims", "4,4"]).status.code(), Some(2));
    assert_eq!(harness(d, &["--jobs", "0", "sextants", "--cohort", "c", "--out", "o"]).status.code(), Some(2));
    assert_eq!(harness(d, &["sextants", "--cohort", "missing", "--out", "o"]).status.code(), Some(1));
    assert_eq!(harness(d, &["phantom", "--out", "x", "--radius", "30,40"]).status.code(), Some(1));
    assert_eq!(harness(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.txt"), "patients = 2\nseed = 9\nout = cohort\ndims = 48,48,10\n").unwrap();
    ok(d, &["phantom", "--config", "run.txt", "--seed", "11"]);
    let manifest = fs::read_to_string(d.join("cohort/phantom.manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 11\n"), "{manifest}");
    assert!(manifest.contains("patients = 2\n"));
    assert!(!manifest.contains("jobs"));
    assert_eq!(load_cohort(&d.join("cohort")).unwrap().len(), 2);

    fs::write(d.join("bad.txt"), "patient = 2\n").unwrap();
    let out = harness(d, &["phantom", "--config", "bad.txt", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn manifest_replays_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_cohort(d, &["--seed", "5"]);
    ok(d, &["sextants", "--cohort", "cohort", "--out", "first"]);
    fs::copy(d.join("cohort/phantom.manifest.txt"), d.join("replay.txt")).unwrap();
    let text = fs::read_to_string(d.join("replay.txt")).unwrap().replace("out = cohort", "out = again");
    fs::write(d.join("replay.txt"), text).unwrap();
    ok(d, &["phantom", "--config", "replay.txt"]);
    let a = load_cohort(&d.join("cohort")).unwrap();
    let b = load_cohort(&d.join("again")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn jobs_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lesion-harness"))
        .current_dir(dir.path())
        .env("LESION_HARNESS_JOBS", "0")
        .args(["sextants", "--cohort", "c", "--out", "o"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identity_simulation_reproduces_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_cohort(d, &[]);
    ok(d, &[
        "simulate", "--cohort", "cohort", "--miss-prob", "0", "--erosion-mm", "0",
        "--slice-keep-prob", "1", "--fp-rate", "0", "--blur-mm", "0", "--noise-sigma", "0",
        "--pred-name", "identity",
    ]);
    for case in load_cohort(&d.join("cohort")).unwrap() {
        let dir = d.join("cohort").join(case.id()).join("labels");
        let reference = fs::read(dir.join("dpath_lesion.raw")).unwrap();
        assert_eq!(fs::read(dir.join("path.raw")).unwrap(), reference);
        assert_eq!(fs::read(dir.join("rad.raw")).unwrap(), reference);
        let oracle = ProbVolume::one_hot(case.require_label(LabelSource::DPathPixel).unwrap());
        assert_eq!(case.probs("identity").unwrap(), &oracle);
    }
}

#[test]
fn erosion_reduces_cancer_volume() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_cohort(d, &[]);
    ok(d, &["simulate", "--cohort", "cohort", "--outputs", "rad", "--miss-prob", "0", "--erosion-mm", "1"]);
    assert!(cancer_voxels(d, LabelSource::Rad) < cancer_voxels(d, LabelSource::DPathLesion));
}

#[test]
fn oracle_predictions_from_directory_score_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_cohort(d, &[]);
    fs::create_dir(d.join("oracle")).unwrap();
    for case in load_cohort(&d.join("cohort")).unwrap() {
        let probs = ProbVolume::one_hot(case.require_label(LabelSource::DPathLesion).unwrap());
        lesion_harness::vgrid::write_volume(&probs, d.join(format!("oracle/{}.vgh", case.id()))).unwrap();
    }
    ok(d, &["evaluate", "--cohort", "cohort", "--out", "eval", "--predictions", "oracle=oracle"]);
    let mut reader = csv::Reader::from_path(d.join("eval/metrics.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        for metric in ["dice", "auc", "sensitivity", "specificity"] {
            let v = &record[col(metric)];
            assert!(v == "1" || v == "NA", "{metric} = {v}");
        }
        rows += 1;
    }
    assert_eq!(rows, 4 * 3);
}

#[test]
fn prediction_noise_lowers_cohort_auc() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["phantom", "--out", "cohort"]);
    ok(d, &["simulate", "--cohort", "cohort", "--outputs", "predictions", "--noise-sigma", "0.05", "--pred-name", "low"]);
    ok(d, &["simulate", "--cohort", "cohort", "--outputs", "predictions", "--noise-sigma", "0.3", "--pred-name", "high"]);
    ok(d, &["evaluate", "--cohort", "cohort", "--out", "eval", "--predictions", "low", "--predictions", "high", "--groups", "cancer"]);
    let mut reader = csv::Reader::from_path(d.join("eval/metrics.csv")).unwrap();
    let (mut low, mut high) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.unwrap();
        if let Ok(auc) = record[5].parse::<f64>() {
            match &record[0] {
                "low" => low.push(auc),
                "high" => high.push(auc),
                other => panic!("unexpected prediction {other}"),
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&low) >= mean(&high), "{} vs {}", mean(&low), mean(&high));
}

#[test]
fn csv_numbers_have_six_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_cohort(d, &[]);
    ok(d, &["simulate", "--cohort", "cohort"]);
    ok(d, &["concordance", "--cohort", "cohort", "--out", "conc"]);
    let text = fs::read_to_string(d.join("conc/concordance.csv")).unwrap();
    for field in text.lines().skip(1).flat_map(|l| l.split(',').skip(4)) {
        if field == "NA" {
            continue;
        }
        let digits = field.trim_start_matches("0.").chars().filter(char::is_ascii_digit).count();
        assert!(digits <= 6, "{field}");
        field.parse::<f64>().unwrap();
    }
}

#[test]
fn standardize_fixed_point_and_landmark_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_cohort(d, &[]);
    ok(d, &["standardize", "--cohort", "cohort", "--out", "fit"]);
    let table = LandmarkTable::read(d.join("fit/landmarks.txt")).unwrap();
    for case in load_cohort(&d.join("cohort")).unwrap() {
        let std: Volume<f32> = read_typed(d.join(format!("fit/{}/t2_std.vgh", case.id()))).unwrap();
        let got = percentiles_of(std.data(), table.percentiles()).unwrap();
        for (g, w) in got.iter().zip(table.standard_values()) {
            assert!((g - w).abs() <= 1e-3, "{g} vs {w}");
        }
    }
    ok(d, &["standardize", "--cohort", "cohort", "--out", "apply", "--landmarks", "fit/landmarks.txt"]);
    assert_eq!(fs::read(d.join("apply/landmarks.txt")).unwrap(), fs::read(d.join("fit/landmarks.txt")).unwrap());
    for case in ["case0000", "case0003"] {
        for file in ["t2_std.raw", "t2_z.raw"] {
            assert_eq!(
                fs::read(d.join("fit").join(case).join(file)).unwrap(),
                fs::read(d.join("apply").join(case).join(file)).unwrap()
            );
        }
    }
}

#[test]
fn constant_image_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let spec = PhantomSpec {
        grid: GridMeta::new([48, 48, 10], [0.5, 0.5, 3.0]).unwrap(),
        ..PhantomSpec::default()
    };
    let mut case = generate_phantom(&spec, 0).unwrap();
    case.insert_intensity("flat", Volume::filled(*case.meta(), 3.0f32)).unwrap();
    write_cohort(&d.join("cohort"), &[], &[case]).unwrap();
    let out = harness(d, &["standardize", "--cohort", "cohort", "--out", "o", "--channel", "flat"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("degenerate intensities"), "{err}");
}
