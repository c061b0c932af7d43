//! Per-patient rows, cohort aggregation and report rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use super::ConfusionCounts;
use crate::error::{Error, Result};
use crate::format::{sig6, sig6_opt};
use crate::volume::{ClassGroup, LabelSource};

#[derive(Debug, Clone, PartialEq)]
pub struct PatientRow {
    pub patient_id: String,
    /// Name of the prediction (or comparator label) being scored.
    pub prediction: String,
    pub truth: LabelSource,
    pub group: ClassGroup,
    pub dice: Option<f64>,
    pub auc: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub counts: ConfusionCounts,
}

/// Mean and sample standard deviation over the defined entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n_defined: usize,
    pub n_undefined: usize,
}

impl MetricSummary {
    pub fn display(&self) -> String {
        match (self.mean, self.std) {
            (Some(m), Some(s)) => format!("{}±{}", sig6(m), sig6(s)),
            _ => crate::format::UNDEFINED.to_string(),
        }
    }
}

/// Sample (n−1) standard deviation, 0 when only one value is defined.
pub fn summarize(values: impl IntoIterator<Item = Option<f64>>) -> MetricSummary {
    let mut defined = Vec::new();
    let mut n_undefined = 0;
    for v in values {
        match v {
            Some(x) => defined.push(x),
            None => n_undefined += 1,
        }
    }
    let n = defined.len();
    if n == 0 {
        return MetricSummary {
            mean: None,
            std: None,
            n_defined: 0,
            n_undefined,
        };
    }
    let mean = defined.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (defined.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    MetricSummary {
        mean: Some(mean),
        std: Some(std),
        n_defined: n,
        n_undefined,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub prediction: String,
    pub truth: LabelSource,
    pub group: ClassGroup,
    pub n_patients: usize,
    pub dice: MetricSummary,
    pub auc: MetricSummary,
    pub sensitivity: MetricSummary,
    pub specificity: MetricSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Sorted by (prediction, truth, group, patient id).
    pub rows: Vec<PatientRow>,
    pub summaries: Vec<GroupSummary>,
}

type RowKey = (String, LabelSource, ClassGroup);

/// Sorts rows and reduces each (prediction, truth, group) pairing in
/// patient-id order, so the result does not depend on row arrival order.
pub fn aggregate(mut rows: Vec<PatientRow>) -> Result<MetricsReport> {
    if rows.is_empty() {
        return Err(Error::EmptyCohort);
    }
    rows.sort_by(|a, b| {
        (&a.prediction, a.truth, a.group, &a.patient_id)
            .cmp(&(&b.prediction, b.truth, b.group, &b.patient_id))
    });
    let mut grouped: BTreeMap<RowKey, Vec<&PatientRow>> = BTreeMap::new();
    for r in &rows {
        grouped
            .entry((r.prediction.clone(), r.truth, r.group))
            .or_default()
            .push(r);
    }
    let summaries = grouped
        .into_iter()
        .map(|((prediction, truth, group), rs)| GroupSummary {
            prediction,
            truth,
            group,
            n_patients: rs.len(),
            dice: summarize(rs.iter().map(|r| r.dice)),
            auc: summarize(rs.iter().map(|r| r.auc)),
            sensitivity: summarize(rs.iter().map(|r| r.sensitivity)),
            specificity: summarize(rs.iter().map(|r| r.specificity)),
        })
        .collect();
    Ok(MetricsReport { rows, summaries })
}

pub const METRICS_CSV_HEADER: [&str; 12] = [
    "prediction",
    "truth",
    "group",
    "patient_id",
    "dice",
    "auc",
    "sensitivity",
    "specificity",
    "tp",
    "fp",
    "tn",
    "fn",
];

pub fn write_metrics_csv<W: Write>(report: &MetricsReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.prediction.clone(),
            r.truth.to_string(),
            r.group.to_string(),
            r.patient_id.clone(),
            sig6_opt(r.dice),
            sig6_opt(r.auc),
            sig6_opt(r.sensitivity),
            sig6_opt(r.specificity),
            r.counts.tp.to_string(),
            r.counts.fp.to_string(),
            r.counts.tn.to_string(),
            r.counts.fn_.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<metrics csv>", e))?;
    Ok(())
}

/// Text summary: for every group and metric, a matrix with one row per
/// prediction and one column per truth source, cells `mean±std`.
pub fn render_summary(report: &MetricsReport) -> String {
    let predictions: BTreeSet<&str> = report
        .summaries
        .iter()
        .map(|s| s.prediction.as_str())
        .collect();
    let truths: BTreeSet<LabelSource> = report.summaries.iter().map(|s| s.truth).collect();
    let groups: BTreeSet<ClassGroup> = report.summaries.iter().map(|s| s.group).collect();
    let lookup = |p: &str, t: LabelSource, g: ClassGroup| {
        report
            .summaries
            .iter()
            .find(|s| s.prediction == p && s.truth == t && s.group == g)
    };
    type Pick = fn(&GroupSummary) -> &MetricSummary;
    let metrics: [(&str, Pick); 4] = [
        ("dice", |s| &s.dice),
        ("auc", |s| &s.auc),
        ("sensitivity", |s| &s.sensitivity),
        ("specificity", |s| &s.specificity),
    ];

    let width = predictions.iter().map(|p| p.len()).max().unwrap_or(0).max(10);
    let mut out = String::new();
    for &group in &groups {
        for (name, pick) in &metrics {
            writeln!(out, "[{group}] {name} (mean±std, rows = prediction, columns = truth)").unwrap();
            write!(out, "{:width$}", "").unwrap();
            for t in &truths {
                write!(out, "  {:>22}", t.name()).unwrap();
            }
            writeln!(out).unwrap();
            for &p in &predictions {
                write!(out, "{p:width$}").unwrap();
                for &t in &truths {
                    let cell = lookup(p, t, group)
                        .map(|s| {
                            let m = pick(s);
                            if m.n_undefined > 0 {
                                format!("{} ({} NA)", m.display(), m.n_undefined)
                            } else {
                                m.display()
                            }
                        })
                        .unwrap_or_else(|| "-".into());
                    write!(out, "  {cell:>22}").unwrap();
                }
                writeln!(out).unwrap();
            }
            writeln!(out).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, auc: Option<f64>) -> PatientRow {
        PatientRow {
            patient_id: id.into(),
            prediction: "sim".into(),
            truth: LabelSource::DPathLesion,
            group: ClassGroup::CancerVsAll,
            dice: Some(1.0),
            auc,
            sensitivity: None,
            specificity: Some(1.0),
            counts: ConfusionCounts::default(),
        }
    }

    #[test]
    fn single_row_has_zero_std() {
        let s = summarize([Some(0.7)]);
        assert_eq!((s.mean, s.std), (Some(0.7), Some(0.0)));
    }

    #[test]
    fn sample_std() {
        let s = summarize([Some(0.2), Some(0.4)]);
        assert!((s.mean.unwrap() - 0.3).abs() < 1e-15);
        // sqrt(((0.1)² + (0.1)²) / 1)
        assert!((s.std.unwrap() - 0.02f64.sqrt()).abs() < 1e-12);
        assert!((s.std.unwrap() - 0.141421).abs() < 1e-6);
    }

    #[test]
    fn undefined_entries_are_excluded() {
        let report = aggregate(vec![row("b", None), row("a", Some(0.8)), row("c", Some(0.6))]).unwrap();
        let s = &report.summaries[0];
        assert!((s.auc.mean.unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(s.auc.n_undefined, 1);
        assert_eq!(s.sensitivity.mean, None);
        let ids: Vec<_> = report.rows.iter().map(|r| r.patient_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn empty_cohort() {
        assert!(matches!(aggregate(vec![]), Err(Error::EmptyCohort)));
    }

    #[test]
    fn csv_and_summary_render() {
        let report = aggregate(vec![row("a", Some(0.8)), row("b", None)]).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("prediction,truth,group,patient_id,dice,auc"));
        assert!(text.contains("sim,dpath_lesion,cancer,b,1,NA,NA,1,0,0,0,0"));
        let summary = render_summary(&report);
        assert!(summary.contains("[cancer] auc"));
        assert!(summary.contains("0.8±0 (1 NA)"));
    }
}
